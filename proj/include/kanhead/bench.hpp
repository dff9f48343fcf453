#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "kanhead/head.hpp"
#include "kanhead/init.hpp"

namespace kanhead {

struct LatencyStats {
    double fwd_ms_mean = 0.0;
    double bwd_ms_mean = 0.0;
    std::size_t iters = 0; ///< number of timed samples behind each mean
};

/// Times forward and backward separately on random [batch x in] inputs.
/// The first `warmup` iterations run but are not recorded.
inline LatencyStats bench_latency(Head& head, std::size_t batch, std::size_t warmup, std::size_t iters, Rng rng) {
    if (iters == 0) throw ArgumentError("bench_latency: iters must be at least 1");
    if (batch == 0) throw ArgumentError("bench_latency: batch must be at least 1");
    using clock = std::chrono::steady_clock;
    const Matrix x = uniform_init(rng, 1.0, batch, head.in_features());
    const Matrix g = uniform_init(rng, 1.0, batch, head.out_features());
    head.set_training(false);
    LatencyStats s;
    double fwd = 0.0, bwd = 0.0;
    for (std::size_t it = 0; it < warmup + iters; ++it) {
        head.zero_grad();
        const auto t0 = clock::now();
        const Matrix y = head.forward(x);
        const auto t1 = clock::now();
        const Matrix gi = head.backward(g);
        const auto t2 = clock::now();
        if (it < warmup) continue;
        fwd += std::chrono::duration<double, std::milli>(t1 - t0).count();
        bwd += std::chrono::duration<double, std::milli>(t2 - t1).count();
        ++s.iters;
    }
    head.zero_grad();
    s.fwd_ms_mean = fwd / static_cast<double>(s.iters);
    s.bwd_ms_mean = bwd / static_cast<double>(s.iters);
    return s;
}

/// One row of the efficiency/F1 comparison.
struct BenchReport {
    std::string model;
    std::size_t params_total = 0;
    std::size_t params_trainable = 0;
    double train_seconds = 0.0;
    double fwd_ms_mean = 0.0;
    double bwd_ms_mean = 0.0;
    double f1_weighted = 0.0;
    double accuracy = 0.0;
    std::string latency_unit = "ms per batch";
    std::string status = "ok";

    bool operator==(const BenchReport&) const = default;
};

inline nlohmann::json to_json(const BenchReport& r) {
    return {{"model", r.model},
            {"params", r.params_total},
            {"params_trainable", r.params_trainable},
            {"train_s", r.train_seconds},
            {"fwd_ms", r.fwd_ms_mean},
            {"bwd_ms", r.bwd_ms_mean},
            {"f1", r.f1_weighted},
            {"accuracy", r.accuracy},
            {"latency_unit", r.latency_unit},
            {"status", r.status}};
}

inline BenchReport bench_report_from_json(const nlohmann::json& j) {
    BenchReport r;
    r.model = j.at("model").get<std::string>();
    r.params_total = j.at("params").get<std::size_t>();
    r.params_trainable = j.at("params_trainable").get<std::size_t>();
    r.train_seconds = j.at("train_s").get<double>();
    r.fwd_ms_mean = j.at("fwd_ms").get<double>();
    r.bwd_ms_mean = j.at("bwd_ms").get<double>();
    r.f1_weighted = j.at("f1").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.latency_unit = j.at("latency_unit").get<std::string>();
    r.status = j.at("status").get<std::string>();
    return r;
}

inline std::string format_params(std::size_t n) {
    char buf[32];
    if (n >= 10'000) std::snprintf(buf, sizeof buf, "%.2fM", static_cast<double>(n) / 1e6);
    else std::snprintf(buf, sizeof buf, "%zu", n);
    return buf;
}

/// Aligned plain-text table: model, params, train_s, fwd_ms, bwd_ms, f1, accuracy.
inline std::string format_table(const std::vector<BenchReport>& rows) {
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.model.size());
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %9s  %9s  %9s  %7s  %8s\n", static_cast<int>(width), "Model", "Params",
                  "Train (s)", "Fwd (ms)", "Bwd (ms)", "F1", "Accuracy");
    out += buf;
    out += std::string(width + 2 + 10 + 2 + 9 + 2 + 9 + 2 + 9 + 2 + 7 + 2 + 8, '-') + "\n";
    for (const auto& r : rows) {
        if (r.status != "ok") {
            std::snprintf(buf, sizeof buf, "%-*s  FAILED: %s\n", static_cast<int>(width), r.model.c_str(), r.status.c_str());
        } else {
            std::snprintf(buf, sizeof buf, "%-*s  %10s  %9.2f  %9.3f  %9.3f  %7.3f  %8.3f\n", static_cast<int>(width),
                          r.model.c_str(), format_params(r.params_total).c_str(), r.train_seconds, r.fwd_ms_mean,
                          r.bwd_ms_mean, r.f1_weighted, r.accuracy);
        }
        out += buf;
    }
    return out;
}

/// Table for untrained latency runs: model, params, fwd_ms, bwd_ms.
inline std::string format_latency_table(const std::vector<BenchReport>& rows) {
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.model.size());
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %9s  %9s\n", static_cast<int>(width), "Model", "Params", "Fwd (ms)",
                  "Bwd (ms)");
    out += buf;
    out += std::string(width + 2 + 10 + 2 + 9 + 2 + 9, '-') + "\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %10s  %9.3f  %9.3f\n", static_cast<int>(width), r.model.c_str(),
                      format_params(r.params_total).c_str(), r.fwd_ms_mean, r.bwd_ms_mean);
        out += buf;
    }
    return out;
}

} // namespace kanhead
