#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kanhead/activation.hpp"
#include "kanhead/error.hpp"
#include "kanhead/head.hpp"

namespace kanhead {

enum class EmbeddingKind { tfidf, random, vectors, precomputed };

struct EmbeddingChoice {
    EmbeddingKind kind = EmbeddingKind::tfidf;
    std::string path; ///< for vectors / precomputed

    std::string label() const {
        switch (kind) {
        case EmbeddingKind::tfidf: return "tfidf";
        case EmbeddingKind::random: return "random";
        case EmbeddingKind::vectors: return "vectors:" + path;
        case EmbeddingKind::precomputed: return "precomputed:" + path;
        }
        return "?";
    }

    bool contextual() const noexcept { return kind == EmbeddingKind::precomputed; }
};

inline std::optional<EmbeddingChoice> parse_embedding_choice(std::string_view s) {
    if (s == "tfidf") return EmbeddingChoice{EmbeddingKind::tfidf, {}};
    if (s == "random") return EmbeddingChoice{EmbeddingKind::random, {}};
    auto with_path = [&](std::string_view prefix, EmbeddingKind k) -> std::optional<EmbeddingChoice> {
        if (s.substr(0, prefix.size()) != prefix || s.size() == prefix.size()) return std::nullopt;
        return EmbeddingChoice{k, std::string(s.substr(prefix.size()))};
    };
    if (auto c = with_path("vectors:", EmbeddingKind::vectors)) return c;
    if (auto c = with_path("precomputed:", EmbeddingKind::precomputed)) return c;
    return std::nullopt;
}

/// Flat experiment description. `heads` and `embeddings` hold one entry
/// for train/bench and any number for grid.
struct ExperimentConfig {
    std::string dataset;
    std::vector<EmbeddingChoice> embeddings{EmbeddingChoice{}};
    std::vector<HeadFamily> heads{HeadFamily::mlp};

    std::size_t hidden_dim = 0;
    Activation activation = Activation::relu;
    std::size_t grid_size = 8;
    std::size_t spline_order = 3;
    bool spline_scaler = true;
    bool silu_path = false;
    bool fourier_bias = true;
    double dropout = 0.3;
    double l1_strength = 0.0;

    std::optional<std::size_t> epochs;     ///< 15 static / 5 precomputed
    std::optional<std::size_t> batch_size; ///< 32 static / 8 precomputed
    double head_lr = 2e-4;
    double backbone_lr = 2e-5;
    double weight_decay = 0.01;
    double clip_max_norm = 1.0;
    std::size_t patience = 3;
    std::uint64_t seed = 42;
    std::string out = "runs/default";

    double test_fraction = 0.2;
    std::size_t max_vocab = 8000;
    std::size_t embed_dim = 300;
    std::optional<bool> embedding_trainable; ///< random: true, vectors: false

    std::size_t input_dim = 100; ///< bench only
    std::size_t num_classes = 6; ///< bench only
    std::optional<std::size_t> bench_batch;
    std::size_t warmup = 10;
    std::size_t iters = 100;

    std::size_t epochs_for(const EmbeddingChoice& e) const { return epochs.value_or(e.contextual() ? 5 : 15); }
    std::size_t batch_for(const EmbeddingChoice& e) const { return batch_size.value_or(e.contextual() ? 8 : 32); }
    bool trainable_for(const EmbeddingChoice& e) const {
        return embedding_trainable.value_or(e.kind == EmbeddingKind::random);
    }

    HeadSpec head_spec(HeadFamily family, std::size_t in, std::size_t out_classes) const {
        HeadSpec s;
        s.family = family;
        s.in = in;
        s.out = out_classes;
        s.hidden_dim = hidden_dim;
        s.activation = activation;
        s.grid_size = grid_size;
        s.spline_order = spline_order;
        s.spline_scaler = spline_scaler;
        s.silu_path = silu_path;
        s.fourier_bias = fourier_bias;
        s.dropout = dropout;
        s.l1_strength = l1_strength;
        return s;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

/// Parses "key = value" lines; '#' starts a comment, list values are
/// comma-separated. Every failure is a ConfigError naming line and key.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    std::size_t lineno = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        auto fail = [&](const std::string& key, const std::string& msg) -> ConfigError {
            return ConfigError(source + ":" + std::to_string(lineno) + ": " + (key.empty() ? "" : "'" + key + "': ") + msg);
        };
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw fail("", "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw fail("", "missing key before '='");
        if (value.empty()) throw fail(key, "missing value");
        if (!seen.insert(key).second) throw fail(key, "key given twice");

        auto as_size = [&]() -> std::size_t {
            std::size_t v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || p != value.data() + value.size()) throw fail(key, "expected a nonnegative integer, got '" + value + "'");
            return v;
        };
        auto as_positive = [&]() -> std::size_t {
            const auto v = as_size();
            if (v == 0) throw fail(key, "must be positive");
            return v;
        };
        auto as_u64 = [&]() -> std::uint64_t {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || p != value.data() + value.size()) throw fail(key, "expected an unsigned integer, got '" + value + "'");
            return v;
        };
        auto as_real = [&](double lo, double hi, bool lo_open, bool hi_open) -> double {
            double v = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || p != value.data() + value.size() || !std::isfinite(v)) {
                throw fail(key, "expected a number, got '" + value + "'");
            }
            const bool ok_lo = lo_open ? v > lo : v >= lo;
            const bool ok_hi = hi_open ? v < hi : v <= hi;
            if (!ok_lo || !ok_hi) throw fail(key, "value " + value + " out of range");
            return v;
        };
        auto as_bool = [&]() -> bool {
            if (value == "true" || value == "yes" || value == "on" || value == "1") return true;
            if (value == "false" || value == "no" || value == "off" || value == "0") return false;
            throw fail(key, "expected true or false, got '" + value + "'");
        };
        constexpr double inf = std::numeric_limits<double>::infinity();

        if (key == "dataset") cfg.dataset = value;
        else if (key == "embedding") {
            cfg.embeddings.clear();
            for (const auto& item : detail::split_list(value)) {
                auto e = parse_embedding_choice(item);
                if (!e) throw fail(key, "unknown embedding '" + item + "' (tfidf, random, vectors:PATH, precomputed:PATH)");
                cfg.embeddings.push_back(*e);
            }
        } else if (key == "head") {
            cfg.heads.clear();
            for (const auto& item : detail::split_list(value)) {
                try {
                    cfg.heads.push_back(parse_head_family(item));
                } catch (const ArgumentError&) {
                    throw fail(key, "unknown head '" + item + "' (mlp, fourierkan, efficientkan, fasterkan)");
                }
            }
        } else if (key == "hidden_dim") cfg.hidden_dim = as_size();
        else if (key == "activation") {
            if (value != "relu" && value != "sigmoid") throw fail(key, "expected relu or sigmoid, got '" + value + "'");
            cfg.activation = parse_activation(value);
        } else if (key == "grid_size") cfg.grid_size = as_positive();
        else if (key == "spline_order") cfg.spline_order = as_size();
        else if (key == "spline_scaler") cfg.spline_scaler = as_bool();
        else if (key == "silu_path") cfg.silu_path = as_bool();
        else if (key == "fourier_bias") cfg.fourier_bias = as_bool();
        else if (key == "dropout") cfg.dropout = as_real(0.0, 1.0, false, true);
        else if (key == "l1_strength") cfg.l1_strength = as_real(0.0, inf, false, true);
        else if (key == "epochs") cfg.epochs = as_positive();
        else if (key == "batch_size") cfg.batch_size = as_positive();
        else if (key == "head_lr") cfg.head_lr = as_real(0.0, inf, false, true);
        else if (key == "backbone_lr") cfg.backbone_lr = as_real(0.0, inf, false, true);
        else if (key == "weight_decay") cfg.weight_decay = as_real(0.0, inf, false, true);
        else if (key == "clip_max_norm") cfg.clip_max_norm = as_real(0.0, inf, true, true);
        else if (key == "patience") cfg.patience = as_size();
        else if (key == "seed") cfg.seed = as_u64();
        else if (key == "out") cfg.out = value;
        else if (key == "test_fraction") cfg.test_fraction = as_real(0.0, 1.0, true, true);
        else if (key == "max_vocab") cfg.max_vocab = as_positive();
        else if (key == "embed_dim") cfg.embed_dim = as_positive();
        else if (key == "embedding_trainable") cfg.embedding_trainable = as_bool();
        else if (key == "input_dim") cfg.input_dim = as_positive();
        else if (key == "num_classes") cfg.num_classes = as_positive();
        else if (key == "bench_batch") cfg.bench_batch = as_positive();
        else if (key == "warmup") cfg.warmup = as_size();
        else if (key == "iters") cfg.iters = as_positive();
        else throw fail(key, "unknown key");
    }
    return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path.string() + "'");
    return parse_config(f, path.string());
}

} // namespace kanhead
