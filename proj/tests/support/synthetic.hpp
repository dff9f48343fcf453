#pragma once

// Deterministic synthetic corpora for end-to-end checks.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kanhead/dataset.hpp"
#include "kanhead/rng.hpp"

namespace kanhead::testing {

inline LabeledDataset make_dataset(std::vector<std::pair<std::vector<std::string>, std::size_t>> rows,
                                   std::vector<std::string> label_names) {
    LabeledDataset ds;
    ds.label_names = std::move(label_names);
    std::size_t id = 1;
    for (auto& [tokens, label] : rows) ds.records.push_back({std::to_string(id++), std::move(tokens), label});
    return ds;
}

/// Each class owns 3 private keywords; every sentence holds 8 draws from
/// its class keywords and 2 tokens from a shared pool of 30 fillers.
/// Separable by construction.
inline LabeledDataset keyword_corpus(const std::vector<std::size_t>& per_class, Rng& rng) {
    std::vector<std::pair<std::vector<std::string>, std::size_t>> rows;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (std::size_t n = 0; n < per_class[c]; ++n) {
            std::vector<std::string> tokens;
            for (int k = 0; k < 8; ++k) tokens.push_back("c" + std::to_string(c) + "_w" + std::to_string(rng.below(3)));
            for (int k = 0; k < 2; ++k) tokens.push_back("filler" + std::to_string(rng.below(30)));
            rng.shuffle(tokens);
            rows.emplace_back(std::move(tokens), c);
        }
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < per_class.size(); ++c) names.push_back("class" + std::to_string(c));
    return make_dataset(std::move(rows), names);
}

/// 300 training and 100 test sentences of the keyword task.
inline std::pair<LabeledDataset, LabeledDataset> separable_task(std::uint64_t seed) {
    Rng rng(seed);
    Rng train_rng = rng.stream("train"), test_rng = rng.stream("test");
    return {keyword_corpus({100, 100, 100}, train_rng), keyword_corpus({34, 33, 33}, test_rng)};
}

/// Concentric rings in the unit disk. A point's class is its radius band
/// ([0, 0.45), [0.45, 0.75), [0.75, 1)); its sentence is the x and y bin
/// tokens at two resolutions. The class depends on x^2 + y^2, so no single
/// token decides it.
inline LabeledDataset ring_corpus(const std::vector<std::size_t>& per_class, Rng& rng) {
    constexpr double bands[] = {0.0, 0.45, 0.75, 1.0};
    auto bin = [](double v, int bins) {
        const int b = static_cast<int>(std::floor((v + 1.0) / 2.0 * bins));
        return std::min(std::max(b, 0), bins - 1);
    };
    std::vector<std::pair<std::vector<std::string>, std::size_t>> rows;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (std::size_t n = 0; n < per_class[c]; ++n) {
            // Uniform over the band's area.
            const double r0 = bands[c] * bands[c], r1 = bands[c + 1] * bands[c + 1];
            const double r = std::sqrt(rng.uniform(r0, r1));
            const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double x = r * std::cos(a), y = r * std::sin(a);
            std::vector<std::string> tokens{"x" + std::to_string(bin(x, 16)), "y" + std::to_string(bin(y, 16)),
                                            "xc" + std::to_string(bin(x, 6)), "yc" + std::to_string(bin(y, 6))};
            rows.emplace_back(std::move(tokens), c);
        }
    }
    return make_dataset(std::move(rows), {"inner", "middle", "outer"});
}

inline std::pair<LabeledDataset, LabeledDataset> ring_task(std::uint64_t seed) {
    Rng rng(seed);
    Rng train_rng = rng.stream("train"), test_rng = rng.stream("test");
    return {ring_corpus({100, 100, 100}, train_rng), ring_corpus({34, 33, 33}, test_rng)};
}

} // namespace kanhead::testing
