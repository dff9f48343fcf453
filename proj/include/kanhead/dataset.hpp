#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kanhead/error.hpp"
#include "kanhead/rng.hpp"

namespace kanhead {

struct Record {
    std::string id;
    std::vector<std::string> tokens;
    std::size_t label = 0;
};

struct LabeledDataset {
    std::vector<Record> records;
    std::vector<std::string> label_names;
    std::size_t skipped_empty = 0; ///< lines dropped because they had no tokens

    std::size_t num_classes() const noexcept { return label_names.size(); }
    std::size_t size() const noexcept { return records.size(); }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> c(label_names.size(), 0);
        for (const auto& r : records) ++c[r.label];
        return c;
    }
};

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

/// Parses "label<TAB>tok tok tok" lines. Labels are numbered in order of
/// first appearance; record ids are 1-based line numbers. Blank lines are
/// ignored, lines whose sentence has no tokens are counted in
/// skipped_empty.
inline LabeledDataset parse_tsv(std::istream& in, const std::string& source = "<tsv>") {
    LabeledDataset ds;
    std::map<std::string, std::size_t> label_index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(source, lineno, "missing TAB between label and sentence");
        std::string label = line.substr(0, tab);
        const auto first = label.find_first_not_of(' ');
        const auto last = label.find_last_not_of(' ');
        if (first == std::string::npos) throw ParseError(source, lineno, "empty label");
        label = label.substr(first, last - first + 1);

        auto tokens = split_whitespace(std::string_view(line).substr(tab + 1));
        if (tokens.empty()) {
            ++ds.skipped_empty;
            continue;
        }
        auto [it, inserted] = label_index.try_emplace(label, ds.label_names.size());
        if (inserted) ds.label_names.push_back(label);
        ds.records.push_back({std::to_string(lineno), std::move(tokens), it->second});
    }
    return ds;
}

inline LabeledDataset load_tsv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open dataset '" + path.string() + "'");
    return parse_tsv(f, path.string());
}

/// Number of test records per class under largest-remainder rounding of
/// count * test_fraction. Ties in the remainder go to the lower class index.
inline std::vector<std::size_t> stratified_test_counts(const std::vector<std::size_t>& class_counts,
                                                       double test_fraction) {
    const std::size_t k = class_counts.size();
    std::vector<std::size_t> out(k);
    std::vector<std::pair<double, std::size_t>> remainders;
    double quota_sum = 0.0;
    std::size_t floor_sum = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double q = static_cast<double>(class_counts[c]) * test_fraction;
        // Guard against 244.8 arriving as 244.79999...
        const double fl = std::floor(q + 1e-9);
        out[c] = static_cast<std::size_t>(fl);
        remainders.emplace_back(std::max(0.0, q - fl), c);
        quota_sum += q;
        floor_sum += out[c];
    }
    const auto target = static_cast<std::size_t>(std::llround(quota_sum));
    std::size_t extra = target > floor_sum ? target - floor_sum : 0;
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t n = 0; n < remainders.size() && extra > 0; ++n) {
        const std::size_t c = remainders[n].second;
        if (out[c] + 1 >= class_counts[c]) continue; // keep one training record per class
        ++out[c];
        --extra;
    }
    return out;
}

/// Per-class proportional train/test split. Records keep their original
/// relative order within each output.
inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds, double test_fraction,
                                                                  Rng rng) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must be in (0, 1)");
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2) {
            throw SplitError("class '" + ds.label_names[c] + "' has " + std::to_string(counts[c]) +
                             " record(s); at least 2 are needed to split");
        }
    }
    const auto test_counts = stratified_test_counts(counts, test_fraction);

    std::vector<std::vector<std::size_t>> by_class(counts.size());
    for (std::size_t n = 0; n < ds.records.size(); ++n) by_class[ds.records[n].label].push_back(n);

    std::vector<bool> is_test(ds.records.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        rng.shuffle(by_class[c]);
        for (std::size_t n = 0; n < test_counts[c]; ++n) is_test[by_class[c][n]] = true;
    }

    LabeledDataset train, test;
    train.label_names = test.label_names = ds.label_names;
    for (std::size_t n = 0; n < ds.records.size(); ++n) (is_test[n] ? test : train).records.push_back(ds.records[n]);
    return {std::move(train), std::move(test)};
}

} // namespace kanhead
