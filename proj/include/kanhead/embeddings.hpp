#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kanhead/dataset.hpp"
#include "kanhead/init.hpp"
#include "kanhead/layer.hpp"
#include "kanhead/matrix.hpp"
#include "kanhead/rng.hpp"

namespace kanhead {

/// Token index built from the training split. Known tokens occupy
/// [0, size()-1); the last index is reserved for unknown tokens.
class Vocabulary {
public:
    static constexpr std::string_view unk_token = "<unk>";

    /// Keeps the max_size tokens with the highest document frequency.
    /// Ties are broken by total frequency (higher first), then
    /// lexicographically.
    static Vocabulary build(std::span<const std::vector<std::string>> corpus, std::size_t max_size) {
        if (corpus.empty()) throw ArgumentError("build_vocab: empty corpus");
        std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats; // df, total
        for (const auto& doc : corpus) {
            std::unordered_map<std::string_view, bool> seen;
            for (const auto& tok : doc) {
                auto& s = stats[tok];
                ++s.second;
                if (!seen[tok]) {
                    seen[tok] = true;
                    ++s.first;
                }
            }
        }
        struct Entry {
            std::string token;
            std::size_t df, total;
        };
        std::vector<Entry> entries;
        entries.reserve(stats.size());
        for (auto& [tok, s] : stats) entries.push_back({tok, s.first, s.second});
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.df != b.df) return a.df > b.df;
            if (a.total != b.total) return a.total > b.total;
            return a.token < b.token;
        });
        if (entries.size() > max_size) entries.resize(max_size);

        Vocabulary v;
        v.num_docs_ = corpus.size();
        for (auto& e : entries) {
            v.index_.emplace(e.token, v.tokens_.size());
            v.tokens_.push_back(std::move(e.token));
            v.df_.push_back(e.df);
        }
        v.tokens_.emplace_back(unk_token);
        v.df_.push_back(0);
        return v;
    }

    static Vocabulary build(const LabeledDataset& ds, std::size_t max_size) {
        std::vector<std::vector<std::string>> corpus;
        corpus.reserve(ds.size());
        for (const auto& r : ds.records) corpus.push_back(r.tokens);
        return build(corpus, max_size);
    }

    /// Number of entries including the unknown slot.
    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t unk_index() const noexcept { return tokens_.size() - 1; }
    std::size_t num_docs() const noexcept { return num_docs_; }

    std::optional<std::size_t> find(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t index_or_unk(std::string_view token) const { return find(token).value_or(unk_index()); }

    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    std::size_t df(std::size_t i) const { return df_.at(i); }
    std::size_t df(std::string_view token) const {
        auto i = find(token);
        return i ? df_[*i] : 0;
    }

    bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_ && df_ == o.df_ && num_docs_ == o.num_docs_; }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> tokens_;
    std::vector<std::size_t> df_;
    std::size_t num_docs_ = 0;
};

/// Sentence -> fixed-length vector.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;

    /// Fail-fast check that every record of `ds` can be embedded.
    virtual void bind(const LabeledDataset&) const {}

    virtual Matrix embed_batch(std::span<const Record* const> batch) = 0;

    /// Propagates d loss / d embedding into the embedder's own parameters.
    virtual void backward(const Matrix&) {}
    virtual std::vector<ParamRef> params() { return {}; }
    virtual bool trainable() const { return false; }

    Matrix embed(const Record& r) {
        const Record* p = &r;
        return embed_batch(std::span<const Record* const>(&p, 1));
    }
};

/// Raw term counts times smoothed idf = ln((1+N)/(1+df)) + 1, then L2
/// normalised. Unknown tokens are dropped.
class TfIdfEmbedder final : public Embedder {
public:
    explicit TfIdfEmbedder(Vocabulary vocab) : vocab_(std::move(vocab)), idf_(vocab_.size(), 0.0) {
        const double n = static_cast<double>(vocab_.num_docs());
        for (std::size_t i = 0; i < vocab_.unk_index(); ++i) {
            idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab_.df(i)))) + 1.0;
        }
    }

    std::string name() const override { return "Tf-IDF"; }
    std::size_t dim() const override { return vocab_.size(); }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    double idf(std::size_t i) const { return idf_.at(i); }

    std::vector<double> embed_tokens(std::span<const std::string> tokens) const {
        std::vector<double> v(dim(), 0.0);
        for (const auto& t : tokens) {
            if (auto i = vocab_.find(t)) v[*i] += 1.0;
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] *= idf_[i];
            norm += v[i] * v[i];
        }
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        return v;
    }

    Matrix embed_batch(std::span<const Record* const> batch) override {
        Matrix out(batch.size(), dim());
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto v = embed_tokens(batch[b]->tokens);
            std::copy(v.begin(), v.end(), out.row(b).begin());
        }
        return out;
    }

private:
    Vocabulary vocab_;
    std::vector<double> idf_;
};

/// Lookup table with mean pooling. The last row is the unknown-token row.
class TableEmbedder final : public Embedder {
public:
    TableEmbedder(Vocabulary vocab, Matrix table, bool trainable, std::string display_name = "Random Embedding")
        : vocab_(std::move(vocab)), table_(std::move(table)), grad_(table_.rows(), table_.cols()),
          trainable_(trainable), name_(std::move(display_name)) {
        if (table_.rows() != vocab_.size()) {
            throw ShapeError("table embedder: " + std::to_string(table_.rows()) + " rows for a vocabulary of " +
                             std::to_string(vocab_.size()));
        }
    }

    /// N(0, 1) rows, trainable by default.
    static TableEmbedder random(Vocabulary vocab, std::size_t dim, Rng& rng, bool trainable = true) {
        Matrix t = normal_init(rng, 1.0, vocab.size(), dim);
        return TableEmbedder(std::move(vocab), std::move(t), trainable);
    }

    std::string name() const override { return name_; }
    std::size_t dim() const override { return table_.cols(); }
    bool trainable() const override { return trainable_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const Matrix& table() const noexcept { return table_; }
    Matrix& table() noexcept { return table_; }

    Matrix embed_batch(std::span<const Record* const> batch) override {
        Matrix out(batch.size(), dim());
        last_indices_.assign(batch.size(), {});
        for (std::size_t b = 0; b < batch.size(); ++b) {
            auto& idx = last_indices_[b];
            for (const auto& t : batch[b]->tokens) idx.push_back(vocab_.index_or_unk(t));
            if (idx.empty()) continue;
            auto orow = out.row(b);
            for (std::size_t i : idx) {
                auto trow = table_.row(i);
                for (std::size_t d = 0; d < orow.size(); ++d) orow[d] += trow[d];
            }
            const double inv = 1.0 / static_cast<double>(idx.size());
            for (double& v : orow) v *= inv;
        }
        return out;
    }

    /// Each contributing row receives grad / n for every occurrence.
    void backward(const Matrix& grad) override {
        if (!trainable_) return;
        if (grad.rows() != last_indices_.size() || grad.cols() != dim()) {
            throw ShapeError("table embedder: gradient " + grad.shape() + " does not match last batch");
        }
        for (std::size_t b = 0; b < last_indices_.size(); ++b) {
            const auto& idx = last_indices_[b];
            if (idx.empty()) continue;
            const double inv = 1.0 / static_cast<double>(idx.size());
            auto g = grad.row(b);
            for (std::size_t i : idx) {
                auto grow = grad_.row(i);
                for (std::size_t d = 0; d < g.size(); ++d) grow[d] += g[d] * inv;
            }
        }
    }

    std::vector<ParamRef> params() override { return {{"embedding.table", &table_, &grad_, trainable_}}; }

private:
    Vocabulary vocab_;
    Matrix table_;
    Matrix grad_;
    bool trainable_;
    std::string name_;
    std::vector<std::vector<std::size_t>> last_indices_;
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

inline bool parse_size(std::string_view s, std::size_t& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace detail

/// Word vectors in the common text format: an optional "count dim" header,
/// then "token v1 ... vd" per line.
struct WordVectors {
    std::size_t dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;
};

inline WordVectors parse_word_vectors(std::istream& in, const std::string& source = "<vectors>") {
    WordVectors wv;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (first) {
            first = false;
            std::size_t count = 0, dim = 0;
            if (fields.size() == 2 && detail::parse_size(fields[0], count) && detail::parse_size(fields[1], dim)) {
                if (dim == 0) throw FormatError(source + ":" + std::to_string(lineno) + ": header declares dimension 0");
                wv.dim = dim;
                continue;
            }
        }
        if (fields.size() < 2) throw ParseError(source, lineno, "expected a token followed by its vector");
        const std::size_t d = fields.size() - 1;
        if (wv.dim == 0) wv.dim = d;
        if (d != wv.dim) {
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(wv.dim) +
                              " values, found " + std::to_string(d));
        }
        std::vector<double> v(d);
        for (std::size_t n = 0; n < d; ++n) {
            if (!detail::parse_double(fields[n + 1], v[n])) {
                throw ParseError(source, lineno, "bad number '" + fields[n + 1] + "'");
            }
        }
        wv.vectors.insert_or_assign(fields[0], std::move(v));
    }
    if (wv.dim == 0) throw FormatError(source + ": no vectors found");
    return wv;
}

/// Builds a table over `vocab` from loaded vectors. Tokens absent from the
/// file (and the unknown row) get N(0, s^2) rows, s being the standard
/// deviation of the loaded values.
inline TableEmbedder table_from_word_vectors(const WordVectors& wv, Vocabulary vocab, Rng& rng, bool trainable = false,
                                             std::string display_name = "Word Vectors") {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& [tok, v] : wv.vectors) {
        for (double x : v) {
            sum += x;
            sq += x * x;
            ++n;
        }
    }
    double stddev = 1.0;
    if (n > 1) {
        const double mean = sum / static_cast<double>(n);
        const double var = sq / static_cast<double>(n) - mean * mean;
        if (var > 0.0) stddev = std::sqrt(var);
    }
    Matrix table(vocab.size(), wv.dim);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        auto row = table.row(i);
        auto it = i == vocab.unk_index() ? wv.vectors.end() : wv.vectors.find(vocab.token(i));
        if (it != wv.vectors.end()) {
            std::copy(it->second.begin(), it->second.end(), row.begin());
        } else {
            for (double& x : row) x = stddev * rng.normal();
        }
    }
    return TableEmbedder(std::move(vocab), std::move(table), trainable, std::move(display_name));
}

inline WordVectors read_word_vectors(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open word vectors '" + path.string() + "'");
    return parse_word_vectors(f, path.string());
}

inline TableEmbedder load_word_vectors(const std::filesystem::path& path, Vocabulary vocab, Rng& rng,
                                       bool trainable = false) {
    return table_from_word_vectors(read_word_vectors(path), std::move(vocab), rng, trainable);
}

/// Per-sentence vectors computed offline, keyed by record id.
class PrecomputedEmbedder final : public Embedder {
public:
    PrecomputedEmbedder(std::unordered_map<std::string, std::vector<double>> vectors, std::size_t dim,
                        std::string display_name = "Precomputed")
        : vectors_(std::move(vectors)), dim_(dim), name_(std::move(display_name)) {}

    std::string name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }

    const std::vector<double>& lookup(const std::string& id) const {
        auto it = vectors_.find(id);
        if (it == vectors_.end()) throw LookupError("no precomputed vector for sentence id '" + id + "'");
        return it->second;
    }

    void bind(const LabeledDataset& ds) const override {
        for (const auto& r : ds.records) lookup(r.id);
    }

    Matrix embed_batch(std::span<const Record* const> batch) override {
        Matrix out(batch.size(), dim_);
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto& v = lookup(batch[b]->id);
            std::copy(v.begin(), v.end(), out.row(b).begin());
        }
        return out;
    }

private:
    std::unordered_map<std::string, std::vector<double>> vectors_;
    std::size_t dim_;
    std::string name_;
};

/// "id<TAB>v1<TAB>v2 ..." lines; the values may be separated by tabs or
/// spaces.
inline PrecomputedEmbedder parse_precomputed(std::istream& in, const std::string& source = "<precomputed>") {
    std::unordered_map<std::string, std::vector<double>> vectors;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError(source, lineno, "expected 'id<TAB>values'");
        std::string id = line.substr(0, tab);
        const auto fields = split_whitespace(std::string_view(line).substr(tab + 1));
        if (fields.empty()) throw ParseError(source, lineno, "no values for id '" + id + "'");
        if (dim == 0) dim = fields.size();
        if (fields.size() != dim) {
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                              " values, found " + std::to_string(fields.size()));
        }
        std::vector<double> v(dim);
        for (std::size_t n = 0; n < dim; ++n) {
            if (!detail::parse_double(fields[n], v[n])) throw ParseError(source, lineno, "bad number '" + fields[n] + "'");
        }
        if (!vectors.emplace(id, std::move(v)).second) {
            throw FormatError(source + ":" + std::to_string(lineno) + ": duplicate sentence id '" + id + "'");
        }
    }
    if (dim == 0) throw FormatError(source + ": no vectors found");
    return PrecomputedEmbedder(std::move(vectors), dim);
}

inline PrecomputedEmbedder load_precomputed(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open precomputed vectors '" + path.string() + "'");
    return parse_precomputed(f, path.string());
}

} // namespace kanhead
