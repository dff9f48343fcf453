#pragma once

#include <cstddef>
#include <vector>

#include "kanhead/dataset.hpp"
#include "kanhead/embeddings.hpp"
#include "kanhead/head.hpp"

namespace kanhead {

/// C x C counts; rows are true classes, columns predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes = 0) : n_(classes), counts_(classes * classes, 0) {}

    ConfusionMatrix(std::initializer_list<std::initializer_list<std::size_t>> rows) : n_(rows.size()) {
        for (const auto& r : rows) {
            if (r.size() != n_) throw ShapeError("confusion matrix must be square");
            counts_.insert(counts_.end(), r.begin(), r.end());
        }
    }

    std::size_t classes() const noexcept { return n_; }
    std::size_t operator()(std::size_t truth, std::size_t pred) const { return counts_[truth * n_ + pred]; }
    void add(std::size_t truth, std::size_t pred) {
        if (truth >= n_ || pred >= n_) throw ArgumentError("confusion matrix: class index out of range");
        ++counts_[truth * n_ + pred];
    }

    std::size_t total() const {
        std::size_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }
    std::size_t trace() const {
        std::size_t s = 0;
        for (std::size_t c = 0; c < n_; ++c) s += (*this)(c, c);
        return s;
    }
    std::size_t support(std::size_t c) const {
        std::size_t s = 0;
        for (std::size_t p = 0; p < n_; ++p) s += (*this)(c, p);
        return s;
    }
    std::size_t predicted(std::size_t c) const {
        std::size_t s = 0;
        for (std::size_t t = 0; t < n_; ++t) s += (*this)(t, c);
        return s;
    }

    /// Per-class F1; 0 when precision + recall is 0.
    double f1(std::size_t c) const {
        const double tp = static_cast<double>((*this)(c, c));
        const std::size_t pred = predicted(c), sup = support(c);
        const double precision = pred ? tp / static_cast<double>(pred) : 0.0;
        const double recall = sup ? tp / static_cast<double>(sup) : 0.0;
        return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }

    bool operator==(const ConfusionMatrix&) const = default;

    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

private:
    std::size_t n_;
    std::vector<std::size_t> counts_;
};

/// Support-weighted mean of per-class F1.
inline double weighted_f1(const ConfusionMatrix& cm) {
    const double total = static_cast<double>(cm.total());
    if (total == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const std::size_t sup = cm.support(c);
        if (sup) s += static_cast<double>(sup) / total * cm.f1(c);
    }
    return s;
}

/// Unweighted mean of per-class F1 over classes with nonzero support.
inline double macro_f1(const ConfusionMatrix& cm) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        if (cm.support(c) == 0) continue;
        s += cm.f1(c);
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const std::size_t t = cm.total();
    return t ? static_cast<double>(cm.trace()) / static_cast<double>(t) : 0.0;
}

/// Index of the largest entry; ties go to the lower index.
inline std::size_t argmax(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

struct Evaluation {
    ConfusionMatrix confusion;
    double f1_weighted = 0.0;
    double accuracy = 0.0;
};

/// Predicts every record with the head in evaluation mode. The head's
/// previous training flag is not restored; callers switch back when they
/// resume training.
inline Evaluation evaluate(Head& head, Embedder& embedder, const LabeledDataset& ds, std::size_t batch_size = 256) {
    if (embedder.dim() != head.in_features()) {
        throw ShapeError("evaluate: embedder dimension " + std::to_string(embedder.dim()) +
                         " does not match head input " + std::to_string(head.in_features()));
    }
    head.set_training(false);
    Evaluation ev{ConfusionMatrix(head.out_features())};
    std::vector<const Record*> batch;
    for (std::size_t start = 0; start < ds.size(); start += batch_size) {
        batch.clear();
        for (std::size_t n = start; n < std::min(ds.size(), start + batch_size); ++n) batch.push_back(&ds.records[n]);
        const Matrix logits = head.forward(embedder.embed_batch(batch));
        for (std::size_t b = 0; b < batch.size(); ++b) ev.confusion.add(batch[b]->label, argmax(logits.row(b)));
    }
    ev.f1_weighted = weighted_f1(ev.confusion);
    ev.accuracy = accuracy(ev.confusion);
    return ev;
}

} // namespace kanhead
