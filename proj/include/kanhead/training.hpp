#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kanhead/embeddings.hpp"
#include "kanhead/head.hpp"
#include "kanhead/metrics.hpp"

namespace kanhead {

struct LossResult {
    double loss = 0.0;
    Matrix grad_logits;
};

/// Mean negative log-likelihood of softmax(logits); the gradient is
/// (softmax - onehot) / batch.
inline LossResult cross_entropy_loss(const Matrix& logits, std::span<const std::size_t> labels) {
    if (labels.size() != logits.rows()) {
        throw ShapeError("cross_entropy_loss: " + std::to_string(labels.size()) + " labels for logits " + logits.shape());
    }
    LossResult r{0.0, Matrix(logits.rows(), logits.cols())};
    const double inv_batch = logits.rows() ? 1.0 / static_cast<double>(logits.rows()) : 0.0;
    for (std::size_t b = 0; b < logits.rows(); ++b) {
        if (labels[b] >= logits.cols()) {
            throw ArgumentError("cross_entropy_loss: label " + std::to_string(labels[b]) + " out of range for " +
                                std::to_string(logits.cols()) + " classes");
        }
        auto row = logits.row(b);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        const double log_z = mx + std::log(sum);
        r.loss += (log_z - row[labels[b]]) * inv_batch;
        auto g = r.grad_logits.row(b);
        for (std::size_t j = 0; j < row.size(); ++j) g[j] = std::exp(row[j] - log_z) * inv_batch;
        g[labels[b]] -= inv_batch;
    }
    return r;
}

/// AdamW with decoupled weight decay:
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p
/// Moments are keyed by position in the parameter list, so the list must
/// be passed in the same order every step.
class AdamW {
public:
    struct Hyper {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    AdamW() = default;
    explicit AdamW(Hyper h) : hyper_(h) {}

    std::uint64_t steps() const noexcept { return step_; }

    void step(std::span<const ParamRef> params, double lr, double weight_decay) {
        if (first_moment_.empty()) {
            for (const auto& p : params) {
                first_moment_.emplace_back(p.value->rows(), p.value->cols());
                second_moment_.emplace_back(p.value->rows(), p.value->cols());
            }
        }
        if (first_moment_.size() != params.size()) throw ShapeError("adamw_step: parameter list changed size");
        ++step_;
        const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(step_));
        for (std::size_t n = 0; n < params.size(); ++n) {
            const auto& p = params[n];
            if (!p.value->same_shape(*p.grad) || !p.value->same_shape(first_moment_[n])) {
                throw ShapeError("adamw_step: shape mismatch for '" + p.name + "'");
            }
            if (!p.trainable) continue;
            auto w = p.value->data();
            auto g = p.grad->data();
            auto m = first_moment_[n].data();
            auto v = second_moment_[n].data();
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g[i];
                v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g[i] * g[i];
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                w[i] -= lr * (m_hat / (std::sqrt(v_hat) + hyper_.eps)) + lr * weight_decay * w[i];
            }
        }
    }

private:
    Hyper hyper_;
    std::uint64_t step_ = 0;
    std::vector<Matrix> first_moment_;
    std::vector<Matrix> second_moment_;
};

/// lr_min + (lr_max - lr_min)(1 + cos(pi step / total)) / 2, clamped to
/// lr_min past the horizon.
inline double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min = 0.0) {
    if (step >= total_steps) return lr_min;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

inline double global_grad_norm(std::span<const ParamRef> params) {
    double s = 0.0;
    for (const auto& p : params)
        if (p.trainable) s += sum_squares(*p.grad);
    return std::sqrt(s);
}

/// Rescales all trainable gradients so their joint L2 norm is at most
/// max_norm. Returns the factor applied (1 when no clipping happened).
inline double clip_global_norm(std::span<const ParamRef> params, double max_norm) {
    if (!(max_norm > 0.0)) throw ArgumentError("clip_global_norm: max_norm must be positive");
    const double norm = global_grad_norm(params);
    if (norm <= max_norm) return 1.0;
    const double scale = max_norm / norm;
    for (const auto& p : params) {
        if (!p.trainable) continue;
        for (double& g : p.grad->data()) g *= scale;
    }
    return scale;
}

/// Tracks the best validation score; stop() turns true after `patience`
/// consecutive checks without strict improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    /// Returns true when `score` is a new best.
    bool update(double score) {
        ++checks_;
        if (checks_ == 1 || score > best_) {
            best_ = score;
            best_check_ = checks_;
            bad_ = 0;
            return true;
        }
        ++bad_;
        return false;
    }

    bool stop() const noexcept { return patience_ > 0 && bad_ >= patience_; }
    double best() const noexcept { return best_; }
    std::size_t best_check() const noexcept { return best_check_; }
    std::size_t checks() const noexcept { return checks_; }

private:
    std::size_t patience_;
    std::size_t checks_ = 0;
    std::size_t best_check_ = 0;
    std::size_t bad_ = 0;
    double best_ = 0.0;
};

struct TrainConfig {
    std::size_t epochs = 15;
    std::size_t batch_size = 32;
    double head_lr = 2e-4;
    double backbone_lr = 2e-5;
    double weight_decay = 0.01;
    double clip_max_norm = 1.0;
    std::size_t early_stop_patience = 3;
    std::uint64_t seed = 42;
};

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"head_lr", c.head_lr},
            {"backbone_lr", c.backbone_lr},
            {"weight_decay", c.weight_decay},
            {"clip_max_norm", c.clip_max_norm},
            {"early_stop_patience", c.early_stop_patience},
            {"seed", c.seed}};
}

struct RunRecord {
    TrainConfig config;
    std::vector<double> epoch_losses;  ///< mean training loss per epoch (penalty included)
    std::vector<double> val_f1;        ///< weighted F1 after each epoch
    std::size_t best_epoch = 0;        ///< 1-based
    double best_val_f1 = 0.0;
    bool stopped_early = false;
    std::size_t steps = 0;
    std::string validation_source = "held-out split";
    double train_seconds = 0.0;
    double fwd_ms_mean = 0.0; ///< per training batch
    double bwd_ms_mean = 0.0; ///< per training batch
};

inline nlohmann::json to_json(const RunRecord& r) {
    return {{"config", to_json(r.config)},
            {"epoch_losses", r.epoch_losses},
            {"val_f1", r.val_f1},
            {"best_epoch", r.best_epoch},
            {"best_val_f1", r.best_val_f1},
            {"stopped_early", r.stopped_early},
            {"steps", r.steps},
            {"validation_source", r.validation_source},
            {"train_seconds", r.train_seconds},
            {"fwd_ms_mean", r.fwd_ms_mean},
            {"bwd_ms_mean", r.bwd_ms_mean}};
}

namespace detail {

struct Snapshot {
    std::vector<Matrix> values;

    static Snapshot take(std::span<const ParamRef> ps) {
        Snapshot s;
        for (const auto& p : ps) s.values.push_back(*p.value);
        return s;
    }
    void restore(std::span<const ParamRef> ps) const {
        for (std::size_t n = 0; n < ps.size(); ++n) *ps[n].value = values[n];
    }
};

inline double elapsed_ms(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

} // namespace detail

/// Mini-batch training with seeded shuffling, global-norm clipping, cosine
/// annealing over all steps, AdamW with separate learning rates for the
/// head and a trainable embedder, per-epoch validation and early stopping.
/// On return the head (and embedder) hold the best-validation snapshot.
inline RunRecord train(Head& head, Embedder& embedder, const LabeledDataset& train_ds, const LabeledDataset& valid_ds,
                       const TrainConfig& cfg) {
    using clock = std::chrono::steady_clock;
    if (embedder.dim() != head.in_features()) {
        throw ShapeError("train: embedder dimension " + std::to_string(embedder.dim()) + " does not match head input " +
                         std::to_string(head.in_features()));
    }
    if (train_ds.size() == 0) throw ArgumentError("train: empty training set");
    if (cfg.batch_size == 0) throw ArgumentError("train: batch_size must be positive");
    for (const auto* ds : {&train_ds, &valid_ds}) {
        for (const auto& r : ds->records) {
            if (r.label >= head.out_features()) {
                throw ShapeError("train: label " + std::to_string(r.label) + " exceeds head output " +
                                 std::to_string(head.out_features()));
            }
        }
    }
    embedder.bind(train_ds);
    embedder.bind(valid_ds);

    RunRecord rec;
    rec.config = cfg;
    const Rng root(cfg.seed);
    Rng shuffle_rng = root.stream("shuffle");

    const auto head_params = head.params();
    auto embed_params = embedder.params();
    std::erase_if(embed_params, [](const ParamRef& p) { return !p.trainable; });
    std::vector<ParamRef> all_params = head_params;
    all_params.insert(all_params.end(), embed_params.begin(), embed_params.end());

    AdamW head_opt, embed_opt;
    const std::size_t batches_per_epoch = (train_ds.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = batches_per_epoch * cfg.epochs;

    EarlyStopping stopper(cfg.early_stop_patience);
    auto best_head = detail::Snapshot::take(head_params);
    auto best_embed = detail::Snapshot::take(embed_params);

    std::vector<std::size_t> order(train_ds.size());
    std::vector<const Record*> batch;
    std::vector<std::size_t> labels;
    double fwd_total = 0.0, bwd_total = 0.0;
    std::size_t timed_batches = 0;

    const auto t_start = clock::now();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
        shuffle_rng.shuffle(order);
        head.set_training(true);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            labels.clear();
            for (std::size_t n = start; n < std::min(order.size(), start + cfg.batch_size); ++n) {
                batch.push_back(&train_ds.records[order[n]]);
                labels.push_back(train_ds.records[order[n]].label);
            }
            head.zero_grad();
            for (auto& p : embed_params) p.grad->fill(0.0);

            const Matrix x = embedder.embed_batch(batch);
            const auto t0 = clock::now();
            const Matrix logits = head.forward(x);
            const auto t1 = clock::now();
            auto [loss, grad] = cross_entropy_loss(logits, labels);
            loss += head.l1_penalty();
            const auto t2 = clock::now();
            const Matrix grad_in = head.backward(grad);
            head.add_l1_grad();
            const auto t3 = clock::now();
            if (embedder.trainable()) embedder.backward(grad_in);
            fwd_total += detail::elapsed_ms(t0, t1);
            bwd_total += detail::elapsed_ms(t2, t3);
            ++timed_batches;

            clip_global_norm(all_params, cfg.clip_max_norm);
            const std::size_t step = rec.steps++;
            head_opt.step(head_params, cosine_lr(step, total_steps, cfg.head_lr), cfg.weight_decay);
            if (!embed_params.empty()) {
                embed_opt.step(embed_params, cosine_lr(step, total_steps, cfg.backbone_lr), cfg.weight_decay);
            }
            loss_sum += loss * static_cast<double>(batch.size());
        }
        rec.epoch_losses.push_back(loss_sum / static_cast<double>(train_ds.size()));

        const double f1 = valid_ds.size() ? evaluate(head, embedder, valid_ds).f1_weighted : 0.0;
        rec.val_f1.push_back(f1);
        if (stopper.update(f1)) {
            best_head = detail::Snapshot::take(head_params);
            best_embed = detail::Snapshot::take(embed_params);
        }
        if (stopper.stop()) {
            rec.stopped_early = true;
            break;
        }
    }
    rec.train_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    best_head.restore(head_params);
    best_embed.restore(embed_params);
    head.set_training(false);

    rec.best_epoch = stopper.best_check();
    rec.best_val_f1 = stopper.best();
    if (timed_batches) {
        rec.fwd_ms_mean = fwd_total / static_cast<double>(timed_batches);
        rec.bwd_ms_mean = bwd_total / static_cast<double>(timed_batches);
    }
    return rec;
}

} // namespace kanhead
