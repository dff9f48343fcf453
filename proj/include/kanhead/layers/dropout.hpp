#pragma once

#include <optional>

#include "kanhead/layer.hpp"
#include "kanhead/rng.hpp"

namespace kanhead {

/// Inverted dropout: in training mode kept activations are scaled by
/// 1/(1-rate); evaluation mode is the identity.
class Dropout final : public Layer {
public:
    Dropout(std::size_t features, double rate, Rng rng) : features_(features), rate_(rate), rng_(rng) {
        if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must be in [0, 1)");
    }

    std::string kind() const override { return "dropout"; }
    std::size_t in_features() const override { return features_; }
    std::size_t out_features() const override { return features_; }

    double rate() const noexcept { return rate_; }
    bool training() const noexcept { return training_; }
    void set_training(bool on) override { training_ = on; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        if (!training_ || rate_ == 0.0) {
            mask_.reset();
            batch_ = x.rows();
            return x;
        }
        const double keep_scale = 1.0 / (1.0 - rate_);
        Matrix mask(x.rows(), x.cols());
        for (double& m : mask.data()) m = rng_.bernoulli(rate_) ? 0.0 : keep_scale;
        Matrix y = hadamard(x, mask);
        mask_ = std::move(mask);
        batch_ = x.rows();
        return y;
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!batch_) throw_no_forward();
        check_grad(grad_out, *batch_);
        return mask_ ? hadamard(grad_out, *mask_) : grad_out;
    }

private:
    std::size_t features_;
    double rate_;
    Rng rng_;
    bool training_ = false;
    std::optional<Matrix> mask_;
    std::optional<std::size_t> batch_;
};

} // namespace kanhead
