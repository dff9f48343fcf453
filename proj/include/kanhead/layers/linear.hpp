#pragma once

#include <optional>

#include "kanhead/activation.hpp"
#include "kanhead/init.hpp"
#include "kanhead/layer.hpp"

namespace kanhead {

/// y = x W^T + b, W stored [out x in].
class Linear final : public Layer {
public:
    Linear(std::size_t in, std::size_t out, Rng& rng)
        : weight_(kaiming_uniform_init(rng, in, out, in)), bias_(1, out), weight_grad_(out, in), bias_grad_(1, out) {}

    std::string kind() const override { return "linear"; }
    std::size_t in_features() const override { return weight_.cols(); }
    std::size_t out_features() const override { return weight_.rows(); }

    Matrix& weight() { return weight_; }
    Matrix& bias() { return bias_; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        input_ = x;
        Matrix y = matmul_bt(x, weight_);
        add_row_vector(y, bias_);
        return y;
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!input_) throw_no_forward();
        check_grad(grad_out, input_->rows());
        add_inplace(weight_grad_, matmul_at(grad_out, *input_));
        add_inplace(bias_grad_, column_sums(grad_out));
        return matmul(grad_out, weight_);
    }

    std::vector<ParamRef> params() override {
        return {{"weight", &weight_, &weight_grad_}, {"bias", &bias_, &bias_grad_}};
    }

private:
    Matrix weight_;
    Matrix bias_;
    Matrix weight_grad_;
    Matrix bias_grad_;
    std::optional<Matrix> input_;
};

/// Elementwise activation with no parameters.
class ActivationLayer final : public Layer {
public:
    ActivationLayer(std::size_t features, Activation kind) : features_(features), act_(kind) {}

    std::string kind() const override { return std::string(to_string(act_)); }
    std::size_t in_features() const override { return features_; }
    std::size_t out_features() const override { return features_; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        input_ = x;
        return activate(x, act_);
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!input_) throw_no_forward();
        check_grad(grad_out, input_->rows());
        return hadamard(grad_out, activate_derivative(*input_, act_));
    }

private:
    std::size_t features_;
    Activation act_;
    std::optional<Matrix> input_;
};

} // namespace kanhead
