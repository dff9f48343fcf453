#pragma once

#include <cmath>
#include <optional>

#include "kanhead/init.hpp"
#include "kanhead/layer.hpp"

namespace kanhead {

/// Fourier KAN layer. Every edge (j, i) carries a truncated Fourier series
///
///   phi_ji(x) = sum_{k=1..G} A[j,i,k] cos(k x) + B[j,i,k] sin(k x)
///
/// and output j is sum_i phi_ji(x_i) + bias_j. The coefficient tensors are
/// stored [out x (in*G)] so that, after expanding the input into its cos and
/// sin features, forward and backward are plain matrix products.
class FourierKanLayer final : public Layer {
public:
    FourierKanLayer(std::size_t in, std::size_t out, std::size_t grid_size, bool use_bias, Rng& rng)
        : in_(in), out_(out), grid_(grid_size), use_bias_(use_bias) {
        if (in == 0 || out == 0 || grid_size == 0) throw ArgumentError("fourierkan: zero dimension");
        // Coefficient variance shrinks with the number of summed terms so
        // initial outputs stay O(1).
        const double bound = 1.0 / std::sqrt(static_cast<double>(in * grid_size));
        coeff_cos_ = uniform_init(rng, bound, out, in * grid_size);
        coeff_sin_ = uniform_init(rng, bound, out, in * grid_size);
        bias_ = Matrix(1, out);
        coeff_cos_grad_ = Matrix(out, in * grid_size);
        coeff_sin_grad_ = Matrix(out, in * grid_size);
        bias_grad_ = Matrix(1, out);
    }

    std::string kind() const override { return "fourierkan"; }
    std::size_t in_features() const override { return in_; }
    std::size_t out_features() const override { return out_; }
    std::size_t grid_size() const noexcept { return grid_; }
    bool has_bias() const noexcept { return use_bias_; }

    Matrix& coeff_cos() { return coeff_cos_; }
    Matrix& coeff_sin() { return coeff_sin_; }
    Matrix& bias() { return bias_; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        Cache c{x, Matrix(x.rows(), in_ * grid_), Matrix(x.rows(), in_ * grid_)};
        for (std::size_t b = 0; b < x.rows(); ++b) {
            for (std::size_t i = 0; i < in_; ++i) {
                for (std::size_t k = 0; k < grid_; ++k) {
                    const double arg = static_cast<double>(k + 1) * x(b, i);
                    c.cos_features(b, i * grid_ + k) = std::cos(arg);
                    c.sin_features(b, i * grid_ + k) = std::sin(arg);
                }
            }
        }
        Matrix y = matmul_bt(c.cos_features, coeff_cos_);
        add_inplace(y, matmul_bt(c.sin_features, coeff_sin_));
        if (use_bias_) add_row_vector(y, bias_);
        cache_ = std::move(c);
        return y;
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!cache_) throw_no_forward();
        const Cache& c = *cache_;
        check_grad(grad_out, c.input.rows());
        add_inplace(coeff_cos_grad_, matmul_at(grad_out, c.cos_features));
        add_inplace(coeff_sin_grad_, matmul_at(grad_out, c.sin_features));
        if (use_bias_) add_inplace(bias_grad_, column_sums(grad_out));

        // d out_j / d x_i = sum_k k (-A sin(k x_i) + B cos(k x_i))
        const Matrix g_cos = matmul(grad_out, coeff_cos_);
        const Matrix g_sin = matmul(grad_out, coeff_sin_);
        Matrix grad_in(c.input.rows(), in_);
        for (std::size_t b = 0; b < c.input.rows(); ++b) {
            for (std::size_t i = 0; i < in_; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < grid_; ++k) {
                    const std::size_t col = i * grid_ + k;
                    const double freq = static_cast<double>(k + 1);
                    s += freq * (g_sin(b, col) * c.cos_features(b, col) - g_cos(b, col) * c.sin_features(b, col));
                }
                grad_in(b, i) = s;
            }
        }
        return grad_in;
    }

    std::vector<ParamRef> params() override {
        std::vector<ParamRef> ps{{"coeff_cos", &coeff_cos_, &coeff_cos_grad_},
                                 {"coeff_sin", &coeff_sin_, &coeff_sin_grad_}};
        if (use_bias_) ps.push_back({"bias", &bias_, &bias_grad_});
        return ps;
    }

private:
    struct Cache {
        Matrix input;
        Matrix cos_features;
        Matrix sin_features;
    };

    std::size_t in_;
    std::size_t out_;
    std::size_t grid_;
    bool use_bias_;
    Matrix coeff_cos_, coeff_sin_, bias_;
    Matrix coeff_cos_grad_, coeff_sin_grad_, bias_grad_;
    std::optional<Cache> cache_;
};

} // namespace kanhead
