#pragma once

#include <cmath>
#include <optional>

#include "kanhead/activation.hpp"
#include "kanhead/init.hpp"
#include "kanhead/layer.hpp"
#include "kanhead/rswaf.hpp"

namespace kanhead {

/// Grid KAN layer on RSWAF bumps. Each input is expanded against a shared,
/// learnable set of G centers with a learnable inverse width r, giving a
/// [batch x (in*G)] basis matrix that feeds one affine map. An optional
/// parallel affine-of-SiLU path can be switched on.
class FasterKanLayer final : public Layer {
public:
    struct Options {
        std::size_t grid_size = 8;
        bool silu_path = false;
    };

    FasterKanLayer(std::size_t in, std::size_t out, Options opt, Rng& rng) : in_(in), out_(out), opt_(opt) {
        if (in == 0 || out == 0 || opt.grid_size == 0) throw ArgumentError("fasterkan: zero dimension");
        const std::size_t g = opt.grid_size;
        centers_ = Matrix::row_vector(uniform_centers(g));
        inv_denominator_ = Matrix(1, 1, static_cast<double>(g) / 2.0);
        linear_weight_ = kaiming_uniform_init(rng, in * g, out, in * g);
        linear_bias_ = Matrix(1, out);
        centers_grad_ = Matrix(1, g);
        inv_denominator_grad_ = Matrix(1, 1);
        linear_weight_grad_ = Matrix(out, in * g);
        linear_bias_grad_ = Matrix(1, out);
        if (opt.silu_path) {
            base_weight_ = kaiming_uniform_init(rng, in, out, in);
            base_bias_ = Matrix(1, out);
            base_weight_grad_ = Matrix(out, in);
            base_bias_grad_ = Matrix(1, out);
        }
    }

    std::string kind() const override { return "fasterkan"; }
    std::size_t in_features() const override { return in_; }
    std::size_t out_features() const override { return out_; }
    const Options& options() const noexcept { return opt_; }

    Matrix& centers() { return centers_; }
    Matrix& inv_denominator() { return inv_denominator_; }
    Matrix& linear_weight() { return linear_weight_; }
    Matrix& linear_bias() { return linear_bias_; }
    Matrix& base_weight() { return base_weight_; }
    Matrix& base_bias() { return base_bias_; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        const std::size_t g = opt_.grid_size;
        const double r = inv_denominator_(0, 0);
        if (!(r > 0.0)) throw ArgumentError("fasterkan: inverse denominator must be positive");
        Cache c{x, Matrix(x.rows(), in_ * g), Matrix(x.rows(), in_ * g)};
        for (std::size_t b = 0; b < x.rows(); ++b) {
            for (std::size_t i = 0; i < in_; ++i) {
                for (std::size_t k = 0; k < g; ++k) {
                    const double t = std::tanh((x(b, i) - centers_(0, k)) * r);
                    c.tanh_v(b, i * g + k) = t;
                    c.basis(b, i * g + k) = 1.0 - t * t;
                }
            }
        }
        Matrix y = matmul_bt(c.basis, linear_weight_);
        add_row_vector(y, linear_bias_);
        if (opt_.silu_path) {
            Matrix base = matmul_bt(activate(x, Activation::silu), base_weight_);
            add_row_vector(base, base_bias_);
            add_inplace(y, base);
        }
        cache_ = std::move(c);
        return y;
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!cache_) throw_no_forward();
        const Cache& c = *cache_;
        check_grad(grad_out, c.input.rows());
        const std::size_t g = opt_.grid_size;
        const double r = inv_denominator_(0, 0);

        add_inplace(linear_weight_grad_, matmul_at(grad_out, c.basis));
        add_inplace(linear_bias_grad_, column_sums(grad_out));

        // With v = (u - c) r and t = tanh(v): db/dv = -2 t (1 - t^2),
        // so db/du = r db/dv, db/dc = -r db/dv, db/dr = (u - c) db/dv.
        const Matrix g_basis = matmul(grad_out, linear_weight_);
        Matrix grad_in(c.input.rows(), in_);
        double g_r = 0.0;
        for (std::size_t b = 0; b < c.input.rows(); ++b) {
            for (std::size_t i = 0; i < in_; ++i) {
                double gx = 0.0;
                for (std::size_t k = 0; k < g; ++k) {
                    const std::size_t col = i * g + k;
                    const double t = c.tanh_v(b, col);
                    const double dv = g_basis(b, col) * (-2.0 * t * (1.0 - t * t));
                    gx += dv * r;
                    centers_grad_(0, k) -= dv * r;
                    g_r += dv * (c.input(b, i) - centers_(0, k));
                }
                grad_in(b, i) = gx;
            }
        }
        inv_denominator_grad_(0, 0) += g_r;

        if (opt_.silu_path) {
            add_inplace(base_weight_grad_, matmul_at(grad_out, activate(c.input, Activation::silu)));
            add_inplace(base_bias_grad_, column_sums(grad_out));
            add_inplace(grad_in,
                        hadamard(matmul(grad_out, base_weight_), activate_derivative(c.input, Activation::silu)));
        }
        return grad_in;
    }

    std::vector<ParamRef> params() override {
        std::vector<ParamRef> ps{{"centers", &centers_, &centers_grad_},
                                 {"inv_denominator", &inv_denominator_, &inv_denominator_grad_},
                                 {"linear_weight", &linear_weight_, &linear_weight_grad_},
                                 {"linear_bias", &linear_bias_, &linear_bias_grad_}};
        if (opt_.silu_path) {
            ps.push_back({"base_weight", &base_weight_, &base_weight_grad_});
            ps.push_back({"base_bias", &base_bias_, &base_bias_grad_});
        }
        return ps;
    }

private:
    struct Cache {
        Matrix input;
        Matrix basis;
        Matrix tanh_v;
    };

    std::size_t in_;
    std::size_t out_;
    Options opt_;
    Matrix centers_, inv_denominator_, linear_weight_, linear_bias_, base_weight_, base_bias_;
    Matrix centers_grad_, inv_denominator_grad_, linear_weight_grad_, linear_bias_grad_, base_weight_grad_,
        base_bias_grad_;
    std::optional<Cache> cache_;
};

} // namespace kanhead
