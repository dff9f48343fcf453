#pragma once

#include <cmath>
#include <optional>

#include "kanhead/activation.hpp"
#include "kanhead/bspline.hpp"
#include "kanhead/init.hpp"
#include "kanhead/layer.hpp"

namespace kanhead {

/// Spline KAN layer in the "basis first, then one linear map" form:
///
///   out = silu(x) W_base^T + B(x) (W_spline * S)^T
///
/// where B(x) is [batch x (in*(G+k))] of B-spline basis values, W_spline is
/// [out x (in*(G+k))] and the optional scaler S [out x in] multiplies every
/// coefficient of edge (j, i).
class EfficientKanLayer final : public Layer {
public:
    struct Options {
        std::size_t grid_size = 8;
        std::size_t spline_order = 3;
        bool spline_scaler = true;
        double l1_strength = 0.0;
    };

    EfficientKanLayer(std::size_t in, std::size_t out, Options opt, Rng& rng)
        : in_(in), out_(out), opt_(opt), knots_{opt.grid_size, opt.spline_order, -1.0, 1.0} {
        if (in == 0 || out == 0 || opt.grid_size == 0) throw ArgumentError("efficientkan: zero dimension");
        if (opt.l1_strength < 0.0) throw ArgumentError("efficientkan: l1_strength must be nonnegative");
        const std::size_t nb = knots_.num_basis();
        base_weight_ = kaiming_uniform_init(rng, in, out, in);
        spline_weight_ = kaiming_uniform_init(rng, in * nb, out, in * nb);
        base_weight_grad_ = Matrix(out, in);
        spline_weight_grad_ = Matrix(out, in * nb);
        if (opt.spline_scaler) {
            spline_scaler_ = Matrix(out, in, 1.0);
            spline_scaler_grad_ = Matrix(out, in);
        }
    }

    std::string kind() const override { return "efficientkan"; }
    std::size_t in_features() const override { return in_; }
    std::size_t out_features() const override { return out_; }
    const Options& options() const noexcept { return opt_; }
    const KnotVector& knots() const noexcept { return knots_; }
    std::size_t num_basis() const noexcept { return knots_.num_basis(); }

    Matrix& base_weight() { return base_weight_; }
    Matrix& spline_weight() { return spline_weight_; }
    Matrix& spline_scaler() { return spline_scaler_; }

    Matrix forward(const Matrix& x) override {
        check_input(x);
        const std::size_t nb = num_basis();
        Cache c{x, activate(x, Activation::silu), Matrix(x.rows(), in_ * nb), Matrix(x.rows(), in_ * nb)};
        std::vector<double> work;
        for (std::size_t b = 0; b < x.rows(); ++b) {
            auto vrow = c.basis.row(b);
            auto drow = c.basis_deriv.row(b);
            for (std::size_t i = 0; i < in_; ++i) {
                bspline_basis_and_derivative(x(b, i), knots_, vrow.subspan(i * nb, nb), drow.subspan(i * nb, nb),
                                             work);
            }
        }
        Matrix y = matmul_bt(c.silu_x, base_weight_);
        add_inplace(y, matmul_bt(c.basis, effective_spline_weight()));
        cache_ = std::move(c);
        return y;
    }

    Matrix backward(const Matrix& grad_out) override {
        if (!cache_) throw_no_forward();
        const Cache& c = *cache_;
        check_grad(grad_out, c.input.rows());
        const std::size_t nb = num_basis();
        const Matrix w_eff = effective_spline_weight();

        add_inplace(base_weight_grad_, matmul_at(grad_out, c.silu_x));
        const Matrix g_eff = matmul_at(grad_out, c.basis);
        for (std::size_t j = 0; j < out_; ++j) {
            for (std::size_t i = 0; i < in_; ++i) {
                const double s = opt_.spline_scaler ? spline_scaler_(j, i) : 1.0;
                double g_scale = 0.0;
                for (std::size_t m = 0; m < nb; ++m) {
                    const std::size_t col = i * nb + m;
                    spline_weight_grad_(j, col) += g_eff(j, col) * s;
                    g_scale += g_eff(j, col) * spline_weight_(j, col);
                }
                if (opt_.spline_scaler) spline_scaler_grad_(j, i) += g_scale;
            }
        }

        Matrix grad_in = hadamard(matmul(grad_out, base_weight_), activate_derivative(c.input, Activation::silu));
        const Matrix g_basis = matmul(grad_out, w_eff);
        for (std::size_t b = 0; b < c.input.rows(); ++b) {
            for (std::size_t i = 0; i < in_; ++i) {
                double s = 0.0;
                for (std::size_t m = 0; m < nb; ++m) s += g_basis(b, i * nb + m) * c.basis_deriv(b, i * nb + m);
                grad_in(b, i) += s;
            }
        }
        return grad_in;
    }

    std::vector<ParamRef> params() override {
        std::vector<ParamRef> ps{{"base_weight", &base_weight_, &base_weight_grad_},
                                 {"spline_weight", &spline_weight_, &spline_weight_grad_}};
        if (opt_.spline_scaler) ps.push_back({"spline_scaler", &spline_scaler_, &spline_scaler_grad_});
        return ps;
    }

    /// l1_strength * mean |spline_weight|.
    double l1_penalty() const {
        if (opt_.l1_strength == 0.0) return 0.0;
        double s = 0.0;
        for (double w : spline_weight_.data()) s += std::abs(w);
        return opt_.l1_strength * s / static_cast<double>(spline_weight_.size());
    }

    /// Adds the penalty's (sub)gradient to the spline weight gradient;
    /// sign(0) is taken as 0.
    void add_l1_grad() {
        if (opt_.l1_strength == 0.0) return;
        const double scale = opt_.l1_strength / static_cast<double>(spline_weight_.size());
        auto w = spline_weight_.data();
        auto g = spline_weight_grad_.data();
        for (std::size_t n = 0; n < w.size(); ++n) {
            if (w[n] > 0.0) g[n] += scale;
            else if (w[n] < 0.0) g[n] -= scale;
        }
    }

private:
    struct Cache {
        Matrix input;
        Matrix silu_x;
        Matrix basis;
        Matrix basis_deriv;
    };

    Matrix effective_spline_weight() const {
        if (!opt_.spline_scaler) return spline_weight_;
        const std::size_t nb = num_basis();
        Matrix w = spline_weight_;
        for (std::size_t j = 0; j < out_; ++j)
            for (std::size_t i = 0; i < in_; ++i)
                for (std::size_t m = 0; m < nb; ++m) w(j, i * nb + m) *= spline_scaler_(j, i);
        return w;
    }

    std::size_t in_;
    std::size_t out_;
    Options opt_;
    KnotVector knots_;
    Matrix base_weight_, spline_weight_, spline_scaler_;
    Matrix base_weight_grad_, spline_weight_grad_, spline_scaler_grad_;
    std::optional<Cache> cache_;
};

} // namespace kanhead
