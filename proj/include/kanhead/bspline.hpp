#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kanhead/error.hpp"

namespace kanhead {

/// Uniform knot vector: G cells on [lo, hi], extended by `order` extra
/// knots on each side with the same spacing. Knot j sits at
/// lo + (j - order) * h, j = 0 .. G + 2*order.
struct KnotVector {
    std::size_t grid_size = 8;
    std::size_t order = 3;
    double lo = -1.0;
    double hi = 1.0;

    double spacing() const { return (hi - lo) / static_cast<double>(grid_size); }
    double knot(std::size_t j) const {
        return lo + (static_cast<double>(j) - static_cast<double>(order)) * spacing();
    }
    std::size_t num_knots() const { return grid_size + 2 * order + 1; }
    std::size_t num_basis() const { return grid_size + order; }
};

namespace detail {

// Cox-de Boor, bottom-up. On return `work` holds the order-`upto` values;
// its size is num_knots - 1 - upto.
inline void cox_de_boor(double x, const KnotVector& kv, std::size_t upto, std::vector<double>& work) {
    const std::size_t cells = kv.num_knots() - 1;
    work.assign(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
        work[i] = (x >= kv.knot(i) && x < kv.knot(i + 1)) ? 1.0 : 0.0;
    }
    for (std::size_t m = 1; m <= upto; ++m) {
        const std::size_t count = cells - m;
        for (std::size_t i = 0; i < count; ++i) {
            const double ti = kv.knot(i);
            const double tim = kv.knot(i + m);
            const double ti1 = kv.knot(i + 1);
            const double tim1 = kv.knot(i + m + 1);
            work[i] = (x - ti) / (tim - ti) * work[i] + (tim1 - x) / (tim1 - ti1) * work[i + 1];
        }
        work.resize(count);
    }
}

} // namespace detail

/// The G + k order-k B-spline basis values at x. Points outside [lo, hi]
/// are evaluated against the extended knots without clamping, so they
/// decay to zero beyond the outermost knot.
inline std::vector<double> bspline_basis(double x, const KnotVector& kv) {
    if (kv.grid_size == 0) throw ArgumentError("bspline_basis: grid_size must be positive");
    std::vector<double> work;
    detail::cox_de_boor(x, kv, kv.order, work);
    return work;
}

/// Basis values and their derivatives with respect to x, written into
/// `values` and `derivs` (each of length G + k).
inline void bspline_basis_and_derivative(double x, const KnotVector& kv, std::span<double> values,
                                         std::span<double> derivs, std::vector<double>& work) {
    const std::size_t n = kv.num_basis();
    if (values.size() != n || derivs.size() != n) throw ShapeError("bspline_basis_and_derivative: bad span size");
    if (kv.order == 0) {
        detail::cox_de_boor(x, kv, 0, work);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = work[i];
            derivs[i] = 0.0;
        }
        return;
    }
    detail::cox_de_boor(x, kv, kv.order - 1, work);
    // d/dx B_{i,k} = (B_{i,k-1} - B_{i+1,k-1}) / h on a uniform grid.
    const double inv_h = 1.0 / kv.spacing();
    for (std::size_t i = 0; i < n; ++i) derivs[i] = (work[i] - work[i + 1]) * inv_h;
    const std::size_t m = kv.order;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = kv.knot(i);
        const double tim = kv.knot(i + m);
        const double ti1 = kv.knot(i + 1);
        const double tim1 = kv.knot(i + m + 1);
        values[i] = (x - ti) / (tim - ti) * work[i] + (tim1 - x) / (tim1 - ti1) * work[i + 1];
    }
}

} // namespace kanhead
