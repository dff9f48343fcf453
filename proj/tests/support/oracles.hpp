#pragma once

// Straight-line reference implementations, written without the library's
// helpers, used to cross-check optimized code paths.

#include <cmath>
#include <cstddef>
#include <vector>

namespace kanhead::oracle {

inline double knot(int j, int grid, int order) { return -1.0 + (j - order) * (2.0 / grid); }

/// Textbook recursive Cox-de Boor definition on the uniform extended grid.
inline double cox_de_boor(int i, int p, double x, int grid, int order) {
    if (p == 0) return (knot(i, grid, order) <= x && x < knot(i + 1, grid, order)) ? 1.0 : 0.0;
    const double ti = knot(i, grid, order);
    const double tip = knot(i + p, grid, order);
    const double ti1 = knot(i + 1, grid, order);
    const double tip1 = knot(i + p + 1, grid, order);
    return (x - ti) / (tip - ti) * cox_de_boor(i, p - 1, x, grid, order) +
           (tip1 - x) / (tip1 - ti1) * cox_de_boor(i + 1, p - 1, x, grid, order);
}

inline std::vector<double> bspline_basis(double x, int grid, int order) {
    std::vector<double> out(static_cast<std::size_t>(grid + order));
    for (int i = 0; i < grid + order; ++i) out[static_cast<std::size_t>(i)] = cox_de_boor(i, order, x, grid, order);
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }

inline double rswaf(double u, double center, double r) {
    const double t = std::tanh((u - center) * r);
    return 1.0 - t * t;
}

} // namespace kanhead::oracle
