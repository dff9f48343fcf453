#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "kanhead/error.hpp"

namespace kanhead {

/// Reflectional switch activation basis: b_i(u) = 1 - tanh^2((u - c_i) * r),
/// with r the inverse of the bump width.
inline std::vector<double> rswaf_basis(double u, std::span<const double> centers, double inv_denominator) {
    if (!(inv_denominator > 0.0)) throw ArgumentError("rswaf_basis: inverse denominator must be positive");
    std::vector<double> out(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double t = std::tanh((u - centers[i]) * inv_denominator);
        out[i] = 1.0 - t * t;
    }
    return out;
}

/// Evenly spaced centers on [lo, hi]; a single center sits at the midpoint.
inline std::vector<double> uniform_centers(std::size_t count, double lo = -1.0, double hi = 1.0) {
    std::vector<double> c(count);
    if (count == 1) {
        c[0] = 0.5 * (lo + hi);
        return c;
    }
    for (std::size_t i = 0; i < count; ++i) {
        c[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return c;
}

} // namespace kanhead
