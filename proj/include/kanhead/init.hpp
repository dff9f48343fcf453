#pragma once

#include <cmath>
#include <cstddef>

#include "kanhead/error.hpp"
#include "kanhead/matrix.hpp"
#include "kanhead/rng.hpp"

namespace kanhead {

/// U[-b, b] with b = sqrt(6 / fan_in).
inline Matrix kaiming_uniform_init(Rng& rng, std::size_t fan_in, std::size_t rows, std::size_t cols) {
    if (fan_in == 0) throw ArgumentError("kaiming_uniform_init: fan_in must be at least 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
    return m;
}

inline Matrix uniform_init(Rng& rng, double bound, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-bound, bound);
    return m;
}

inline Matrix normal_init(Rng& rng, double stddev, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = stddev * rng.normal();
    return m;
}

} // namespace kanhead
