#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "kanhead/error.hpp"
#include "kanhead/matrix.hpp"

namespace kanhead {

enum class Activation { relu, sigmoid, tanh, silu };

inline std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::silu: return "silu";
    }
    return "?";
}

inline Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "tanh") return Activation::tanh;
    if (s == "silu") return Activation::silu;
    throw ArgumentError("unknown activation '" + std::string(s) + "'");
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_derivative(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

inline double activate(double x, Activation kind) {
    switch (kind) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::silu: return silu(x);
    }
    return x;
}

/// Derivative evaluated at the pre-activation x. relu'(0) is taken as 0.
inline double activate_derivative(double x, Activation kind) {
    switch (kind) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
        const double s = sigmoid(x);
        return s * (1.0 - s);
    }
    case Activation::tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Activation::silu: return silu_derivative(x);
    }
    return 1.0;
}

inline Matrix activate(const Matrix& x, Activation kind) {
    Matrix out = x;
    for (double& v : out.data()) v = activate(v, kind);
    return out;
}

inline Matrix activate_derivative(const Matrix& x, Activation kind) {
    Matrix out = x;
    for (double& v : out.data()) v = activate_derivative(v, kind);
    return out;
}

} // namespace kanhead
