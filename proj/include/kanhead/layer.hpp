#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "kanhead/error.hpp"
#include "kanhead/matrix.hpp"

namespace kanhead {

/// Non-owning view of one parameter tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Matrix* value;
    Matrix* grad;
    bool trainable = true;
};

/// One differentiable stage of a head.
///
/// forward() caches whatever backward() needs; backward() must follow a
/// forward() on the same batch, returns the input gradient and adds into
/// the parameter gradients (it never clears them, see zero_grad()).
/// params() lists tensors in a fixed declaration order, which checkpoints
/// and optimizer state rely on.
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t in_features() const = 0;
    virtual std::size_t out_features() const = 0;

    virtual Matrix forward(const Matrix& x) = 0;
    virtual Matrix backward(const Matrix& grad_out) = 0;
    virtual std::vector<ParamRef> params() { return {}; }

    virtual void set_training(bool) {}

    void zero_grad() {
        for (auto& p : params()) p.grad->fill(0.0);
    }

protected:
    void check_input(const Matrix& x) const {
        if (x.cols() != in_features()) {
            throw ShapeError(kind() + ": expected " + std::to_string(in_features()) + " input columns, got " +
                             x.shape());
        }
    }

    void check_grad(const Matrix& grad_out, std::size_t batch) const {
        if (grad_out.rows() != batch || grad_out.cols() != out_features()) {
            throw ShapeError(kind() + ": gradient " + grad_out.shape() + " does not match output [" +
                             std::to_string(batch) + "x" + std::to_string(out_features()) + "]");
        }
    }

    [[noreturn]] void throw_no_forward() const {
        throw StateError(kind() + ": backward called before forward");
    }
};

using LayerPtr = std::unique_ptr<Layer>;

} // namespace kanhead
