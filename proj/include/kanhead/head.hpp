#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kanhead/activation.hpp"
#include "kanhead/layer.hpp"
#include "kanhead/layers/dropout.hpp"
#include "kanhead/layers/efficient_kan.hpp"
#include "kanhead/layers/faster_kan.hpp"
#include "kanhead/layers/fourier_kan.hpp"
#include "kanhead/layers/linear.hpp"
#include "kanhead/rng.hpp"

namespace kanhead {

enum class HeadFamily { mlp, fourierkan, efficientkan, fasterkan };

inline std::string_view to_string(HeadFamily f) {
    switch (f) {
    case HeadFamily::mlp: return "mlp";
    case HeadFamily::fourierkan: return "fourierkan";
    case HeadFamily::efficientkan: return "efficientkan";
    case HeadFamily::fasterkan: return "fasterkan";
    }
    return "?";
}

/// Display name used in report tables.
inline std::string_view display_name(HeadFamily f) {
    switch (f) {
    case HeadFamily::mlp: return "MLP";
    case HeadFamily::fourierkan: return "FourierKAN";
    case HeadFamily::efficientkan: return "EfficientKAN";
    case HeadFamily::fasterkan: return "FasterKAN";
    }
    return "?";
}

inline HeadFamily parse_head_family(std::string_view s) {
    if (s == "mlp") return HeadFamily::mlp;
    if (s == "fourierkan") return HeadFamily::fourierkan;
    if (s == "efficientkan") return HeadFamily::efficientkan;
    if (s == "fasterkan") return HeadFamily::fasterkan;
    throw ArgumentError("unknown head family '" + std::string(s) + "'");
}

/// Everything needed to rebuild a head's architecture.
struct HeadSpec {
    HeadFamily family = HeadFamily::mlp;
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t hidden_dim = 0; ///< 0 means a single layer in -> out
    Activation activation = Activation::relu;
    std::size_t grid_size = 8;
    std::size_t spline_order = 3;
    bool spline_scaler = true;
    bool silu_path = false;
    bool fourier_bias = true;
    double dropout = 0.3;
    double l1_strength = 0.0;

    bool operator==(const HeadSpec&) const = default;
};

struct ParamCount {
    std::size_t total = 0;
    std::size_t trainable = 0;
};

/// A classifier stack: input dropout, then one or two family layers (with
/// a hidden activation for the two-layer MLP). Emits raw logits.
class Head {
public:
    Head(const HeadSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
        if (spec.in == 0 || spec.out == 0) throw ArgumentError("head: in and out must be positive");
        const Rng root(seed);
        Rng init = root.stream("init");
        const Rng drop = root.stream("dropout");
        std::uint64_t drop_id = 0;
        auto add_dropout = [&](std::size_t features) {
            if (spec.dropout > 0.0) layers_.push_back(std::make_unique<Dropout>(features, spec.dropout, drop.stream(drop_id++)));
        };
        auto add_family_layer = [&](std::size_t in, std::size_t out) {
            switch (spec.family) {
            case HeadFamily::mlp: layers_.push_back(std::make_unique<Linear>(in, out, init)); break;
            case HeadFamily::fourierkan:
                layers_.push_back(std::make_unique<FourierKanLayer>(in, out, spec.grid_size, spec.fourier_bias, init));
                break;
            case HeadFamily::efficientkan:
                layers_.push_back(std::make_unique<EfficientKanLayer>(
                    in, out,
                    EfficientKanLayer::Options{spec.grid_size, spec.spline_order, spec.spline_scaler, spec.l1_strength},
                    init));
                break;
            case HeadFamily::fasterkan:
                layers_.push_back(
                    std::make_unique<FasterKanLayer>(in, out, FasterKanLayer::Options{spec.grid_size, spec.silu_path}, init));
                break;
            }
        };

        add_dropout(spec.in);
        if (spec.hidden_dim == 0) {
            add_family_layer(spec.in, spec.out);
        } else {
            add_family_layer(spec.in, spec.hidden_dim);
            if (spec.family == HeadFamily::mlp) {
                layers_.push_back(std::make_unique<ActivationLayer>(spec.hidden_dim, spec.activation));
            }
            add_dropout(spec.hidden_dim);
            add_family_layer(spec.hidden_dim, spec.out);
        }
    }

    Head(Head&&) noexcept = default;
    Head& operator=(Head&&) noexcept = default;

    const HeadSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    HeadFamily family() const noexcept { return spec_.family; }
    std::size_t in_features() const noexcept { return spec_.in; }
    std::size_t out_features() const noexcept { return spec_.out; }

    std::vector<LayerPtr>& layers() noexcept { return layers_; }

    Matrix forward(const Matrix& x) {
        if (x.cols() != spec_.in) {
            throw ShapeError("head: expected " + std::to_string(spec_.in) + " input columns, got " + x.shape());
        }
        Matrix h = x;
        for (auto& l : layers_) h = l->forward(h);
        return h;
    }

    Matrix backward(const Matrix& grad_out) {
        Matrix g = grad_out;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    /// Parameters of all layers, names prefixed with the layer index.
    std::vector<ParamRef> params() {
        std::vector<ParamRef> out;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            for (auto p : layers_[i]->params()) {
                p.name = "layer" + std::to_string(i) + "." + p.name;
                out.push_back(std::move(p));
            }
        }
        return out;
    }

    void zero_grad() {
        for (auto& l : layers_) l->zero_grad();
    }

    void set_training(bool on) {
        for (auto& l : layers_) l->set_training(on);
    }

    double l1_penalty() const {
        double s = 0.0;
        for (const auto& l : layers_) {
            if (const auto* e = dynamic_cast<const EfficientKanLayer*>(l.get())) s += e->l1_penalty();
        }
        return s;
    }

    void add_l1_grad() {
        for (auto& l : layers_) {
            if (auto* e = dynamic_cast<EfficientKanLayer*>(l.get())) e->add_l1_grad();
        }
    }

private:
    HeadSpec spec_;
    std::uint64_t seed_;
    std::vector<LayerPtr> layers_;
};

inline ParamCount count_params(std::span<const ParamRef> params) {
    ParamCount c;
    for (const auto& p : params) {
        c.total += p.value->size();
        if (p.trainable) c.trainable += p.value->size();
    }
    return c;
}

inline ParamCount count_params(Head& head) {
    const auto ps = head.params();
    return count_params(ps);
}

/// Closed-form parameter count of a head built from `spec`.
inline std::size_t expected_param_count(const HeadSpec& s) {
    auto layer = [&](std::size_t in, std::size_t out) -> std::size_t {
        switch (s.family) {
        case HeadFamily::mlp: return in * out + out;
        case HeadFamily::fourierkan: return 2 * s.grid_size * in * out + (s.fourier_bias ? out : 0);
        case HeadFamily::efficientkan:
            return in * out + in * out * (s.grid_size + s.spline_order) + (s.spline_scaler ? in * out : 0);
        case HeadFamily::fasterkan:
            return in * s.grid_size * out + out + s.grid_size + 1 + (s.silu_path ? in * out + out : 0);
        }
        return 0;
    };
    if (s.hidden_dim == 0) return layer(s.in, s.out);
    return layer(s.in, s.hidden_dim) + layer(s.hidden_dim, s.out);
}

} // namespace kanhead
