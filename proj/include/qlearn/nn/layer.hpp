#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "qlearn/nn/tensor.hpp"

namespace qlearn::nn {

enum class LayerKind { convolution, linear, relu, dueling_head };

constexpr std::string_view name_of(LayerKind k) {
    switch (k) {
        case LayerKind::convolution: return "convolution";
        case LayerKind::linear: return "linear";
        case LayerKind::relu: return "relu";
        case LayerKind::dueling_head: return "dueling-head";
    }
    return "?";
}

/// One stage of a Network. Computation is split in three phases:
///   forward            y = f(x)
///   backward           x.grad = (dy/dx)^T y.grad          (overwrites)
///   calculate_gradient params.grad += (dy/dtheta)^T y.grad (accumulates)
/// Tensors carry a leading batch axis; shapes passed to output_shape are per
/// sample.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    [[nodiscard]] virtual LayerKind kind() const = 0;
    [[nodiscard]] virtual Shape output_shape(const Shape& input) const = 0;

    virtual void forward(const Tensor<T>& x, Tensor<T>& y) = 0;
    virtual void backward(Tensor<T>& x, const Tensor<T>& y) = 0;
    virtual void calculate_gradient(const Tensor<T>& x, const Tensor<T>& y) { (void)x, (void)y; }

    virtual std::vector<Params<T>*> params() { return {}; }
    virtual std::vector<const Params<T>*> params() const { return {}; }

    [[nodiscard]] virtual std::unique_ptr<Layer> clone() const = 0;
};

/// Output tensor shape for a batch of `batch` samples of per-sample shape `s`.
inline Shape batched(std::size_t batch, const Shape& s) {
    Shape out{batch};
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

}  // namespace qlearn::nn
