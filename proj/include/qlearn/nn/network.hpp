#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlearn/nn/layer.hpp"

namespace qlearn::nn {

/// Raised when forward / backward / calculate_gradient run out of order.
struct PhaseError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Ordered pipeline of layers. Owns the activation tensors between layers;
/// copying a Network deep-copies layers and parameters.
template <typename T>
class Network {
public:
    explicit Network(Shape input_shape) : input_shape_(std::move(input_shape)) { shapes_.push_back(input_shape_); }

    Network(const Network& other)
        : input_shape_(other.input_shape_), shapes_(other.shapes_), acts_(other.acts_.size()) {
        layers_.reserve(other.layers_.size());
        for (const auto& l : other.layers_) layers_.push_back(l->clone());
    }
    Network& operator=(const Network& other) {
        if (this != &other) *this = Network(other);
        return *this;
    }
    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    /// Appends a layer; its input must match the current output shape.
    template <typename L>
    L& add(std::unique_ptr<L> layer) {
        shapes_.push_back(layer->output_shape(shapes_.back()));
        auto& ref = *layer;
        layers_.push_back(std::move(layer));
        acts_.resize(layers_.size() + 1);
        return ref;
    }

    [[nodiscard]] const Shape& input_shape() const { return input_shape_; }
    [[nodiscard]] const Shape& output_shape() const { return shapes_.back(); }
    /// Per-sample shape after each layer; entry 0 is the input.
    [[nodiscard]] const std::vector<Shape>& shapes() const { return shapes_; }
    [[nodiscard]] std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t k) { return *layers_.at(k); }
    const Layer<T>& layer(std::size_t k) const { return *layers_.at(k); }

    /// Runs every layer in order. `x` has shape {batch, input_shape...}.
    const Tensor<T>& forward(const Tensor<T>& x) {
        if (x.shape().size() != input_shape_.size() + 1 ||
            !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin() + 1))
            throw std::invalid_argument("network: input shape " + to_string(x.shape()) + " does not match " +
                                        to_string(input_shape_) + " with a batch axis");
        if (acts_.empty()) acts_.resize(1);
        acts_[0].reshape(x.shape());
        std::copy(x.values().begin(), x.values().end(), acts_[0].values().begin());
        for (std::size_t k = 0; k < layers_.size(); ++k) {
            layers_[k]->forward(acts_[k], acts_[k + 1]);
            if (!values_finite<T>(acts_[k + 1].values()))
                throw NumericFault("network: non-finite output from layer " + std::to_string(k) + " (" +
                                   std::string(name_of(layers_[k]->kind())) + ")");
        }
        phase_ = Phase::forwarded;
        return acts_.back();
    }

    /// Propagates dL/dy back to dL/dx. Parameter gradients are left alone.
    const Tensor<T>& backward(std::span<const T> output_grad) {
        if (phase_ != Phase::forwarded) throw PhaseError("network: backward called before forward");
        auto& out = acts_.back();
        if (output_grad.size() != out.size())
            throw std::invalid_argument("network: output gradient has " + std::to_string(output_grad.size()) +
                                        " entries, expected " + std::to_string(out.size()));
        std::copy(output_grad.begin(), output_grad.end(), out.grad().begin());
        for (std::size_t k = layers_.size(); k-- > 0;) layers_[k]->backward(acts_[k], acts_[k + 1]);
        phase_ = Phase::backwarded;
        return acts_.front();
    }

    /// Adds this step's parameter gradients into Params::grad.
    void calculate_gradient() {
        if (phase_ != Phase::backwarded) throw PhaseError("network: calculate_gradient called before backward");
        for (std::size_t k = layers_.size(); k-- > 0;) layers_[k]->calculate_gradient(acts_[k], acts_[k + 1]);
        phase_ = Phase::idle;
    }

    /// Output of the last forward call.
    const Tensor<T>& output() const { return acts_.back(); }
    /// Input of layer k (activation k) from the last forward call.
    const Tensor<T>& activation(std::size_t k) const { return acts_.at(k); }

    std::vector<Params<T>*> params() {
        std::vector<Params<T>*> out;
        for (auto& l : layers_)
            for (auto* p : l->params()) out.push_back(p);
        return out;
    }
    std::vector<const Params<T>*> params() const {
        std::vector<const Params<T>*> out;
        for (const auto& l : layers_)
            for (const auto* p : l->params()) out.push_back(p);
        return out;
    }

    void zero_grad() {
        for (auto* p : params()) p->zero_grad();
    }

private:
    enum class Phase { idle, forwarded, backwarded };

    Shape input_shape_;
    std::vector<Shape> shapes_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<Tensor<T>> acts_;
    Phase phase_ = Phase::idle;
};

}  // namespace qlearn::nn
