#pragma once

#include "qlearn/nn/layer.hpp"

namespace qlearn::nn {

template <typename T>
class Relu final : public Layer<T> {
public:
    LayerKind kind() const override { return LayerKind::relu; }
    Shape output_shape(const Shape& input) const override { return input; }

    void forward(const Tensor<T>& x, Tensor<T>& y) override {
        y.reshape(x.shape());
        auto xv = x.values();
        auto yv = y.values();
        for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] > T{0} ? xv[i] : T{0};
    }

    void backward(Tensor<T>& x, const Tensor<T>& y) override {
        auto xv = x.values();
        auto dx = x.grad();
        auto dy = y.grad();
        for (std::size_t i = 0; i < xv.size(); ++i) dx[i] = xv[i] > T{0} ? dy[i] : T{0};
    }

    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Relu>(*this); }
};

}  // namespace qlearn::nn
