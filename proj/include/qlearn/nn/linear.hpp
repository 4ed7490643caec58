#pragma once

#include <string>

#include "qlearn/nn/gemm.hpp"
#include "qlearn/nn/layer.hpp"

namespace qlearn::nn {

/// Fully connected layer. Any per-sample input shape is flattened.
/// Weight is stored inputs x outputs, so y = x W + b for a row vector x.
template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(std::size_t inputs, std::size_t outputs, bool bias = true, std::string name = "linear")
        : inputs_(inputs), outputs_(outputs) {
        params_.name = std::move(name);
        params_.weight = Tensor<T>({inputs, outputs});
        if (bias) params_.bias = Tensor<T>({outputs});
    }

    LayerKind kind() const override { return LayerKind::linear; }

    Shape output_shape(const Shape& input) const override {
        if (element_count(input) != inputs_)
            throw std::invalid_argument("linear '" + params_.name + "': expects " + std::to_string(inputs_) +
                                        " inputs, got shape " + to_string(input));
        return {outputs_};
    }

    void forward(const Tensor<T>& x, Tensor<T>& y) override {
        const std::size_t batch = x.extent(0);
        y.reshape({batch, outputs_});
        auto yv = y.values();
        if (params_.bias) {
            auto b = params_.bias->values();
            for (std::size_t n = 0; n < batch; ++n)
                std::copy(b.begin(), b.end(), yv.begin() + static_cast<std::ptrdiff_t>(n * outputs_));
        }
        blas::gemm_nn(batch, outputs_, inputs_, x.values().data(), params_.weight.values().data(), yv.data(),
                      params_.bias.has_value());
    }

    void backward(Tensor<T>& x, const Tensor<T>& y) override {
        blas::gemm_nt(x.extent(0), inputs_, outputs_, y.grad().data(), params_.weight.values().data(),
                      x.grad().data(), false, scratch_);
    }

    void calculate_gradient(const Tensor<T>& x, const Tensor<T>& y) override {
        const std::size_t batch = x.extent(0);
        blas::gemm_tn(inputs_, outputs_, batch, x.values().data(), y.grad().data(), params_.weight.grad().data(),
                      true);
        if (params_.bias) {
            auto db = params_.bias->grad();
            auto dy = y.grad();
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t o = 0; o < outputs_; ++o) db[o] += dy[n * outputs_ + o];
        }
    }

    std::vector<Params<T>*> params() override { return {&params_}; }
    std::vector<const Params<T>*> params() const override { return {&params_}; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Linear>(*this); }

    [[nodiscard]] std::size_t inputs() const { return inputs_; }
    [[nodiscard]] std::size_t outputs() const { return outputs_; }

private:
    std::size_t inputs_, outputs_;
    Params<T> params_;
    std::vector<T> scratch_;
};

}  // namespace qlearn::nn
