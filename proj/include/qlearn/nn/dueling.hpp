#pragma once

#include <string>

#include "qlearn/nn/gemm.hpp"
#include "qlearn/nn/layer.hpp"

namespace qlearn::nn {

/// Output head that splits features into a state value V(s) and advantages
/// A(s,a), recombined as
///
///   Q(s,a) = V(s) + A(s,a) - (1/|A|) sum_a' A(s,a')
///
/// Both branches are affine maps of the flattened features and live in this
/// one layer so the network stays a flat list.
template <typename T>
class DuelingHead final : public Layer<T> {
public:
    DuelingHead(std::size_t features, std::size_t actions, std::string name = "dueling")
        : features_(features), actions_(actions) {
        if (actions == 0) throw std::invalid_argument("dueling head: needs at least one action");
        value_.name = name + ".value";
        value_.weight = Tensor<T>({features, 1});
        value_.bias = Tensor<T>({1});
        advantage_.name = name + ".advantage";
        advantage_.weight = Tensor<T>({features, actions});
        advantage_.bias = Tensor<T>({actions});
    }

    LayerKind kind() const override { return LayerKind::dueling_head; }

    Shape output_shape(const Shape& input) const override {
        if (element_count(input) != features_)
            throw std::invalid_argument("dueling head: expects " + std::to_string(features_) + " features, got " +
                                        to_string(input));
        return {actions_};
    }

    void forward(const Tensor<T>& x, Tensor<T>& y) override {
        const std::size_t batch = x.extent(0);
        affine(x, value_, 1, v_);
        affine(x, advantage_, actions_, a_);
        y.reshape({batch, actions_});
        auto q = y.values();
        for (std::size_t n = 0; n < batch; ++n) {
            const T* adv = a_.data() + n * actions_;
            T mean{0};
            for (std::size_t k = 0; k < actions_; ++k) mean += adv[k];
            mean /= static_cast<T>(actions_);
            for (std::size_t k = 0; k < actions_; ++k) q[n * actions_ + k] = v_[n] + (adv[k] - mean);
        }
    }

    void backward(Tensor<T>& x, const Tensor<T>& y) override {
        branch_grads(y);
        const std::size_t batch = x.extent(0);
        blas::gemm_nt(batch, features_, 1, dv_.data(), value_.weight.values().data(), x.grad().data(), false,
                      scratch_);
        blas::gemm_nt(batch, features_, actions_, da_.data(), advantage_.weight.values().data(), x.grad().data(),
                      true, scratch_);
    }

    void calculate_gradient(const Tensor<T>& x, const Tensor<T>& y) override {
        branch_grads(y);
        const std::size_t batch = x.extent(0);
        blas::gemm_tn(features_, 1, batch, x.values().data(), dv_.data(), value_.weight.grad().data(), true);
        blas::gemm_tn(features_, actions_, batch, x.values().data(), da_.data(), advantage_.weight.grad().data(),
                      true);
        auto dbv = value_.bias->grad();
        auto dba = advantage_.bias->grad();
        for (std::size_t n = 0; n < batch; ++n) {
            dbv[0] += dv_[n];
            for (std::size_t k = 0; k < actions_; ++k) dba[k] += da_[n * actions_ + k];
        }
    }

    /// V(s) per sample from the most recent forward call.
    [[nodiscard]] std::span<const T> last_value() const { return v_; }
    /// Raw A(s,a) per sample (batch x actions) from the most recent forward call.
    [[nodiscard]] std::span<const T> last_advantage() const { return a_; }

    std::vector<Params<T>*> params() override { return {&value_, &advantage_}; }
    std::vector<const Params<T>*> params() const override { return {&value_, &advantage_}; }
    std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<DuelingHead>(*this); }

private:
    void affine(const Tensor<T>& x, const Params<T>& p, std::size_t outs, std::vector<T>& out) const {
        const std::size_t batch = x.extent(0);
        out.resize(batch * outs);
        auto b = p.bias->values();
        for (std::size_t n = 0; n < batch; ++n) std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(n * outs));
        blas::gemm_nn(batch, outs, features_, x.values().data(), p.weight.values().data(), out.data(), true);
    }

    // dQ/dV = 1 for every action; dQ_k/dA_j = [k==j] - 1/|A|.
    void branch_grads(const Tensor<T>& y) {
        const std::size_t batch = y.extent(0);
        auto dq = y.grad();
        dv_.assign(batch, T{0});
        da_.resize(batch * actions_);
        for (std::size_t n = 0; n < batch; ++n) {
            T sum{0};
            for (std::size_t k = 0; k < actions_; ++k) sum += dq[n * actions_ + k];
            dv_[n] = sum;
            const T mean = sum / static_cast<T>(actions_);
            for (std::size_t k = 0; k < actions_; ++k) da_[n * actions_ + k] = dq[n * actions_ + k] - mean;
        }
    }

    std::size_t features_, actions_;
    Params<T> value_, advantage_;
    std::vector<T> v_, a_, dv_, da_, scratch_;
};

}  // namespace qlearn::nn
