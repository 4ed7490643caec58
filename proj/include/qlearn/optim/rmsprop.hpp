#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlearn/nn/network.hpp"

namespace qlearn::optim {

struct RmsPropConfig {
    double learning_rate = 0.000625;
    double decay = 0.95;
    double epsilon = 1e-6;
};

/// Raised when a gradient is NaN/Inf; no weight is modified in that case.
struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plain RMSprop (no momentum, no centering):
///   acc <- decay * acc + (1 - decay) * g^2
///   w   <- w - lr * g / (sqrt(acc) + epsilon)
/// One accumulator per parameter tensor, in Network::params() order.
template <typename T>
class RmsProp {
public:
    RmsProp(nn::Network<T>& net, RmsPropConfig cfg) : cfg_(cfg) {
        for (auto* p : net.params()) p->for_each_tensor([&](const nn::Tensor<T>& t) { acc_.emplace_back(t.size(), T{0}); });
    }

    [[nodiscard]] const RmsPropConfig& config() const { return cfg_; }
    void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

    /// Applies one update from the accumulated gradients, then zeroes them.
    void step(nn::Network<T>& net) {
        auto params = net.params();
        std::size_t i = 0;
        for (auto* p : params)
            p->for_each_tensor([&](const nn::Tensor<T>& t) {
                if (!nn::values_finite<T>(t.grad()))
                    throw NonFiniteGradient("rmsprop: non-finite gradient in '" + p->name + "'");
                if (i >= acc_.size() || acc_[i].size() != t.size())
                    throw std::invalid_argument("rmsprop: parameter layout changed since construction");
                ++i;
            });
        const T decay = static_cast<T>(cfg_.decay);
        const T keep = T{1} - decay;
        const T lr = static_cast<T>(cfg_.learning_rate);
        const T eps = static_cast<T>(cfg_.epsilon);
        i = 0;
        for (auto* p : params) {
            p->for_each_tensor([&](nn::Tensor<T>& t) {
                auto w = t.values();
                auto g = t.grad();
                auto& a = acc_[i++];
                for (std::size_t j = 0; j < w.size(); ++j) {
                    a[j] = decay * a[j] + keep * g[j] * g[j];
                    w[j] -= lr * g[j] / (std::sqrt(a[j]) + eps);
                }
            });
            p->zero_grad();
        }
    }

    std::vector<std::vector<T>>& accumulators() { return acc_; }
    const std::vector<std::vector<T>>& accumulators() const { return acc_; }

private:
    RmsPropConfig cfg_;
    std::vector<std::vector<T>> acc_;
};

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename T>
double clip_gradients(nn::Network<T>& net, double max_norm) {
    double sq = 0.0;
    for (auto* p : net.params())
        p->for_each_tensor([&](const nn::Tensor<T>& t) {
            for (T g : t.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
        });
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const T scale = static_cast<T>(max_norm / norm);
        for (auto* p : net.params())
            p->for_each_tensor([&](nn::Tensor<T>& t) {
                for (auto& g : t.grad()) g *= scale;
            });
    }
    return norm;
}

}  // namespace qlearn::optim
