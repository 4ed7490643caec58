#pragma once

#include <stdexcept>

#include "qlearn/nn/network.hpp"

namespace qlearn::optim {

/// Frozen copy of a network's parameters, used to compute bootstrap targets.
/// It only changes through sync().
template <typename T>
class TargetNetwork {
public:
    explicit TargetNetwork(const nn::Network<T>& online) : net_(online) {}

    /// Copies every parameter of `online`; shapes must match exactly.
    void sync(const nn::Network<T>& online) {
        auto src = online.params();
        auto dst = net_.params();
        if (src.size() != dst.size()) throw std::invalid_argument("sync_target: parameter count mismatch");
        for (std::size_t i = 0; i < src.size(); ++i) {
            const auto& s = *src[i];
            auto& d = *dst[i];
            if (s.weight.shape() != d.weight.shape() || s.bias.has_value() != d.bias.has_value() ||
                (s.bias && s.bias->shape() != d.bias->shape()))
                throw std::invalid_argument("sync_target: shape mismatch in '" + s.name + "'");
        }
        for (std::size_t i = 0; i < src.size(); ++i) {
            auto copy = [](const nn::Tensor<T>& from, nn::Tensor<T>& to) {
                std::copy(from.values().begin(), from.values().end(), to.values().begin());
            };
            copy(src[i]->weight, dst[i]->weight);
            if (src[i]->bias) copy(*src[i]->bias, *dst[i]->bias);
        }
    }

    /// Q-values under the frozen parameters.
    const nn::Tensor<T>& forward(const nn::Tensor<T>& x) { return net_.forward(x); }

    const nn::Network<T>& network() const { return net_; }
    /// Mutable access for checkpoint restore only.
    nn::Network<T>& network_for_restore() { return net_; }

private:
    nn::Network<T> net_;
};

template <typename T>
void sync_target(const nn::Network<T>& online, TargetNetwork<T>& target) {
    target.sync(online);
}

}  // namespace qlearn::optim
