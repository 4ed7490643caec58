#pragma once

#include <span>
#include <stdexcept>

#include "qlearn/agent/targets.hpp"
#include "qlearn/core/rng.hpp"
#include "qlearn/nn/network.hpp"

namespace qlearn::agent {

/// With probability epsilon a uniformly random action, otherwise argmax_a q.
/// Always consumes exactly one uniform draw, plus one integer draw on the
/// random branch.
template <typename T>
std::size_t epsilon_greedy(std::span<const T> q, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon_greedy: epsilon outside [0, 1]");
    if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.uniform_int(q.size()));
    return argmax(q);
}

/// Evaluates Q(state, .) with `net` and applies epsilon_greedy. `state` is one
/// sample laid out as the network's input shape. The network only runs on
/// the greedy branch; the draws are the same as epsilon_greedy's.
template <typename T>
std::size_t select_action(nn::Network<T>& net, std::span<const T> state, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("select_action: epsilon outside [0, 1]");
    if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.uniform_int(net.output_shape().at(0)));
    nn::Tensor<T> x(nn::batched(1, net.input_shape()));
    if (state.size() != x.size()) throw std::invalid_argument("select_action: state size mismatch");
    std::copy(state.begin(), state.end(), x.values().begin());
    return argmax<T>(net.forward(x).values());
}

}  // namespace qlearn::agent
