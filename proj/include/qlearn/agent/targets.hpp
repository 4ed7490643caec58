#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qlearn::agent {

/// Index of the largest entry; ties go to the lowest index.
template <typename T>
std::size_t argmax(std::span<const T> q) {
    if (q.empty()) throw std::invalid_argument("argmax: empty span");
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

/// y_j = r_j                                   if terminal
///     = r_j + gamma * max_a Q_target(s'_j, a)  otherwise
/// `next_q_target` is batch x n_actions.
template <typename T>
std::vector<double> compute_target_dqn(std::span<const double> rewards, std::span<const bool> terminals,
                                       std::span<const T> next_q_target, std::size_t n_actions, double gamma) {
    const std::size_t batch = rewards.size();
    if (terminals.size() != batch || next_q_target.size() != batch * n_actions)
        throw std::invalid_argument("compute_target_dqn: inconsistent batch sizes");
    std::vector<double> y(batch);
    for (std::size_t j = 0; j < batch; ++j) {
        y[j] = rewards[j];
        if (!terminals[j]) {
            auto row = next_q_target.subspan(j * n_actions, n_actions);
            y[j] += gamma * static_cast<double>(row[argmax(row)]);
        }
    }
    return y;
}

/// Double DQN: the online network picks a* = argmax_a Q_online(s'_j, a) and
/// the target network scores it, y_j = r_j + gamma * Q_target(s'_j, a*).
template <typename T>
std::vector<double> compute_target_double(std::span<const double> rewards, std::span<const bool> terminals,
                                          std::span<const T> next_q_online, std::span<const T> next_q_target,
                                          std::size_t n_actions, double gamma) {
    const std::size_t batch = rewards.size();
    if (terminals.size() != batch || next_q_target.size() != batch * n_actions ||
        next_q_online.size() != batch * n_actions)
        throw std::invalid_argument("compute_target_double: inconsistent batch sizes");
    std::vector<double> y(batch);
    for (std::size_t j = 0; j < batch; ++j) {
        y[j] = rewards[j];
        if (!terminals[j]) {
            const auto a = argmax(next_q_online.subspan(j * n_actions, n_actions));
            y[j] += gamma * static_cast<double>(next_q_target[j * n_actions + a]);
        }
    }
    return y;
}

}  // namespace qlearn::agent
