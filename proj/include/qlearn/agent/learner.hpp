#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "qlearn/agent/config.hpp"
#include "qlearn/agent/targets.hpp"
#include "qlearn/nn/network.hpp"
#include "qlearn/optim/rmsprop.hpp"
#include "qlearn/optim/target.hpp"
#include "qlearn/replay/replay_memory.hpp"

namespace qlearn::agent {

/// Per-sample outcome of one learning step. delta = target - Q(s, a) exactly.
struct TdResult {
    double target = 0.0;
    double td_error = 0.0;
    double loss = 0.0;
};

struct LearnStats {
    std::vector<TdResult> samples;
    replay::SampleBatch batch;
    double mean_abs_td = 0.0;
    double loss = 0.0;  // summed over the batch
    double grad_norm = 0.0;
};

/// Gradient of the per-sample loss with respect to Q(s, a):
/// 1/2 w delta^2 gives -w delta; Huber (threshold 1) clips delta to [-1, 1].
inline double loss_grad(double delta, double weight, bool huber) {
    const double d = huber ? std::clamp(delta, -1.0, 1.0) : delta;
    return -weight * d;
}

inline double loss_value(double delta, double weight, bool huber) {
    const double a = std::abs(delta);
    if (huber && a > 1.0) return weight * (a - 0.5);
    return 0.5 * weight * delta * delta;
}

/// Online network, its frozen target and the optimizer.
template <typename T>
class Learner {
public:
    Learner(nn::Network<T> online, const AgentConfig& cfg)
        : cfg_(cfg), online_(std::move(online)), target_(online_), optimizer_(online_, cfg.optimizer) {
        n_actions_ = online_.output_shape().at(0);
    }

    nn::Network<T>& online() { return online_; }
    const nn::Network<T>& online() const { return online_; }
    optim::TargetNetwork<T>& target() { return target_; }
    const optim::TargetNetwork<T>& target() const { return target_; }
    optim::RmsProp<T>& optimizer() { return optimizer_; }
    const optim::RmsProp<T>& optimizer() const { return optimizer_; }
    const AgentConfig& config() const { return cfg_; }
    [[nodiscard]] std::size_t n_actions() const { return n_actions_; }

    void sync_target() { target_.sync(online_); }

    /// Bootstrap targets for the sampled transitions, per the configured
    /// variant (double or plain DQN). Runs no backward pass.
    std::vector<double> targets(const replay::ReplayMemory<T>& memory, const replay::SampleBatch& b) {
        gather(memory, b, true, next_);
        rewards_.resize(b.size());
        terminals_ = std::make_unique<bool[]>(b.size());
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto t = memory.at(b.indices[j]);
            rewards_[j] = t.reward;
            terminals_[j] = t.terminal;
        }
        const auto target_out = target_.forward(next_).values();
        const std::vector<T> q_target(target_out.begin(), target_out.end());
        std::span<const bool> term(terminals_.get(), b.size());
        if (cfg_.double_q) {
            const auto& q_online = online_.forward(next_);
            return compute_target_double<T>(rewards_, term, q_online.values(), q_target, n_actions_, cfg_.gamma);
        }
        return compute_target_dqn<T>(rewards_, term, q_target, n_actions_, cfg_.gamma);
    }

    /// One minibatch update: sample, compute targets, descend on
    /// sum_j 1/2 w_j delta_j^2 through Q(s_j, a_j) only, refresh priorities.
    LearnStats learn_step(replay::ReplayMemory<T>& memory, double beta, Rng& rng) {
        LearnStats st;
        st.batch = cfg_.prioritized() ? memory.sample_prioritized(cfg_.batch_size, beta, rng)
                                      : memory.sample_uniform(cfg_.batch_size, rng);
        const auto& b = st.batch;
        const auto y = targets(memory, b);

        gather(memory, b, false, states_);
        const auto& q = online_.forward(states_);
        grad_.assign(q.size(), T{0});
        st.samples.resize(b.size());
        std::vector<double> deltas(b.size());
        double abs_sum = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto a = memory.at(b.indices[j]).action;
            const double qa = static_cast<double>(q[j * n_actions_ + a]);
            const double delta = y[j] - qa;
            const double w = b.weights[j];
            st.samples[j] = {y[j], delta, loss_value(delta, w, cfg_.huber)};
            deltas[j] = delta;
            abs_sum += std::abs(delta);
            st.loss += st.samples[j].loss;
            grad_[j * n_actions_ + a] = static_cast<T>(loss_grad(delta, w, cfg_.huber));
        }
        st.mean_abs_td = abs_sum / static_cast<double>(b.size());

        online_.backward(grad_);
        online_.calculate_gradient();
        if (cfg_.grad_clip > 0.0) st.grad_norm = optim::clip_gradients(online_, cfg_.grad_clip);
        optimizer_.step(online_);
        memory.update_priorities(b.indices, deltas);
        return st;
    }

    /// Gradient written to the network output by the last learn_step.
    [[nodiscard]] std::span<const T> last_output_grad() const { return grad_; }

private:
    void gather(const replay::ReplayMemory<T>& memory, const replay::SampleBatch& b, bool next,
                nn::Tensor<T>& out) const {
        out.reshape(nn::batched(b.size(), online_.input_shape()));
        const std::size_t n = memory.state_size();
        if (n != out.row_size()) throw std::invalid_argument("learner: replay state size does not match network input");
        auto v = out.values();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto t = memory.at(b.indices[j]);
            const auto src = next ? t.next_state : t.state;
            std::copy(src.begin(), src.end(), v.begin() + static_cast<std::ptrdiff_t>(j * n));
        }
    }

    AgentConfig cfg_;
    nn::Network<T> online_;
    optim::TargetNetwork<T> target_;
    optim::RmsProp<T> optimizer_;
    std::size_t n_actions_ = 0;
    nn::Tensor<T> states_, next_;
    std::vector<double> rewards_;
    std::unique_ptr<bool[]> terminals_;
    std::vector<T> grad_;
};

}  // namespace qlearn::agent
