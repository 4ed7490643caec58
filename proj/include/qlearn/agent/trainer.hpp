#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qlearn/agent/evaluate.hpp"
#include "qlearn/agent/learner.hpp"
#include "qlearn/agent/policy.hpp"
#include "qlearn/config.hpp"
#include "qlearn/envs/registry.hpp"
#include "qlearn/nn/architecture.hpp"

namespace qlearn::agent {

/// One metrics row: either an episode summary or an evaluation result.
struct MetricRecord {
    std::uint64_t step = 0;
    std::uint64_t episode = 0;
    std::optional<double> episode_return;
    double epsilon = 0.0;
    double beta = 0.0;
    std::optional<double> mean_abs_td;
    std::optional<double> loss;
    std::optional<double> eval_mean;
};

/// Counters and in-flight episode data; together with the networks,
/// optimizer, rng streams, replay memory and environment this is the whole
/// training state.
struct Progress {
    std::uint64_t step = 0;
    std::uint64_t episode = 0;  // completed episodes
    std::uint64_t optimizer_steps = 0;
    std::uint64_t evaluations = 0;
    bool in_episode = false;
    std::uint64_t episode_steps = 0;
    double episode_return = 0.0;
    double episode_td_sum = 0.0;
    double episode_loss_sum = 0.0;
    std::uint64_t episode_learn_steps = 0;
    double last_epsilon = 0.0;
};

/// Preprocessed frame size: frame_size x frame_size, or the raw frame size
/// when frame_size is 0.
inline std::pair<std::size_t, std::size_t> frame_dims(const RunConfig& cfg, const envs::EnvSpec& spec) {
    if (cfg.frame_size == 0) return {spec.frame_height, spec.frame_width};
    return {cfg.frame_size, cfg.frame_size};
}

template <typename T>
nn::Network<T> make_network(const RunConfig& cfg, const envs::EnvSpec& spec) {
    const auto [h, w] = frame_dims(cfg, spec);
    auto net = nn::build_network<T>(nn::Architecture::named(cfg.arch), {h, w, cfg.frame_stack}, spec.n_actions,
                                    cfg.agent.dueling);
    nn::init_params(net, cfg.seed);
    return net;
}

/// The act / store / learn loop. Each environment step:
///   pick an epsilon-greedy action, step the environment, store the
///   transition, learn every update_period steps once learning_start steps
///   have been taken, sync the target every target_sync_period steps, and
///   evaluate every test_period steps.
/// Episodes end on a terminal transition or after max_episode_steps; the
/// latter is stored as non-terminal so the value keeps bootstrapping.
template <typename T>
class Trainer {
public:
    struct Callbacks {
        std::function<void(const MetricRecord&)> on_record;
        std::function<void(const Trainer&)> on_checkpoint;
    };

    explicit Trainer(const RunConfig& cfg)
        : cfg_(validated(cfg)),
          env_(envs::make_env(cfg.env, cfg.env_size)),
          stack_(frame_dims(cfg, env_->spec()).first, frame_dims(cfg, env_->spec()).second, cfg.frame_stack),
          learner_(make_network<T>(cfg, env_->spec()), cfg.agent),
          memory_(cfg.agent.replay_capacity, stack_.state_size(),
                  {cfg.agent.priority_alpha, cfg.agent.priority_epsilon}),
          env_rng_(derive(cfg.seed, Stream::env)),
          agent_rng_(derive(cfg.seed, Stream::agent)),
          replay_rng_(derive(cfg.seed, Stream::replay)) {
        learner_.sync_target();
    }

    /// Runs until min(stop_at, max_steps) environment steps have been taken.
    void run(std::uint64_t stop_at, const Callbacks& cb = {}) {
        const auto& a = cfg_.agent;
        const auto limit = std::min(stop_at, a.max_steps);
        while (p_.step < limit) {
            if (!p_.in_episode) begin_episode();

            const double eps = anneal_epsilon(p_.step, a.epsilon);
            p_.last_epsilon = eps;
            const auto action = select_action<T>(learner_.online(), stack_.state(), eps, agent_rng_);
            const std::vector<T> state = stack_.state();
            auto es = env_->step(action);
            const auto& next = stack_.push(es.observation);
            const double reward = a.clip_rewards ? std::clamp(es.reward, -1.0, 1.0) : es.reward;
            memory_.store(state, action, reward, next, es.terminal);
            p_.episode_return += es.reward;
            ++p_.episode_steps;
            ++p_.step;

            if (p_.step >= a.learning_start && p_.step % a.update_period == 0) {
                const auto st = learner_.learn_step(memory_, anneal_beta(p_.step, a.beta_schedule()), replay_rng_);
                ++p_.optimizer_steps;
                ++p_.episode_learn_steps;
                p_.episode_td_sum += st.mean_abs_td;
                p_.episode_loss_sum += st.loss;
            }
            if (p_.step % a.target_sync_period == 0) learner_.sync_target();

            if (es.terminal || p_.episode_steps >= a.max_episode_steps) end_episode(cb);

            if (cfg_.test_period > 0 && p_.step % cfg_.test_period == 0) {
                const auto r = evaluate_now(cfg_.eval_episodes, a.test_epsilon);
                MetricRecord m;
                m.step = p_.step;
                m.episode = p_.episode;
                m.epsilon = anneal_epsilon(p_.step, a.epsilon);
                m.beta = beta();
                m.eval_mean = r.mean;
                emit(cb, m);
            }
            if (cfg_.checkpoint_period > 0 && p_.step % cfg_.checkpoint_period == 0 && cb.on_checkpoint)
                cb.on_checkpoint(*this);
        }
    }

    /// Evaluation with its own rng stream, keyed by the evaluation count, so
    /// it never perturbs training.
    EvalResult evaluate_now(std::size_t episodes, double test_epsilon) {
        Rng rng = Rng::derive(derive(cfg_.seed, Stream::eval).next_u64(), p_.evaluations++);
        envs::FrameStack<T> fresh(stack_.height(), stack_.width(), stack_.depth());
        nn::Network<T> snapshot = learner_.online();
        return evaluate<T>(snapshot, *env_, episodes, test_epsilon, cfg_.agent.max_episode_steps, fresh, rng);
    }

    [[nodiscard]] bool finished() const { return p_.step >= cfg_.agent.max_steps; }
    [[nodiscard]] double beta() const { return anneal_beta(p_.step, cfg_.agent.beta_schedule()); }

    const RunConfig& config() const { return cfg_; }
    const Progress& progress() const { return p_; }
    Progress& progress() { return p_; }
    Learner<T>& learner() { return learner_; }
    const Learner<T>& learner() const { return learner_; }
    replay::ReplayMemory<T>& memory() { return memory_; }
    const replay::ReplayMemory<T>& memory() const { return memory_; }
    envs::Environment& env() { return *env_; }
    const envs::Environment& env() const { return *env_; }
    envs::FrameStack<T>& frame_stack() { return stack_; }
    const envs::FrameStack<T>& frame_stack() const { return stack_; }
    Rng& env_rng() { return env_rng_; }
    Rng& agent_rng() { return agent_rng_; }
    Rng& replay_rng() { return replay_rng_; }
    const Rng& env_rng() const { return env_rng_; }
    const Rng& agent_rng() const { return agent_rng_; }
    const Rng& replay_rng() const { return replay_rng_; }

private:
    static const RunConfig& validated(const RunConfig& c) {
        c.agent.validate();
        if (c.frame_stack == 0) throw std::invalid_argument("frame-stack: must be positive");
        return c;
    }

    void begin_episode() {
        stack_.reset(env_->reset(env_rng_.next_u64()));
        p_.in_episode = true;
        p_.episode_steps = 0;
        p_.episode_return = 0.0;
        p_.episode_td_sum = 0.0;
        p_.episode_loss_sum = 0.0;
        p_.episode_learn_steps = 0;
    }

    void end_episode(const Callbacks& cb) {
        ++p_.episode;
        p_.in_episode = false;
        MetricRecord m;
        m.step = p_.step;
        m.episode = p_.episode;
        m.episode_return = p_.episode_return;
        m.epsilon = p_.last_epsilon;
        m.beta = beta();
        if (p_.episode_learn_steps > 0) {
            const auto n = static_cast<double>(p_.episode_learn_steps);
            m.mean_abs_td = p_.episode_td_sum / n;
            m.loss = p_.episode_loss_sum / n;
        }
        emit(cb, m);
    }

    static void emit(const Callbacks& cb, const MetricRecord& m) {
        if (cb.on_record) cb.on_record(m);
    }

    RunConfig cfg_;
    std::unique_ptr<envs::Environment> env_;
    envs::FrameStack<T> stack_;
    Learner<T> learner_;
    replay::ReplayMemory<T> memory_;
    Rng env_rng_, agent_rng_, replay_rng_;
    Progress p_;
};

/// Trains from scratch for the configured budget.
template <typename T>
Trainer<T> run_training(const RunConfig& cfg, const typename Trainer<T>::Callbacks& cb = {}) {
    Trainer<T> t(cfg);
    t.run(cfg.agent.max_steps, cb);
    return t;
}

}  // namespace qlearn::agent
