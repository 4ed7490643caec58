#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "qlearn/agent/policy.hpp"
#include "qlearn/core/rng.hpp"
#include "qlearn/envs/environment.hpp"
#include "qlearn/envs/preprocess.hpp"

namespace qlearn::agent {

struct EvalResult {
    std::vector<double> returns;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

inline EvalResult summarize(std::vector<double> returns) {
    EvalResult r;
    r.returns = std::move(returns);
    if (r.returns.empty()) return r;
    const double n = static_cast<double>(r.returns.size());
    r.mean = std::accumulate(r.returns.begin(), r.returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : r.returns) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / n);
    return r;
}

/// Chooses an action from the environment and the current stacked state.
template <typename T>
using Policy = std::function<std::size_t(const envs::Environment&, std::span<const T>, Rng&)>;

/// Plays `episodes` episodes on a copy of `proto`, each capped at
/// `max_episode_steps`, and returns the undiscounted reward sums. Episode
/// layouts are seeded from `rng`.
template <typename T>
EvalResult run_episodes(const envs::Environment& proto, std::size_t episodes, std::uint64_t max_episode_steps,
                        envs::FrameStack<T> stack, Rng& rng, const Policy<T>& policy) {
    if (episodes == 0) throw std::invalid_argument("evaluate: episodes must be >= 1");
    auto env = proto.clone();
    std::vector<double> returns;
    returns.reserve(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
        stack.reset(env->reset(rng.next_u64()));
        double total = 0.0;
        for (std::uint64_t t = 0; t < max_episode_steps; ++t) {
            const auto a = policy(*env, stack.state(), rng);
            auto s = env->step(a);
            total += s.reward;
            if (s.terminal) break;
            stack.push(s.observation);
        }
        returns.push_back(total);
    }
    return summarize(std::move(returns));
}

/// Epsilon-greedy play with `net`; no learning and nothing is stored.
template <typename T>
EvalResult evaluate(nn::Network<T>& net, const envs::Environment& proto, std::size_t episodes, double test_epsilon,
                    std::uint64_t max_episode_steps, const envs::FrameStack<T>& stack, Rng& rng) {
    Policy<T> greedy = [&](const envs::Environment&, std::span<const T> s, Rng& r) {
        return select_action<T>(net, s, test_epsilon, r);
    };
    return run_episodes<T>(proto, episodes, max_episode_steps, stack, rng, greedy);
}

}  // namespace qlearn::agent
