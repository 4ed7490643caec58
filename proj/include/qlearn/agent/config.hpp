#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qlearn/optim/rmsprop.hpp"
#include "qlearn/replay/schedule.hpp"

namespace qlearn::agent {

/// Learning hyperparameters. Defaults are the full-size Atari settings;
/// all periods count environment steps.
struct AgentConfig {
    double gamma = 0.99;
    std::size_t batch_size = 32;
    std::uint64_t update_period = 4;
    std::uint64_t target_sync_period = 30'000;
    std::uint64_t learning_start = 50'000;
    LinearSchedule epsilon{1.0, 0.1, 5'000'000};
    double test_epsilon = 0.001;
    std::uint64_t max_steps = 100'000'000;
    std::uint64_t max_episode_steps = 18'000;
    std::size_t replay_capacity = 1'000'000;

    // Variant switches. priority_alpha == 0 selects uniform replay.
    bool double_q = true;
    bool dueling = false;
    double priority_alpha = 0.6;
    double priority_epsilon = 0.01;
    double beta_start = 0.4;
    double beta_end = 1.0;

    optim::RmsPropConfig optimizer{};
    double grad_clip = 0.0;  // 0 disables
    bool huber = false;
    bool clip_rewards = false;

    /// Importance-sampling exponent schedule: beta_start at step 0 to
    /// beta_end at max_steps.
    [[nodiscard]] LinearSchedule beta_schedule() const { return {beta_start, beta_end, max_steps}; }
    [[nodiscard]] bool prioritized() const { return priority_alpha > 0.0; }

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const {
        auto fail = [](const std::string& field, const std::string& why) {
            throw std::invalid_argument(field + ": " + why);
        };
        if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must satisfy 0 <= gamma < 1");
        if (batch_size == 0) fail("batch-size", "must be positive");
        if (update_period == 0) fail("update-period", "must be >= 1");
        if (target_sync_period == 0) fail("target-sync-period", "must be >= 1");
        if (learning_start < batch_size) fail("learning-start", "must be >= batch-size");
        if (epsilon.start < 0 || epsilon.start > 1) fail("epsilon-start", "must lie in [0, 1]");
        if (epsilon.end < 0 || epsilon.end > 1) fail("epsilon-end", "must lie in [0, 1]");
        if (test_epsilon < 0 || test_epsilon > 1) fail("test-epsilon", "must lie in [0, 1]");
        if (max_episode_steps == 0) fail("max-episode-steps", "must be positive");
        if (replay_capacity == 0) fail("replay-capacity", "must be positive");
        if (priority_alpha < 0) fail("priority-alpha", "must be >= 0");
        if (!(priority_epsilon > 0)) fail("priority-epsilon", "must be > 0");
        if (beta_start < 0 || beta_start > 1) fail("beta-start", "must lie in [0, 1]");
        if (beta_end < 0 || beta_end > 1) fail("beta-end", "must lie in [0, 1]");
        if (!(optimizer.learning_rate >= 0)) fail("learning-rate", "must be >= 0");
        if (!(optimizer.decay > 0 && optimizer.decay < 1)) fail("rmsprop-decay", "must lie in (0, 1)");
        if (!(optimizer.epsilon > 0)) fail("rmsprop-epsilon", "must be > 0");
        if (grad_clip < 0) fail("grad-clip", "must be >= 0");
    }
};

}  // namespace qlearn::agent
