#pragma once

#include <cstdint>
#include <string>

#include "qlearn/agent/config.hpp"

namespace qlearn {

/// Everything needed to reproduce a training run.
struct RunConfig {
    agent::AgentConfig agent;

    std::string env = "catch";
    std::size_t env_size = 0;  // 0: environment default
    std::string arch = "atari";
    std::size_t frame_size = 84;
    std::size_t frame_stack = 4;
    std::uint64_t seed = 1;

    std::uint64_t test_period = 5'000'000;  // 0 disables periodic evaluation
    std::size_t eval_episodes = 100;
    std::uint64_t checkpoint_period = 0;  // 0: final checkpoint only
    bool checkpoint_replay = false;
    std::string out_dir = "run";

    /// Desk-scale settings for the 24x24 Catch board: small network,
    /// shorter schedules, 10k replay.
    static RunConfig desk() {
        RunConfig c;
        c.env = "catch";
        c.arch = "small";
        c.frame_size = 24;
        c.agent.max_steps = 200'000;
        c.agent.replay_capacity = 10'000;
        c.agent.learning_start = 1'000;
        c.agent.target_sync_period = 1'000;
        c.agent.epsilon = {1.0, 0.1, 20'000};
        c.agent.max_episode_steps = 1'000;
        c.test_period = 10'000;
        return c;
    }
};

}  // namespace qlearn
