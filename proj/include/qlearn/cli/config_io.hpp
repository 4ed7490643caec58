#pragma once

#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "qlearn/config.hpp"

namespace qlearn::cli {

/// Raised for malformed configuration input. The message starts with the
/// offending key.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Shortest text that parses back to exactly `v`.
inline std::string format_real(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_real failed");
    return std::string(buf, end);
}

inline double parse_real(const std::string& key, const std::string& text) {
    double v{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError(key + ": cannot parse '" + text + "' as a real number");
    return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t v{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError(key + ": cannot parse '" + text + "' as a non-negative integer");
    return v;
}

inline bool parse_flag(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    throw ConfigError(key + ": expected 0 or 1, got '" + text + "'");
}

/// A named, string-convertible configuration field.
struct ConfigKey {
    std::string name;
    std::vector<std::string> aliases;
    std::string help;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

namespace detail {

template <typename Field>
ConfigKey real_key(std::string name, std::string help, Field field, std::vector<std::string> aliases = {}) {
    return {name, std::move(aliases), std::move(help),
            [field](const RunConfig& c) { return format_real(field(c)); },
            [field, name](RunConfig& c, const std::string& s) { field(c) = parse_real(name, s); }};
}

template <typename Field>
ConfigKey count_key(std::string name, std::string help, Field field, std::vector<std::string> aliases = {}) {
    return {name, std::move(aliases), std::move(help),
            [field](const RunConfig& c) { return std::to_string(field(c)); },
            [field, name](RunConfig& c, const std::string& s) {
                field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_count(name, s));
            }};
}

template <typename Field>
ConfigKey flag_key(std::string name, std::string help, Field field, std::vector<std::string> aliases = {}) {
    return {name, std::move(aliases), std::move(help),
            [field](const RunConfig& c) { return std::string(field(c) ? "1" : "0"); },
            [field, name](RunConfig& c, const std::string& s) { field(c) = parse_flag(name, s); }};
}

template <typename Field>
ConfigKey text_key(std::string name, std::string help, Field field, std::vector<std::string> aliases = {}) {
    return {name, std::move(aliases), std::move(help),
            [field](const RunConfig& c) { return field(c); },
            [field, name](RunConfig& c, const std::string& s) {
                if (s.empty() || s.find_first_of("\n\r=") != std::string::npos)
                    throw ConfigError(name + ": invalid text value '" + s + "'");
                field(c) = s;
            }};
}

}  // namespace detail

/// Every configuration key in dump order. The first block holds the core
/// hyperparameters, one key each.
inline const std::vector<ConfigKey>& config_keys() {
    using namespace detail;
    static const std::vector<ConfigKey> keys = {
        count_key("replay-capacity", "replay memory size (transitions)",
                  [](auto& c) -> auto& { return c.agent.replay_capacity; }),
        count_key("frame-stack", "input frames stacked per state", [](auto& c) -> auto& { return c.frame_stack; }),
        real_key("gamma", "discount factor", [](auto& c) -> auto& { return c.agent.gamma; }),
        real_key("learning-rate", "RMSprop step size",
                 [](auto& c) -> auto& { return c.agent.optimizer.learning_rate; }),
        real_key("priority-alpha", "prioritization exponent (0 = uniform replay)",
                 [](auto& c) -> auto& { return c.agent.priority_alpha; }, {"priorityAlpha"}),
        real_key("beta-start", "importance-sampling exponent at step 0",
                 [](auto& c) -> auto& { return c.agent.beta_start; }),
        real_key("beta-end", "importance-sampling exponent at max-steps",
                 [](auto& c) -> auto& { return c.agent.beta_end; }),
        real_key("epsilon-start", "training epsilon at step 0",
                 [](auto& c) -> auto& { return c.agent.epsilon.start; }),
        real_key("epsilon-end", "training epsilon after epsilon-steps",
                 [](auto& c) -> auto& { return c.agent.epsilon.end; }),
        count_key("epsilon-steps", "steps over which epsilon anneals",
                  [](auto& c) -> auto& { return c.agent.epsilon.end_step; }),
        real_key("test-epsilon", "evaluation epsilon", [](auto& c) -> auto& { return c.agent.test_epsilon; }),
        count_key("learning-start", "steps before the first update",
                  [](auto& c) -> auto& { return c.agent.learning_start; }),
        count_key("batch-size", "minibatch size", [](auto& c) -> auto& { return c.agent.batch_size; }),
        count_key("update-period", "environment steps per update",
                  [](auto& c) -> auto& { return c.agent.update_period; }),
        count_key("target-sync-period", "environment steps between target copies",
                  [](auto& c) -> auto& { return c.agent.target_sync_period; }),
        count_key("max-steps", "training budget in environment steps",
                  [](auto& c) -> auto& { return c.agent.max_steps; }),
        count_key("max-episode-steps", "episode truncation length",
                  [](auto& c) -> auto& { return c.agent.max_episode_steps; }),
        count_key("test-period", "steps between evaluations (0 = never)",
                  [](auto& c) -> auto& { return c.test_period; }),
        ConfigKey{"optimizer", {}, "optimizer (rmsprop only)", [](const RunConfig&) { return std::string("rmsprop"); },
                  [](RunConfig&, const std::string& s) {
                      if (s != "rmsprop") throw ConfigError("optimizer: only 'rmsprop' is supported, got '" + s + "'");
                  }},

        flag_key("dueling", "dueling value/advantage head", [](auto& c) -> auto& { return c.agent.dueling; }),
        flag_key("double", "double DQN targets", [](auto& c) -> auto& { return c.agent.double_q; }),
        real_key("priority-epsilon", "added to |td error| in priorities",
                 [](auto& c) -> auto& { return c.agent.priority_epsilon; }),
        real_key("rmsprop-decay", "RMSprop squared-gradient decay",
                 [](auto& c) -> auto& { return c.agent.optimizer.decay; }),
        real_key("rmsprop-epsilon", "RMSprop denominator epsilon",
                 [](auto& c) -> auto& { return c.agent.optimizer.epsilon; }),
        real_key("grad-clip", "global gradient norm limit (0 = off)",
                 [](auto& c) -> auto& { return c.agent.grad_clip; }),
        flag_key("huber", "Huber loss instead of squared error", [](auto& c) -> auto& { return c.agent.huber; }),
        flag_key("clip-rewards", "clip stored rewards to [-1, 1]",
                 [](auto& c) -> auto& { return c.agent.clip_rewards; }),
        text_key("env", "environment: catch|gridworld|tabular", [](auto& c) -> auto& { return c.env; }),
        count_key("env-size", "board size (0 = environment default)", [](auto& c) -> auto& { return c.env_size; }),
        text_key("arch", "network preset: atari|small|mlp|linear", [](auto& c) -> auto& { return c.arch; }),
        count_key("frame-size", "preprocessed frame side (0 = raw size)",
                  [](auto& c) -> auto& { return c.frame_size; }),
        count_key("seed", "master random seed", [](auto& c) -> auto& { return c.seed; }),
        count_key("eval-episodes", "episodes per evaluation", [](auto& c) -> auto& { return c.eval_episodes; }),
        count_key("checkpoint-period", "steps between checkpoints (0 = final only)",
                  [](auto& c) -> auto& { return c.checkpoint_period; }),
        flag_key("checkpoint-replay", "include replay memory in checkpoints",
                 [](auto& c) -> auto& { return c.checkpoint_replay; }),
        text_key("out-dir", "output directory", [](auto& c) -> auto& { return c.out_dir; }),
    };
    return keys;
}

inline const ConfigKey& find_key(const std::string& name) {
    for (const auto& k : config_keys()) {
        if (k.name == name) return k;
        for (const auto& a : k.aliases)
            if (a == name) return k;
    }
    throw ConfigError(name + ": unknown configuration key");
}

/// Semantic checks beyond parsing; throws ConfigError naming the field.
inline void validate(const RunConfig& c) {
    try {
        c.agent.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.frame_stack == 0) throw ConfigError("frame-stack: must be positive");
    if (c.eval_episodes == 0) throw ConfigError("eval-episodes: must be positive");
    if (c.env != "catch" && c.env != "gridworld" && c.env != "tabular")
        throw ConfigError("env: unknown environment '" + c.env + "' (catch|gridworld|tabular)");
    if (c.arch != "atari" && c.arch != "small" && c.arch != "mlp" && c.arch != "linear")
        throw ConfigError("arch: unknown preset '" + c.arch + "' (atari|small|mlp|linear)");
}

/// "key=value" lines for every key.
inline std::string dump_config(const RunConfig& c) {
    std::string out;
    for (const auto& k : config_keys()) out += k.name + "=" + k.get(c) + "\n";
    return out;
}

/// Applies "key=value" lines on top of `base`. Blank lines and lines starting
/// with '#' are ignored.
inline RunConfig apply_config_text(RunConfig base, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const auto key = trim(line.substr(0, eq));
        find_key(key).set(base, trim(line.substr(eq + 1)));
    }
    return base;
}

/// Precedence: overrides > config file text > preset > defaults.
inline RunConfig resolve_config(const std::string& preset, const std::string& file_text,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig c;
    if (preset == "desk")
        c = RunConfig::desk();
    else if (!preset.empty() && preset != "default")
        throw ConfigError("preset: unknown preset '" + preset + "' (default|desk)");
    c = apply_config_text(std::move(c), file_text);
    for (const auto& [k, v] : overrides) find_key(k).set(c, v);
    validate(c);
    return c;
}

}  // namespace qlearn::cli
