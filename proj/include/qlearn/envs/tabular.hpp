#pragma once

#include <array>

#include "qlearn/envs/environment.hpp"

namespace qlearn::envs {

/// Five-state, two-action deterministic chain with a fully known
/// transition table, used as a ground-truth fixture. Observations are a
/// 1x5 one-hot row (255 at the current state).
///
///   action 0 moves left, action 1 moves right.
///   state 0, action 0: stays, reward 0.1
///   state 4, action 1: reward 1 and the episode terminates
///   every other transition: reward 0
class Tabular final : public Environment {
public:
    static constexpr std::size_t n_states = 5;
    static constexpr std::size_t n_actions = 2;

    struct Outcome {
        std::size_t next;
        double reward;
        bool terminal;
    };

    static constexpr std::array<std::array<Outcome, n_actions>, n_states> table{{
        {{{0, 0.1, false}, {1, 0.0, false}}},
        {{{0, 0.0, false}, {2, 0.0, false}}},
        {{{1, 0.0, false}, {3, 0.0, false}}},
        {{{2, 0.0, false}, {4, 0.0, false}}},
        {{{3, 0.0, false}, {4, 1.0, true}}},
    }};

    Tabular() { spec_ = {"tabular", n_actions, 1, n_states, 1, std::nullopt}; }

    const EnvSpec& spec() const override { return spec_; }

    Frame reset(std::uint64_t) override {
        state_ = 0;
        done_ = false;
        return render();
    }

    EnvStep step(std::size_t action) override {
        check_step(action);
        const auto& o = table[state_][action];
        state_ = o.next;
        done_ = o.terminal;
        return {render(), o.reward, o.terminal};
    }

    bool done() const override { return done_; }

    Frame render() const override {
        Frame f(1, n_states);
        f.at(0, state_) = 255;
        return f;
    }

    std::vector<std::int64_t> save_state() const override {
        return {static_cast<std::int64_t>(state_), done_ ? 1 : 0};
    }
    void load_state(const std::vector<std::int64_t>& s) override {
        if (s.size() != 2 || s[0] < 0 || s[0] >= static_cast<std::int64_t>(n_states))
            throw std::invalid_argument("tabular: bad saved state");
        state_ = static_cast<std::size_t>(s[0]);
        done_ = s[1] != 0;
    }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<Tabular>(*this); }

    [[nodiscard]] std::size_t state() const { return state_; }

private:
    EnvSpec spec_;
    std::size_t state_ = 0;
    bool done_ = true;
};

}  // namespace qlearn::envs
