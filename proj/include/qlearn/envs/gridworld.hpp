#pragma once

#include <algorithm>
#include <utility>

#include "qlearn/envs/environment.hpp"

namespace qlearn::envs {

/// Deterministic maze on a square grid. The agent starts in the top-left
/// cell and gets +1 on entering the bottom-right goal, which ends the
/// episode. Moving into a wall or off the board leaves the agent in place.
///
/// Rendering: agent 255, goal 128, walls 64, free cells 0.
class GridWorld final : public Environment {
public:
    enum Action : std::size_t { up = 0, right = 1, down = 2, left = 3 };
    using Cell = std::pair<std::int64_t, std::int64_t>;  // row, col

    explicit GridWorld(std::size_t size = 8) : size_(static_cast<std::int64_t>(size)) {
        if (size < 2) throw std::invalid_argument("gridworld: size must be at least 2");
        spec_ = {"gridworld", 4, size, size, 1, 1.0};
        // Interior walls that leave the border corridors free.
        for (Cell c : {Cell{1, 1}, Cell{1, 2}, Cell{2, 5}, Cell{3, 5}, Cell{4, 1}, Cell{4, 2}, Cell{5, 4}, Cell{6, 6}})
            if (c.first < size_ - 1 && c.second < size_ - 1 && c.first > 0 && c.second > 0) walls_.push_back(c);
        goal_ = {size_ - 1, size_ - 1};
    }

    const EnvSpec& spec() const override { return spec_; }

    Frame reset(std::uint64_t) override {
        agent_ = {0, 0};
        done_ = false;
        return render();
    }

    EnvStep step(std::size_t action) override {
        check_step(action);
        static constexpr std::int64_t dr[] = {-1, 0, 1, 0};
        static constexpr std::int64_t dc[] = {0, 1, 0, -1};
        Cell next{agent_.first + dr[action], agent_.second + dc[action]};
        if (next.first >= 0 && next.first < size_ && next.second >= 0 && next.second < size_ && !is_wall(next))
            agent_ = next;
        EnvStep out;
        if (agent_ == goal_) {
            done_ = true;
            out.terminal = true;
            out.reward = 1.0;
        }
        out.observation = render();
        return out;
    }

    bool done() const override { return done_; }

    Frame render() const override {
        Frame f(static_cast<std::size_t>(size_), static_cast<std::size_t>(size_));
        for (auto [r, c] : walls_) f.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 64;
        f.at(static_cast<std::size_t>(goal_.first), static_cast<std::size_t>(goal_.second)) = 128;
        f.at(static_cast<std::size_t>(agent_.first), static_cast<std::size_t>(agent_.second)) = 255;
        return f;
    }

    std::vector<std::int64_t> save_state() const override { return {agent_.first, agent_.second, done_ ? 1 : 0}; }
    void load_state(const std::vector<std::int64_t>& s) override {
        if (s.size() != 3) throw std::invalid_argument("gridworld: bad saved state");
        agent_ = {s[0], s[1]};
        done_ = s[2] != 0;
    }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<GridWorld>(*this); }

    [[nodiscard]] bool is_wall(Cell c) const { return std::find(walls_.begin(), walls_.end(), c) != walls_.end(); }
    [[nodiscard]] Cell agent() const { return agent_; }
    [[nodiscard]] Cell goal() const { return goal_; }
    [[nodiscard]] std::int64_t size() const { return size_; }

private:
    std::int64_t size_;
    EnvSpec spec_;
    std::vector<Cell> walls_;
    Cell goal_{0, 0};
    Cell agent_{0, 0};
    bool done_ = true;
};

}  // namespace qlearn::envs
