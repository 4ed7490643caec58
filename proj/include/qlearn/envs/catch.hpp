#pragma once

#include <algorithm>

#include "qlearn/core/rng.hpp"
#include "qlearn/envs/environment.hpp"

namespace qlearn::envs {

/// A ball drops one row per step from a random column of the top row. A
/// one-pixel paddle on the bottom row moves left, stays, or moves right.
/// When the ball reaches the bottom row the episode ends with +1 if the
/// paddle is under it and -1 otherwise, so every episode lasts size-1 steps.
class Catch final : public Environment {
public:
    enum Action : std::size_t { left = 0, stay = 1, right = 2 };

    explicit Catch(std::size_t size = 24) : size_(size) {
        if (size < 3) throw std::invalid_argument("catch: board size must be at least 3");
        spec_ = {"catch", 3, size, size, 1, 1.0};
    }

    const EnvSpec& spec() const override { return spec_; }

    Frame reset(std::uint64_t seed) override {
        Rng rng(seed);
        ball_col_ = static_cast<std::int64_t>(rng.uniform_int(size_));
        ball_row_ = 0;
        paddle_ = static_cast<std::int64_t>(size_ / 2);
        done_ = false;
        return render();
    }

    EnvStep step(std::size_t action) override {
        check_step(action);
        paddle_ += static_cast<std::int64_t>(action) - 1;
        paddle_ = std::clamp<std::int64_t>(paddle_, 0, static_cast<std::int64_t>(size_) - 1);
        ++ball_row_;
        EnvStep out;
        if (ball_row_ == static_cast<std::int64_t>(size_) - 1) {
            done_ = true;
            out.terminal = true;
            out.reward = paddle_ == ball_col_ ? 1.0 : -1.0;
        }
        out.observation = render();
        return out;
    }

    bool done() const override { return done_; }

    Frame render() const override {
        Frame f(size_, size_);
        f.at(static_cast<std::size_t>(ball_row_), static_cast<std::size_t>(ball_col_)) = 255;
        f.at(size_ - 1, static_cast<std::size_t>(paddle_)) = 255;
        return f;
    }

    std::vector<std::int64_t> save_state() const override { return {ball_row_, ball_col_, paddle_, done_ ? 1 : 0}; }
    void load_state(const std::vector<std::int64_t>& s) override {
        if (s.size() != 4) throw std::invalid_argument("catch: bad saved state");
        ball_row_ = s[0];
        ball_col_ = s[1];
        paddle_ = s[2];
        done_ = s[3] != 0;
    }

    std::unique_ptr<Environment> clone() const override { return std::make_unique<Catch>(*this); }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] std::int64_t ball_row() const { return ball_row_; }
    [[nodiscard]] std::int64_t ball_col() const { return ball_col_; }
    [[nodiscard]] std::int64_t paddle() const { return paddle_; }

private:
    std::size_t size_;
    EnvSpec spec_;
    std::int64_t ball_row_ = 0, ball_col_ = 0, paddle_ = 0;
    bool done_ = true;
};

}  // namespace qlearn::envs
