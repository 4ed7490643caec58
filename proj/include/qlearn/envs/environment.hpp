#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlearn::envs {

/// Raw 8-bit image, row-major, channel-last.
struct Frame {
    std::size_t height = 0, width = 0, channels = 1;
    std::vector<std::uint8_t> pixels;

    Frame() = default;
    Frame(std::size_t h, std::size_t w, std::size_t c = 1) : height(h), width(w), channels(c), pixels(h * w * c, 0) {}

    std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch = 0) { return pixels[(y * width + x) * channels + ch]; }
    std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch = 0) const {
        return pixels[(y * width + x) * channels + ch];
    }
    friend bool operator==(const Frame&, const Frame&) = default;
};

struct EnvStep {
    Frame observation;
    double reward = 0.0;
    bool terminal = false;
};

struct EnvSpec {
    std::string name;
    std::size_t n_actions = 0;
    std::size_t frame_height = 0, frame_width = 0, frame_channels = 1;
    /// Best achievable episode return, when known.
    std::optional<double> optimal_return;
};

/// Raised by step() on a finished episode.
struct EnvFault : std::logic_error {
    using std::logic_error::logic_error;
};

class Environment {
public:
    virtual ~Environment() = default;

    [[nodiscard]] virtual const EnvSpec& spec() const = 0;
    /// Starts a new episode; the layout of the episode is a function of `seed`.
    virtual Frame reset(std::uint64_t seed) = 0;
    virtual EnvStep step(std::size_t action) = 0;
    [[nodiscard]] virtual bool done() const = 0;
    [[nodiscard]] virtual Frame render() const = 0;

    /// Complete mutable state as integers, for checkpoints.
    [[nodiscard]] virtual std::vector<std::int64_t> save_state() const = 0;
    virtual void load_state(const std::vector<std::int64_t>& s) = 0;

    [[nodiscard]] virtual std::unique_ptr<Environment> clone() const = 0;

protected:
    void check_step(std::size_t action) const {
        if (done()) throw EnvFault(spec().name + ": step called on a finished episode");
        if (action >= spec().n_actions)
            throw std::out_of_range(spec().name + ": action " + std::to_string(action) + " out of range");
    }
};

}  // namespace qlearn::envs
