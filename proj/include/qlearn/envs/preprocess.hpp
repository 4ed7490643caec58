#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "qlearn/envs/environment.hpp"

namespace qlearn::envs {

/// Converts a raw frame to grayscale and resizes it to out_h x out_w with
/// bilinear interpolation, returning values in [0, 1].
///
/// Grayscale uses ITU-R BT.601 luma, 0.299 R + 0.587 G + 0.114 B; frames with
/// fewer than three channels use channel 0 as is. Resampling uses half-pixel
/// centers: output pixel x reads source coordinate
///     sx = (x + 0.5) * in_w / out_w - 0.5
/// clamped to [0, in_w - 1], blending floor(sx) and floor(sx)+1 by the
/// fractional part (likewise for rows). Equal sizes are an exact copy.
template <typename T>
std::vector<T> preprocess_frame(const Frame& f, std::size_t out_h, std::size_t out_w) {
    if (f.height == 0 || f.width == 0 || f.channels == 0 || out_h == 0 || out_w == 0)
        throw std::invalid_argument("preprocess: empty frame or target size");
    std::vector<double> gray(f.height * f.width);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const auto* px = &f.pixels[i * f.channels];
        gray[i] = f.channels >= 3 ? 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] : static_cast<double>(px[0]);
    }

    struct Tap {
        std::size_t lo, hi;
        double frac;
    };
    auto taps = [](std::size_t in, std::size_t out) {
        std::vector<Tap> t(out);
        const double scale = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t i = 0; i < out; ++i) {
            double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(in - 1));
            const auto lo = static_cast<std::size_t>(std::floor(s));
            t[i] = {lo, std::min(lo + 1, in - 1), s - static_cast<double>(lo)};
        }
        return t;
    };
    const auto ty = taps(f.height, out_h);
    const auto tx = taps(f.width, out_w);

    std::vector<T> out(out_h * out_w);
    for (std::size_t y = 0; y < out_h; ++y) {
        const double* r0 = &gray[ty[y].lo * f.width];
        const double* r1 = &gray[ty[y].hi * f.width];
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto& c = tx[x];
            const double top = r0[c.lo] + (r0[c.hi] - r0[c.lo]) * c.frac;
            const double bot = r1[c.lo] + (r1[c.hi] - r1[c.lo]) * c.frac;
            const double v = top + (bot - top) * ty[y].frac;
            out[y * out_w + x] = static_cast<T>(std::clamp(v / 255.0, 0.0, 1.0));
        }
    }
    return out;
}

/// Keeps the most recent `depth` preprocessed frames and exposes them as one
/// h x w x depth channel-last tensor, oldest in channel 0 and newest in the
/// last channel.
template <typename T>
class FrameStack {
public:
    FrameStack(std::size_t height, std::size_t width, std::size_t depth = 4)
        : height_(height), width_(width), depth_(depth) {
        if (height == 0 || width == 0 || depth == 0) throw std::invalid_argument("frame stack: zero dimension");
    }

    [[nodiscard]] std::size_t height() const { return height_; }
    [[nodiscard]] std::size_t width() const { return width_; }
    [[nodiscard]] std::size_t depth() const { return depth_; }
    [[nodiscard]] std::size_t state_size() const { return height_ * width_ * depth_; }

    /// Clears history and fills every slot with `frame`.
    const std::vector<T>& reset(const Frame& raw) { return reset_processed(preprocess_frame<T>(raw, height_, width_)); }

    const std::vector<T>& reset_processed(std::vector<T> frame) {
        check(frame);
        frames_.assign(depth_, frame);
        return rebuild();
    }

    const std::vector<T>& push(const Frame& raw) { return push_processed(preprocess_frame<T>(raw, height_, width_)); }

    /// Appends a frame; before reset, the first frame is repeated to fill.
    const std::vector<T>& push_processed(std::vector<T> frame) {
        check(frame);
        if (frames_.empty()) return reset_processed(std::move(frame));
        frames_.pop_front();
        frames_.push_back(std::move(frame));
        return rebuild();
    }

    [[nodiscard]] const std::vector<T>& state() const { return stacked_; }
    [[nodiscard]] const std::deque<std::vector<T>>& frames() const { return frames_; }

private:
    void check(const std::vector<T>& frame) const {
        if (frame.size() != height_ * width_) throw std::invalid_argument("frame stack: frame size mismatch");
    }

    const std::vector<T>& rebuild() {
        stacked_.resize(state_size());
        for (std::size_t k = 0; k < depth_; ++k) {
            const auto& fr = frames_[k];
            for (std::size_t p = 0; p < height_ * width_; ++p) stacked_[p * depth_ + k] = fr[p];
        }
        return stacked_;
    }

    std::size_t height_, width_, depth_;
    std::deque<std::vector<T>> frames_;
    std::vector<T> stacked_;
};

}  // namespace qlearn::envs
