#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlearn::replay {

/// Complete binary tree of partial sums over `capacity` non-negative leaves.
/// Leaves are padded to a power of two; padding leaves hold 0. Node 1 is the
/// root and node n has children 2n and 2n+1.
///
/// Internal nodes are recomputed from their children on every update rather
/// than adjusted by deltas, so no rounding drift builds up.
class SumTree {
public:
    explicit SumTree(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("SumTree: capacity must be positive");
        leaves_ = std::bit_ceil(capacity);
        nodes_.assign(2 * leaves_, 0.0);
    }

    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] double total() const { return nodes_[1]; }
    [[nodiscard]] double leaf(std::size_t i) const { return nodes_.at(leaves_ + check(i)); }

    void set(std::size_t i, double value) {
        if (!(value >= 0.0) || !std::isfinite(value))
            throw std::invalid_argument("SumTree: leaf value must be finite and non-negative");
        std::size_t n = leaves_ + check(i);
        nodes_[n] = value;
        for (n /= 2; n >= 1; n /= 2) nodes_[n] = nodes_[2 * n] + nodes_[2 * n + 1];
    }

    /// Index of the leaf whose cumulative interval [c_{i-1}, c_i) contains
    /// `mass`. Values at or beyond total() map to the last leaf with mass.
    [[nodiscard]] std::size_t find(double mass) const {
        if (!(total() > 0.0)) throw std::domain_error("SumTree: total priority is zero");
        mass = std::clamp(mass, 0.0, total());
        std::size_t n = 1;
        while (n < leaves_) {
            const std::size_t left = 2 * n;
            if (mass < nodes_[left] || !(nodes_[left + 1] > 0.0)) {
                n = left;
            } else {
                mass -= nodes_[left];
                n = left + 1;
            }
        }
        return n - leaves_;
    }

    /// Largest relative difference between an internal node and the sum of
    /// its children.
    [[nodiscard]] double max_internal_error() const {
        double worst = 0.0;
        for (std::size_t n = 1; n < leaves_; ++n) {
            const double expect = nodes_[2 * n] + nodes_[2 * n + 1];
            const double err = std::abs(nodes_[n] - expect) / std::max(std::abs(expect), 1e-300);
            if (expect != nodes_[n]) worst = std::max(worst, err);
        }
        return worst;
    }

    /// Raw node array (index 0 unused), for verification.
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] std::size_t padded_leaves() const { return leaves_; }

private:
    std::size_t check(std::size_t i) const {
        if (i >= capacity_)
            throw std::out_of_range("SumTree: leaf " + std::to_string(i) + " out of range " +
                                    std::to_string(capacity_));
        return i;
    }

    std::size_t capacity_;
    std::size_t leaves_;
    std::vector<double> nodes_;
};

}  // namespace qlearn::replay
