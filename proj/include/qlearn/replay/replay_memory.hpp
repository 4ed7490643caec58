#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlearn/core/rng.hpp"
#include "qlearn/replay/sum_tree.hpp"

namespace qlearn::replay {

template <typename T>
struct Transition {
    std::vector<T> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<T> next_state;
    bool terminal = false;
};

/// Non-owning view of a stored transition.
template <typename T>
struct TransitionView {
    std::span<const T> state;
    std::size_t action;
    double reward;
    std::span<const T> next_state;
    bool terminal;
};

struct PriorityConfig {
    double alpha = 0.6;
    double epsilon = 0.01;
};

/// Indices drawn from memory with their sampling probabilities and
/// importance-sampling weights (normalized so the batch maximum is 1).
struct SampleBatch {
    std::vector<std::size_t> indices;
    std::vector<double> probabilities;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return indices.size(); }
};

/// Fixed-capacity FIFO of transitions plus a sum tree over p_i^alpha.
///
/// Stacked observations are stored whole, once as state and once as
/// next_state. Storage grows on demand up to the capacity.
template <typename T>
class ReplayMemory {
public:
    ReplayMemory(std::size_t capacity, std::size_t state_size, PriorityConfig priority = {})
        : capacity_(capacity), state_size_(state_size), priority_(priority), tree_(capacity) {
        if (state_size == 0) throw std::invalid_argument("replay: state size must be positive");
        if (priority.alpha < 0.0) throw std::invalid_argument("replay: alpha must be >= 0");
        if (!(priority.epsilon > 0.0)) throw std::invalid_argument("replay: priority epsilon must be > 0");
    }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::size_t state_size() const { return state_size_; }
    [[nodiscard]] std::size_t cursor() const { return cursor_; }
    [[nodiscard]] const PriorityConfig& priority_config() const { return priority_; }
    [[nodiscard]] const SumTree& tree() const { return tree_; }
    /// Largest raw priority |delta| + eps seen so far (1 before any update).
    [[nodiscard]] double max_priority() const { return max_priority_; }

    /// Stores at the write cursor, evicting the oldest entry when full. The new
    /// entry gets the largest priority seen so far.
    std::size_t store(std::span<const T> state, std::size_t action, double reward, std::span<const T> next_state,
                      bool terminal) {
        if (state.size() != state_size_ || next_state.size() != state_size_)
            throw std::invalid_argument("replay: state has " + std::to_string(state.size()) + " values, expected " +
                                        std::to_string(state_size_));
        const std::size_t slot = cursor_;
        if (slot >= actions_.size()) {
            states_.resize((slot + 1) * state_size_);
            next_states_.resize((slot + 1) * state_size_);
            actions_.resize(slot + 1);
            rewards_.resize(slot + 1);
            terminals_.resize(slot + 1);
        }
        std::copy(state.begin(), state.end(), states_.begin() + static_cast<std::ptrdiff_t>(slot * state_size_));
        std::copy(next_state.begin(), next_state.end(),
                  next_states_.begin() + static_cast<std::ptrdiff_t>(slot * state_size_));
        actions_[slot] = action;
        rewards_[slot] = reward;
        terminals_[slot] = terminal ? 1 : 0;
        tree_.set(slot, std::pow(max_priority_, priority_.alpha));
        cursor_ = (cursor_ + 1) % capacity_;
        size_ = std::min(size_ + 1, capacity_);
        return slot;
    }

    std::size_t store(const Transition<T>& t) {
        return store(t.state, t.action, t.reward, t.next_state, t.terminal);
    }

    [[nodiscard]] TransitionView<T> at(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("replay: index " + std::to_string(i) + " out of range");
        const auto off = i * state_size_;
        return {std::span<const T>(states_).subspan(off, state_size_), actions_[i], rewards_[i],
                std::span<const T>(next_states_).subspan(off, state_size_), terminals_[i] != 0};
    }

    /// k independent uniform draws with replacement; every weight is 1.
    SampleBatch sample_uniform(std::size_t k, Rng& rng) const {
        if (size_ == 0) throw std::length_error("replay: cannot sample from empty memory");
        SampleBatch b;
        b.indices.reserve(k);
        for (std::size_t j = 0; j < k; ++j) b.indices.push_back(static_cast<std::size_t>(rng.uniform_int(size_)));
        b.probabilities.assign(k, 1.0 / static_cast<double>(size_));
        b.weights.assign(k, 1.0);
        return b;
    }

    /// Proportional sampling with P(i) = p_i^alpha / sum_k p_k^alpha. The total
    /// mass is split into k equal segments and one point is drawn uniformly in
    /// each. Weights are (N P(i))^-beta divided by the batch maximum.
    SampleBatch sample_prioritized(std::size_t k, double beta, Rng& rng) const {
        if (size_ == 0) throw std::length_error("replay: cannot sample from empty memory");
        if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("replay: beta must lie in [0, 1]");
        const double total = tree_.total();
        if (!(total > 0.0)) throw std::domain_error("replay: total priority is zero");
        SampleBatch b;
        b.indices.reserve(k);
        b.probabilities.reserve(k);
        b.weights.reserve(k);
        const double segment = total / static_cast<double>(k);
        const double n = static_cast<double>(size_);
        double max_w = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double mass = (static_cast<double>(j) + rng.uniform()) * segment;
            const std::size_t i = tree_.find(mass);
            const double p = tree_.leaf(i) / total;
            const double w = std::pow(n * p, -beta);
            b.indices.push_back(i);
            b.probabilities.push_back(p);
            b.weights.push_back(w);
            max_w = std::max(max_w, w);
        }
        for (auto& w : b.weights) w /= max_w;
        return b;
    }

    /// Sets p_i = |delta_i| + eps and stores p_i^alpha in the tree.
    void update_priorities(std::span<const std::size_t> indices, std::span<const double> td_errors) {
        if (indices.size() != td_errors.size())
            throw std::invalid_argument("replay: indices and td errors differ in length");
        for (std::size_t j = 0; j < indices.size(); ++j)
            if (indices[j] >= size_)
                throw std::out_of_range("replay: priority index " + std::to_string(indices[j]) + " out of range");
        for (std::size_t j = 0; j < indices.size(); ++j) {
            const double p = std::abs(td_errors[j]) + priority_.epsilon;
            if (!std::isfinite(p)) throw std::invalid_argument("replay: non-finite td error");
            max_priority_ = std::max(max_priority_, p);
            tree_.set(indices[j], std::pow(p, priority_.alpha));
        }
    }

    // Raw storage access for checkpointing.
    struct Raw {
        std::vector<T>* states;
        std::vector<T>* next_states;
        std::vector<std::size_t>* actions;
        std::vector<double>* rewards;
        std::vector<std::uint8_t>* terminals;
    };
    Raw raw() { return {&states_, &next_states_, &actions_, &rewards_, &terminals_}; }
    struct ConstRaw {
        const std::vector<T>* states;
        const std::vector<T>* next_states;
        const std::vector<std::size_t>* actions;
        const std::vector<double>* rewards;
        const std::vector<std::uint8_t>* terminals;
    };
    ConstRaw raw() const { return {&states_, &next_states_, &actions_, &rewards_, &terminals_}; }

    /// Restores bookkeeping after raw storage has been filled; leaf values are
    /// the stored p_i^alpha.
    void restore(std::size_t size, std::size_t cursor, double max_priority, std::span<const double> leaves) {
        if (size > capacity_ || cursor >= capacity_ || leaves.size() != size || actions_.size() != size)
            throw std::invalid_argument("replay: inconsistent restore");
        size_ = size;
        cursor_ = cursor;
        max_priority_ = max_priority;
        for (std::size_t i = 0; i < size; ++i) tree_.set(i, leaves[i]);
    }

private:
    std::size_t capacity_;
    std::size_t state_size_;
    PriorityConfig priority_;
    SumTree tree_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
    double max_priority_ = 1.0;
    std::vector<T> states_, next_states_;
    std::vector<std::size_t> actions_;
    std::vector<double> rewards_;
    std::vector<std::uint8_t> terminals_;
};

}  // namespace qlearn::replay
