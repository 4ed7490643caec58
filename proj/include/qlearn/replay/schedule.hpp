#pragma once

#include <cstdint>

namespace qlearn {

/// Linear interpolation from `start` (step 0) to `end` (step `end_step`),
/// held at `end` afterwards.
struct LinearSchedule {
    double start = 0.0;
    double end = 0.0;
    std::uint64_t end_step = 0;

    [[nodiscard]] double at(std::uint64_t step) const {
        if (step >= end_step) return end;
        const double frac = static_cast<double>(step) / static_cast<double>(end_step);
        return start + (end - start) * frac;
    }
};

inline double anneal_beta(std::uint64_t step, const LinearSchedule& s) { return s.at(step); }
inline double anneal_epsilon(std::uint64_t step, const LinearSchedule& s) { return s.at(step); }

}  // namespace qlearn
