#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qlearn {

/// Seeded random stream. Distributions are computed here rather than with
/// the <random> distribution objects so that draws are identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Derives an independent child stream; `stream` names the consumer so
    /// that adding draws on one stream never shifts another.
    [[nodiscard]] static Rng derive(std::uint64_t master, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x9e3779b9u};
        Rng r;
        r.engine_.seed(seq);
        return r;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), unbiased (rejection on the top range).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    [[nodiscard]] std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
        if (is.fail()) throw std::runtime_error("rng: malformed state");
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

/// Stream identifiers used to split the master seed.
enum class Stream : std::uint64_t { init = 1, env = 2, agent = 3, replay = 4, eval = 5 };

inline Rng derive(std::uint64_t master, Stream s) { return Rng::derive(master, static_cast<std::uint64_t>(s)); }

}  // namespace qlearn
