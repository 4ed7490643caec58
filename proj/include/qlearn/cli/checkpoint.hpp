#pragma once

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "qlearn/agent/trainer.hpp"
#include "qlearn/cli/config_io.hpp"

// Checkpoint file layout (all integers little-endian):
//
//   "CYRL"            magic
//   u32               format version
//   section*          4-byte tag, u64 payload length, payload
//   u32               CRC-32 of every preceding byte
//
// Sections, in order:
//   CONF  configuration as UTF-8 "key=value" lines
//   PARM  u32 network count (online, target); per network u32 tensor count;
//         per tensor: u32 name length, name, u32 rank, u64 extents, f32 values
//   OPTM  u32 tensor count; per tensor u64 length, f32 accumulators
//   RNGS  u32 stream count (env, agent, replay); per stream u32 length, text
//   PROG  counters and the in-flight episode: u64 x6, f64 x4, bool byte,
//         environment state (u32 n, i64 x n), frame stack (u32 frames,
//         u64 length, f32 values each)
//   REPL  optional replay memory: u64 size, u64 cursor, u64 state size, f64 max priority,
//         f64 leaves, f32 states, f32 next states, u32 actions, f64 rewards,
//         u8 terminal flags

namespace qlearn::cli {

struct CheckpointError : std::runtime_error {
    enum class Kind { io, bad_magic, bad_crc, version_mismatch, malformed, architecture_mismatch };
    CheckpointError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
    Kind kind;
};

inline constexpr std::uint32_t checkpoint_version = 1;

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<float> values;
};

struct ReplaySnapshot {
    std::uint64_t size = 0, cursor = 0;
    double max_priority = 1.0;
    std::vector<double> leaves;
    std::vector<float> states, next_states;
    std::vector<std::uint32_t> actions;
    std::vector<double> rewards;
    std::vector<std::uint8_t> terminals;
};

/// Decoded checkpoint contents.
struct Checkpoint {
    std::string config_text;
    std::vector<std::vector<NamedTensor>> networks;  // online, target
    std::vector<std::vector<float>> optimizer;
    std::vector<std::string> rng_states;
    agent::Progress progress;
    std::vector<std::int64_t> env_state;
    std::vector<std::vector<float>> frames;
    std::optional<ReplaySnapshot> replay;

    [[nodiscard]] RunConfig config() const { return resolve_config("", config_text, {}); }
};

namespace detail {

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    template <typename F>
    void f32s(const F& values) {
        for (auto v : values) f32(static_cast<float>(v));
    }

    void section(const char tag[5], const Writer& payload) {
        bytes(std::string(tag, 4));
        u64(payload.buf_.size());
        buf_.insert(buf_.end(), payload.buf_.begin(), payload.buf_.end());
    }

    std::vector<std::uint8_t>& data() { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    Reader(const std::uint8_t* p, std::size_t n) : p_(p), end_(p + n) {}

    std::uint8_t u8() { return *take(1); }
    std::uint32_t u32() {
        const auto* b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto* b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        const auto* b = take(n);
        return std::string(reinterpret_cast<const char*>(b), n);
    }
    std::string str() { return bytes(u32()); }
    std::vector<float> f32s(std::uint64_t n) {
        check(n, 4);
        std::vector<float> v(n);
        for (auto& x : v) x = f32();
        return v;
    }

    Reader section(const char tag[5]) {
        const auto t = bytes(4);
        if (t != std::string(tag, 4))
            throw CheckpointError(CheckpointError::Kind::malformed, "checkpoint: expected section " +
                                                                        std::string(tag, 4) + ", found " + t);
        const auto n = u64();
        const auto* b = take(n);
        return Reader(b, n);
    }

    [[nodiscard]] bool at_end() const { return p_ == end_; }
    [[nodiscard]] std::uint64_t remaining() const { return static_cast<std::uint64_t>(end_ - p_); }
    [[nodiscard]] std::string peek_tag() const {
        if (end_ - p_ < 4) return {};
        return std::string(reinterpret_cast<const char*>(p_), 4);
    }

    /// Guards element counts read from the file before allocating.
    void check(std::uint64_t count, std::uint64_t unit) const {
        if (unit != 0 && count > static_cast<std::uint64_t>(end_ - p_) / unit)
            throw CheckpointError(CheckpointError::Kind::malformed, "checkpoint: truncated data");
    }

private:
    const std::uint8_t* take(std::size_t n) {
        if (static_cast<std::size_t>(end_ - p_) < n)
            throw CheckpointError(CheckpointError::Kind::malformed, "checkpoint: truncated data");
        const auto* b = p_;
        p_ += n;
        return b;
    }

    const std::uint8_t* p_;
    const std::uint8_t* end_;
};

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = ::crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

template <typename T>
std::vector<NamedTensor> snapshot_params(const nn::Network<T>& net) {
    std::vector<NamedTensor> out;
    for (const auto* p : net.params()) {
        auto add = [&](const nn::Tensor<T>& t, const std::string& suffix) {
            NamedTensor nt{p->name + suffix, {}, {}};
            for (auto e : t.shape()) nt.shape.push_back(e);
            nt.values.assign(t.values().begin(), t.values().end());
            out.push_back(std::move(nt));
        };
        add(p->weight, ".weight");
        if (p->bias) add(*p->bias, ".bias");
    }
    return out;
}

template <typename T>
void restore_params(nn::Network<T>& net, const std::vector<NamedTensor>& saved, const std::string& which) {
    std::vector<nn::Tensor<T>*> tensors;
    std::vector<std::string> names;
    for (auto* p : net.params()) {
        tensors.push_back(&p->weight);
        names.push_back(p->name + ".weight");
        if (p->bias) {
            tensors.push_back(&*p->bias);
            names.push_back(p->name + ".bias");
        }
    }
    auto mismatch = [&](const std::string& why) {
        throw CheckpointError(CheckpointError::Kind::architecture_mismatch,
                              "checkpoint: " + which + " network architecture mismatch: " + why);
    };
    if (saved.size() != tensors.size())
        mismatch("checkpoint has " + std::to_string(saved.size()) + " parameter tensors, network has " +
                 std::to_string(tensors.size()));
    for (std::size_t i = 0; i < saved.size(); ++i) {
        std::vector<std::uint64_t> shape(tensors[i]->shape().begin(), tensors[i]->shape().end());
        if (saved[i].name != names[i] || saved[i].shape != shape)
            mismatch("'" + saved[i].name + "' does not match '" + names[i] + "' " + nn::to_string(tensors[i]->shape()));
    }
    for (std::size_t i = 0; i < saved.size(); ++i)
        std::transform(saved[i].values.begin(), saved[i].values.end(), tensors[i]->values().begin(),
                       [](float v) { return static_cast<T>(v); });
}

}  // namespace detail

/// Captures the full training state; replay contents only if requested.
template <typename T>
Checkpoint capture(const agent::Trainer<T>& tr, bool include_replay) {
    Checkpoint c;
    c.config_text = dump_config(tr.config());
    c.networks.push_back(detail::snapshot_params(tr.learner().online()));
    c.networks.push_back(detail::snapshot_params(tr.learner().target().network()));
    for (const auto& acc : tr.learner().optimizer().accumulators())
        c.optimizer.emplace_back(acc.begin(), acc.end());
    c.rng_states = {tr.env_rng().state(), tr.agent_rng().state(), tr.replay_rng().state()};
    c.progress = tr.progress();
    c.env_state = tr.env().save_state();
    for (const auto& f : tr.frame_stack().frames()) c.frames.emplace_back(f.begin(), f.end());
    if (include_replay) {
        auto& mem = tr.memory();
        ReplaySnapshot r;
        r.size = mem.size();
        r.cursor = mem.cursor();
        r.max_priority = mem.max_priority();
        for (std::size_t i = 0; i < mem.size(); ++i) r.leaves.push_back(mem.tree().leaf(i));
        auto raw = mem.raw();
        r.states.assign(raw.states->begin(), raw.states->end());
        r.next_states.assign(raw.next_states->begin(), raw.next_states->end());
        for (auto a : *raw.actions) r.actions.push_back(static_cast<std::uint32_t>(a));
        r.rewards = *raw.rewards;
        r.terminals = *raw.terminals;
        c.replay = std::move(r);
    }
    return c;
}

/// Loads parameters, optimizer, rng streams, counters and (if present) the
/// replay memory into a trainer built from a compatible configuration.
template <typename T>
void restore(agent::Trainer<T>& tr, const Checkpoint& c) {
    using K = CheckpointError::Kind;
    if (c.networks.size() != 2) throw CheckpointError(K::malformed, "checkpoint: expected two networks");
    detail::restore_params(tr.learner().online(), c.networks[0], "online");
    detail::restore_params(tr.learner().target().network_for_restore(), c.networks[1], "target");
    auto& acc = tr.learner().optimizer().accumulators();
    if (c.optimizer.size() != acc.size())
        throw CheckpointError(K::architecture_mismatch, "checkpoint: optimizer state does not match network");
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (c.optimizer[i].size() != acc[i].size())
            throw CheckpointError(K::architecture_mismatch, "checkpoint: optimizer state does not match network");
        std::transform(c.optimizer[i].begin(), c.optimizer[i].end(), acc[i].begin(),
                       [](float v) { return static_cast<T>(v); });
    }
    if (c.rng_states.size() != 3) throw CheckpointError(K::malformed, "checkpoint: expected three rng streams");
    tr.env_rng().set_state(c.rng_states[0]);
    tr.agent_rng().set_state(c.rng_states[1]);
    tr.replay_rng().set_state(c.rng_states[2]);
    tr.progress() = c.progress;
    tr.env().load_state(c.env_state);
    if (!c.frames.empty()) {
        auto& st = tr.frame_stack();
        if (c.frames.size() != st.depth())
            throw CheckpointError(K::architecture_mismatch, "checkpoint: frame stack depth mismatch");
        for (std::size_t k = 0; k < c.frames.size(); ++k) {
            std::vector<T> f(c.frames[k].begin(), c.frames[k].end());
            if (k == 0)
                st.reset_processed(std::move(f));
            else
                st.push_processed(std::move(f));
        }
    }
    if (c.replay) {
        const auto& r = *c.replay;
        auto& mem = tr.memory();
        const auto n = static_cast<std::size_t>(r.size);
        if (r.states.size() != n * mem.state_size() || r.next_states.size() != n * mem.state_size() ||
            r.actions.size() != n || r.rewards.size() != n || r.terminals.size() != n || r.leaves.size() != n)
            throw CheckpointError(K::architecture_mismatch, "checkpoint: replay memory does not match configuration");
        auto raw = mem.raw();
        raw.states->assign(r.states.begin(), r.states.end());
        raw.next_states->assign(r.next_states.begin(), r.next_states.end());
        raw.actions->assign(r.actions.begin(), r.actions.end());
        *raw.rewards = r.rewards;
        *raw.terminals = r.terminals;
        mem.restore(n, static_cast<std::size_t>(r.cursor), r.max_priority, r.leaves);
    }
}

inline std::vector<std::uint8_t> encode(const Checkpoint& c) {
    using detail::Writer;
    Writer out;
    out.bytes("CYRL");
    out.u32(checkpoint_version);

    Writer conf;
    conf.bytes(c.config_text);
    out.section("CONF", conf);

    Writer parm;
    parm.u32(static_cast<std::uint32_t>(c.networks.size()));
    for (const auto& net : c.networks) {
        parm.u32(static_cast<std::uint32_t>(net.size()));
        for (const auto& t : net) {
            parm.str(t.name);
            parm.u32(static_cast<std::uint32_t>(t.shape.size()));
            for (auto e : t.shape) parm.u64(e);
            parm.f32s(t.values);
        }
    }
    out.section("PARM", parm);

    Writer optm;
    optm.u32(static_cast<std::uint32_t>(c.optimizer.size()));
    for (const auto& a : c.optimizer) {
        optm.u64(a.size());
        optm.f32s(a);
    }
    out.section("OPTM", optm);

    Writer rngs;
    rngs.u32(static_cast<std::uint32_t>(c.rng_states.size()));
    for (const auto& s : c.rng_states) rngs.str(s);
    out.section("RNGS", rngs);

    Writer prog;
    const auto& p = c.progress;
    for (auto v : {p.step, p.episode, p.optimizer_steps, p.evaluations, p.episode_steps, p.episode_learn_steps})
        prog.u64(v);
    for (auto v : {p.episode_return, p.episode_td_sum, p.episode_loss_sum, p.last_epsilon}) prog.f64(v);
    prog.u8(p.in_episode ? 1 : 0);
    prog.u32(static_cast<std::uint32_t>(c.env_state.size()));
    for (auto v : c.env_state) prog.i64(v);
    prog.u32(static_cast<std::uint32_t>(c.frames.size()));
    for (const auto& f : c.frames) {
        prog.u64(f.size());
        prog.f32s(f);
    }
    out.section("PROG", prog);

    if (c.replay) {
        const auto& r = *c.replay;
        Writer repl;
        repl.u64(r.size);
        repl.u64(r.cursor);
        repl.u64(r.size == 0 ? 0 : r.states.size() / r.size);
        repl.f64(r.max_priority);
        for (double v : r.leaves) repl.f64(v);
        repl.f32s(r.states);
        repl.f32s(r.next_states);
        for (auto a : r.actions) repl.u32(a);
        for (double v : r.rewards) repl.f64(v);
        for (auto t : r.terminals) repl.u8(t);
        out.section("REPL", repl);
    }

    auto& bytes = out.data();
    const auto crc = detail::crc32_of(bytes.data(), bytes.size());
    out.u32(crc);
    return std::move(out.data());
}

/// Validates magic, checksum and version before decoding anything.
inline Checkpoint decode(const std::vector<std::uint8_t>& bytes) {
    using K = CheckpointError::Kind;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "CYRL", 4) != 0)
        throw CheckpointError(K::bad_magic, "checkpoint: bad magic bytes (not a checkpoint file)");
    detail::Reader tail(bytes.data() + bytes.size() - 4, 4);
    const auto stored = tail.u32();
    if (stored != detail::crc32_of(bytes.data(), bytes.size() - 4))
        throw CheckpointError(K::bad_crc, "checkpoint: CRC mismatch (file is corrupt)");
    detail::Reader in(bytes.data() + 4, bytes.size() - 8);
    const auto version = in.u32();
    if (version != checkpoint_version)
        throw CheckpointError(K::version_mismatch, "checkpoint: format version " + std::to_string(version) +
                                                       " is not supported (expected " +
                                                       std::to_string(checkpoint_version) + ")");
    Checkpoint c;
    {
        auto s = in.section("CONF");
        std::string text;
        while (!s.at_end()) text += s.bytes(1);
        c.config_text = std::move(text);
    }
    {
        auto s = in.section("PARM");
        const auto nets = s.u32();
        for (std::uint32_t n = 0; n < nets; ++n) {
            std::vector<NamedTensor> net;
            const auto count = s.u32();
            for (std::uint32_t i = 0; i < count; ++i) {
                NamedTensor t;
                t.name = s.str();
                const auto rank = s.u32();
                s.check(rank, 8);
                std::uint64_t elems = 1;
                for (std::uint32_t r = 0; r < rank; ++r) {
                    t.shape.push_back(s.u64());
                    elems *= t.shape.back();
                }
                t.values = s.f32s(elems);
                net.push_back(std::move(t));
            }
            c.networks.push_back(std::move(net));
        }
    }
    {
        auto s = in.section("OPTM");
        const auto count = s.u32();
        for (std::uint32_t i = 0; i < count; ++i) c.optimizer.push_back(s.f32s(s.u64()));
    }
    {
        auto s = in.section("RNGS");
        const auto count = s.u32();
        for (std::uint32_t i = 0; i < count; ++i) c.rng_states.push_back(s.str());
    }
    {
        auto s = in.section("PROG");
        auto& p = c.progress;
        for (auto* v : {&p.step, &p.episode, &p.optimizer_steps, &p.evaluations, &p.episode_steps,
                        &p.episode_learn_steps})
            *v = s.u64();
        for (auto* v : {&p.episode_return, &p.episode_td_sum, &p.episode_loss_sum, &p.last_epsilon}) *v = s.f64();
        p.in_episode = s.u8() != 0;
        const auto n = s.u32();
        s.check(n, 8);
        for (std::uint32_t i = 0; i < n; ++i) c.env_state.push_back(s.i64());
        const auto frames = s.u32();
        for (std::uint32_t i = 0; i < frames; ++i) c.frames.push_back(s.f32s(s.u64()));
    }
    if (in.peek_tag() == "REPL") {
        auto s = in.section("REPL");
        ReplaySnapshot r;
        r.size = s.u64();
        r.cursor = s.u64();
        const auto state_size = s.u64();
        s.check(r.size, 1);
        s.check(state_size, 1);
        r.max_priority = s.f64();
        s.check(r.size, 8);
        for (std::uint64_t i = 0; i < r.size; ++i) r.leaves.push_back(s.f64());
        r.states = s.f32s(r.size * state_size);
        r.next_states = s.f32s(r.size * state_size);
        for (std::uint64_t i = 0; i < r.size; ++i) r.actions.push_back(s.u32());
        for (std::uint64_t i = 0; i < r.size; ++i) r.rewards.push_back(s.f64());
        for (std::uint64_t i = 0; i < r.size; ++i) r.terminals.push_back(s.u8());
        c.replay = std::move(r);
    }
    if (!in.at_end()) throw CheckpointError(K::malformed, "checkpoint: trailing data after last section");
    return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    const auto bytes = encode(c);
    const auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + tmp + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: write to " + tmp + " failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot rename " + tmp + " to " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::io, "checkpoint: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

}  // namespace qlearn::cli
