// Acceptance checks. Prints one PASS/FAIL line per criterion (WARN for the
// soft ablation-ordering check) and exits non-zero if any hard check fails.
//
//   acceptance            run everything
//   acceptance 1 3 10     run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <unistd.h>

#include "qlearn/cli/commands.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace qlearn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    enum class Kind { pass, fail, warn } kind;
    std::string detail;
};

Verdict fail(std::string d) { return {Verdict::Kind::fail, std::move(d)}; }
Verdict check(bool ok, std::string d) { return {ok ? Verdict::Kind::pass : Verdict::Kind::fail, std::move(d)}; }

template <typename... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1 ------------------------------------------------------------------

Verdict gradients() {
    const auto t0 = Clock::now();
    using nn::LayerKind;
    gradcheck::Result all;
    std::string parts;
    std::uint64_t seed = 1000;
    for (auto [kind, name] : {std::pair{LayerKind::linear, "linear"}, {LayerKind::convolution, "conv"},
                              {LayerKind::relu, "relu"}, {LayerKind::dueling_head, "dueling"}}) {
        const auto r = gradcheck::layer_kind(kind, 10, seed++);
        parts += fmt("%s %.1e, ", name, r.max_rel);
        all.merge(r);
    }
    const auto net = gradcheck::small_network(10, seed);
    parts += fmt("network %.1e", net.max_rel);
    all.merge(net);
    const double secs = seconds_since(t0);
    return check(all.max_rel < 1e-4 && secs < 60,
                 fmt("max rel error %.2e (%s) over %zu instances, %.1f s", all.max_rel, parts.c_str(),
                     all.instances, secs));
}

// ---- 2 ------------------------------------------------------------------

Verdict shapes() {
    auto net = nn::build_network<float>(nn::Architecture::atari(), {84, 84, 4}, 4, false);
    const auto& s = net.shapes();
    const std::vector<nn::Shape> want{{20, 20, 32}, {9, 9, 64}, {7, 7, 64}, {512}, {4}};
    const std::vector<nn::Shape> got{s[1], s[3], s[5], s[7], s[9]};
    auto show = [](const nn::Shape& x) {
        std::string o;
        for (auto e : x) o += (o.empty() ? "" : "x") + std::to_string(e);
        return o;
    };
    std::string d;
    for (const auto& x : got) d += (d.empty() ? "" : " / ") + show(x);
    return check(got == want && s.size() == 10, d);
}

// ---- 3 ------------------------------------------------------------------

replay::ReplayMemory<float> memory_with(const std::vector<double>& raw, double alpha) {
    replay::ReplayMemory<float> m(raw.size(), 1, {alpha, 0.01});
    for (std::size_t i = 0; i < raw.size(); ++i) m.store(std::vector<float>{0.0f}, 0, 0.0, std::vector<float>{0.0f}, false);
    std::vector<std::size_t> idx(raw.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> deltas(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) deltas[i] = raw[i] - 0.01;  // p = |delta| + 0.01
    m.update_priorities(idx, deltas);
    return m;
}

std::vector<double> frequencies(const replay::ReplayMemory<float>& m, std::size_t draws, Rng& rng) {
    std::vector<double> f(m.size(), 0.0);
    const std::size_t batch = 32;
    for (std::size_t d = 0; d < draws / batch; ++d)
        for (auto i : m.sample_prioritized(batch, 0.4, rng).indices) f[i] += 1.0;
    for (auto& v : f) v /= static_cast<double>(draws / batch * batch);
    return f;
}

Verdict sampling() {
    const auto t0 = Clock::now();
    Rng rng(303);
    double worst_l1 = 0.0;
    for (double alpha : {0.6, 1.0})
        for (int v = 0; v < 20; ++v) {
            std::vector<double> raw(64);
            for (auto& p : raw) p = rng.uniform(0.01, 5.0);
            const auto exact = oracle::sampling_probabilities(raw, alpha);
            const auto f = frequencies(memory_with(raw, alpha), 1'000'000, rng);
            double l1 = 0;
            for (std::size_t i = 0; i < 64; ++i) l1 += std::abs(f[i] - exact[i]);
            worst_l1 = std::max(worst_l1, l1);
        }
    std::vector<double> raw(64);
    for (auto& p : raw) p = rng.uniform(0.01, 5.0);
    const auto f = frequencies(memory_with(raw, 0.0), 1'000'000, rng);
    // Per-leaf tolerance is one percentage point of probability. A relative
    // 1% bound sits inside the sampling noise of 1e6 draws over 64 leaves.
    double worst_abs = 0, worst_rel = 0;
    for (double v : f) {
        worst_abs = std::max(worst_abs, std::abs(v - 1.0 / 64));
        worst_rel = std::max(worst_rel, std::abs(v * 64.0 - 1.0));
    }
    const double secs = seconds_since(t0);
    return check(worst_l1 < 0.02 && worst_abs < 0.01 && secs < 120,
                 fmt("worst L1 %.4f over 40 vectors; alpha=0 worst deviation %.5f (%.2f%% of 1/64); %.1f s",
                     worst_l1, worst_abs, 100 * worst_rel, secs));
}

// ---- 4 ------------------------------------------------------------------

Verdict sum_tree() {
    const std::size_t capacity = 1000;
    replay::ReplayMemory<float> m(capacity, 1, {0.6, 0.01});
    Rng rng(404);
    std::size_t stores = 0, updates = 0;
    for (int op = 0; op < 100'000; ++op) {
        if (m.size() == 0 || rng.uniform() < 0.5) {
            m.store(std::vector<float>{0.0f}, 0, 0.0, std::vector<float>{0.0f}, false);  // evicts the oldest once full
            ++stores;
        } else {
            std::vector<std::size_t> idx(1 + rng.uniform_int(8));
            std::vector<double> td(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                idx[k] = rng.uniform_int(m.size());
                td[k] = rng.uniform(-10, 10) * rng.uniform();
            }
            m.update_priorities(idx, td);
            ++updates;
        }
    }
    const auto& t = m.tree();
    const auto L = t.padded_leaves();
    std::vector<double> expect(2 * L, 0.0);
    for (std::size_t i = 0; i < L; ++i) expect[L + i] = t.nodes()[L + i];
    for (std::size_t n = L - 1; n >= 1; --n) expect[n] = expect[2 * n] + expect[2 * n + 1];
    double worst = 0;
    for (std::size_t n = 1; n < L; ++n)
        worst = std::max(worst, std::abs(t.nodes()[n] - expect[n]) / std::max(std::abs(expect[n]), 1e-300));
    return check(worst <= 1e-6, fmt("%zu stores (%zu evictions), %zu updates; worst internal relative error %.2e",
                                     stores, stores - std::min(stores, capacity), updates, worst));
}

// ---- 5 ------------------------------------------------------------------

Verdict is_weights() {
    Rng rng(505);
    replay::ReplayMemory<float> m(200, 1, {0.6, 0.01});
    for (int i = 0; i < 200; ++i) m.store(std::vector<float>{0.0f}, 0, 0.0, std::vector<float>{0.0f}, false);
    bool uniform_ok = true;
    for (double beta : {0.0, 0.4, 1.0})
        for (double w : m.sample_prioritized(32, beta, rng).weights) uniform_ok &= w == 1.0;

    std::vector<std::size_t> idx(200);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> td(200);
    for (auto& d : td) d = rng.uniform(-4, 4);
    m.update_priorities(idx, td);
    bool max_ok = true, zero_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto b = m.sample_prioritized(32, rng.uniform(), rng);
        max_ok &= *std::max_element(b.weights.begin(), b.weights.end()) == 1.0;
        for (double w : m.sample_prioritized(32, 0.0, rng).weights) zero_ok &= w == 1.0;
    }
    const agent::AgentConfig defaults;
    const auto sched = defaults.beta_schedule();
    const double b0 = anneal_beta(0, sched), b1 = anneal_beta(defaults.max_steps, sched);
    return check(uniform_ok && max_ok && zero_ok && b0 == 0.4 && b1 == 1.0,
                 fmt("max weight exactly 1: %s; beta=0 all ones: %s; uniform all ones: %s; beta %.1f at step 0, "
                     "%.1f at step %llu",
                     max_ok ? "yes" : "no", zero_ok ? "yes" : "no", uniform_ok ? "yes" : "no", b0, b1,
                     static_cast<unsigned long long>(defaults.max_steps)));
}

// ---- 6 ------------------------------------------------------------------

std::vector<double> one_hot(std::size_t s) {
    std::vector<double> v(5, 0.0);
    v[s] = 1.0;
    return v;
}

Verdict bellman() {
    const double gamma = 0.99;
    const auto q = oracle::tabular_q_star(gamma, 1e-10);
    double worst = 0;
    for (bool dbl : {false, true}) {
        agent::AgentConfig cfg;
        cfg.gamma = gamma;
        cfg.double_q = dbl;
        auto net = nn::build_network<double>(nn::Architecture::linear(), {1, 5, 1}, 2, false);
        auto* p = net.params()[0];
        for (std::size_t s = 0; s < 5; ++s)
            for (std::size_t a = 0; a < 2; ++a) p->weight[s * 2 + a] = q[s][a];
        p->bias->fill(0.0);
        agent::Learner<double> learner(std::move(net), cfg);
        learner.sync_target();
        replay::ReplayMemory<double> mem(10, 5);
        for (std::size_t s = 0; s < 5; ++s)
            for (std::size_t a = 0; a < 2; ++a) {
                const auto& o = envs::Tabular::table[s][a];
                mem.store(one_hot(s), a, o.reward, one_hot(o.next), o.terminal);
            }
        replay::SampleBatch b;
        for (std::size_t i = 0; i < 10; ++i) b.indices.push_back(i);
        b.weights.assign(10, 1.0);
        const auto y = learner.targets(mem, b);
        for (std::size_t i = 0; i < 10; ++i) worst = std::max(worst, std::abs(y[i] - q[i / 2][i % 2]));
    }

    // Double targets never exceed DQN targets under a shared target network.
    Rng rng(606);
    std::size_t violations = 0;
    const std::size_t draws = 10'000, batch = 8, actions = 4;
    auto online = nn::build_network<double>(nn::Architecture::mlp(16), {1, 6, 1}, actions, false);
    auto target = online;
    for (std::size_t d = 0; d < draws; ++d) {
        gradcheck::randomize(online, rng);
        gradcheck::randomize(target, rng);
        nn::Tensor<double> x({batch, 1, 6, 1});
        for (auto& v : x.values()) v = rng.uniform(-2, 2);
        const auto qo = online.forward(x).values();
        const std::vector<double> qon(qo.begin(), qo.end());
        const auto qt = target.forward(x).values();
        const std::vector<double> qtn(qt.begin(), qt.end());
        std::vector<double> r(batch);
        std::unique_ptr<bool[]> term(new bool[batch]);
        for (std::size_t j = 0; j < batch; ++j) {
            r[j] = rng.uniform(-1, 1);
            term[j] = rng.uniform() < 0.1;
        }
        std::span<const bool> ts(term.get(), batch);
        const auto yd = agent::compute_target_dqn<double>(r, ts, qtn, actions, gamma);
        const auto yw = agent::compute_target_double<double>(r, ts, qon, qtn, actions, gamma);
        for (std::size_t j = 0; j < batch; ++j) violations += yw[j] > yd[j];
    }
    return check(worst < 1e-6 && violations == 0,
                 fmt("max |y - Q*| %.2e over 10 transitions x 2 rules; y_double > y_dqn in %zu of %zu targets",
                     worst, violations, draws * batch));
}

// ---- 7 ------------------------------------------------------------------

Verdict dueling() {
    Rng rng(707);
    nn::DuelingHead<double> h(8, 5);
    for (auto* p : h.params())
        p->for_each_tensor([&](nn::Tensor<double>& t) {
            for (auto& v : t.values()) v = rng.uniform(-2, 2);
        });
    nn::Tensor<double> x({1000, 8}), y;
    for (auto& v : x.values()) v = rng.uniform(-3, 3);
    h.forward(x, y);
    double worst_sum = 0;
    for (std::size_t n = 0; n < 1000; ++n) {
        double s = 0;
        for (std::size_t a = 0; a < 5; ++a) s += y[n * 5 + a] - h.last_value()[n];
        worst_sum = std::max(worst_sum, std::abs(s));
    }
    // constant advantage stream: zero weights, equal biases
    auto ps = h.params();
    ps[1]->weight.fill(0.0);
    ps[1]->bias->fill(0.75);
    h.forward(x, y);
    double worst_const = 0;
    for (std::size_t n = 0; n < 1000; ++n)
        for (std::size_t a = 0; a < 5; ++a)
            worst_const = std::max(worst_const, std::abs(y[n * 5 + a] - h.last_value()[n]));
    return check(worst_sum < 1e-10 && worst_const < 1e-10,
                 fmt("max |sum_a (Q - V)| %.2e over 1000 inputs; constant advantage max |Q - V| %.2e", worst_sum,
                     worst_const));
}

// ---- 8 and 9 -------------------------------------------------------------

constexpr std::size_t n_seeds = 5;
constexpr double solved = 0.8;

struct RunResult {
    std::optional<std::uint64_t> first_solved;  // first step with eval >= 0.8
    double final_eval = -2.0;
    double seconds = 0;
    std::uint64_t steps = 0;
};

// Desk-preset run for one variant. With `stop_when_solved` the run ends at
// the first evaluation >= 0.8, which is all the ordering check needs.
RunResult desk_run(bool dueling, double alpha, std::uint64_t seed, bool stop_when_solved) {
    auto cfg = RunConfig::desk();
    cfg.agent.dueling = dueling;
    cfg.agent.priority_alpha = alpha;
    cfg.seed = seed;
    RunResult r;
    agent::Trainer<float>::Callbacks cb;
    cb.on_record = [&](const agent::MetricRecord& m) {
        if (!m.eval_mean) return;
        r.final_eval = *m.eval_mean;
        if (!r.first_solved && *m.eval_mean >= solved) r.first_solved = m.step;
    };
    const auto t0 = Clock::now();
    agent::Trainer<float> t(cfg);
    while (!t.finished() && !(stop_when_solved && r.first_solved)) t.run(t.progress().step + cfg.test_period, cb);
    r.seconds = seconds_since(t0);
    r.steps = t.progress().step;
    return r;
}

std::map<std::uint64_t, RunResult> full_runs;  // dueling + prioritized, by seed

void ensure_full_runs() {
    for (std::uint64_t s = 1; s <= n_seeds; ++s)
        if (!full_runs.count(s)) {
            full_runs[s] = desk_run(true, 0.6, s, false);
            std::cerr << fmt("  seed %llu: final eval %.2f, first >= 0.8 at %s, %.0f s\n",
                             static_cast<unsigned long long>(s), full_runs[s].final_eval,
                             full_runs[s].first_solved ? std::to_string(*full_runs[s].first_solved).c_str() : "never",
                             full_runs[s].seconds);
        }
}

Verdict end_to_end() {
    ensure_full_runs();
    std::size_t good = 0;
    double slowest = 0;
    std::string evals;
    for (const auto& [s, r] : full_runs) {
        good += r.final_eval >= 0.9;
        slowest = std::max(slowest, r.seconds);
        evals += fmt("%s%.2f", evals.empty() ? "" : " ", r.final_eval);
    }
    return check(good >= 4 && slowest < 1800,
                 fmt("final eval per seed [%s]; %zu of 5 >= 0.9; slowest seed %.0f s", evals.c_str(), good, slowest));
}

double median_steps(std::vector<RunResult> runs, std::uint64_t never) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(static_cast<double>(r.first_solved.value_or(never)));
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Verdict ablation_order() {
    ensure_full_runs();
    const auto never = RunConfig::desk().agent.max_steps + 1;  // unsolved runs rank last
    std::map<std::string, std::vector<RunResult>> by_variant;
    for (const auto& v : cli::ablation_variants) {
        for (std::uint64_t s = 1; s <= n_seeds; ++s) {
            if (v.dueling && v.priority_alpha > 0)
                by_variant[v.slug].push_back(full_runs[s]);
            else
                by_variant[v.slug].push_back(desk_run(v.dueling, v.priority_alpha, s, true));
        }
    }
    std::string d;
    for (const auto& v : cli::ablation_variants)
        d += fmt("%s%s %.0f", d.empty() ? "" : ", ", v.slug, median_steps(by_variant[v.slug], never));
    const double prio = std::max(median_steps(by_variant["double-prioritized"], never),
                                 median_steps(by_variant["dueling-double-prioritized"], never));
    const double unif = std::min(median_steps(by_variant["double"], never),
                                 median_steps(by_variant["dueling-double"], never));
    const bool ok = prio <= unif;
    return {ok ? Verdict::Kind::pass : Verdict::Kind::warn,
            "median steps to first eval >= 0.8: " + d + (ok ? "" : " (prioritized slower; soft criterion)")};
}

// ---- 10 -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    const auto root = fs::temp_directory_path() / ("qlearn_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    auto base = RunConfig::desk();
    base.agent.dueling = true;
    base.agent.max_steps = 6000;
    base.test_period = 2000;
    base.eval_episodes = 20;
    base.checkpoint_replay = true;
    base.seed = 9;
    std::ostringstream log;
    auto train = [&](const std::string& dir, std::optional<std::uint64_t> stop) {
        cli::TrainOptions o;
        o.config = base;
        o.config.out_dir = (root / dir).string();
        o.stop_at = stop;
        o.quiet = true;
        cli::cmd_train(o, log);
        return root / dir / cli::metrics_file;
    };
    const auto a = slurp(train("a", std::nullopt));
    const auto b = slurp(train("b", std::nullopt));
    train("r", 3333);
    cli::TrainOptions resume;
    resume.resume = (root / "r" / cli::final_checkpoint).string();
    resume.quiet = true;
    cli::cmd_train(resume, log);
    const auto r = slurp(root / "r" / cli::metrics_file);
    const auto rows = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
    fs::remove_all(root);
    return check(a == b && a == r && rows > 10,
                 fmt("%zu-row CSV; identical reruns: %s; resume from step 3333 identical: %s", rows,
                     a == b ? "yes" : "no", a == r ? "yes" : "no"));
}

// ---- 11 -----------------------------------------------------------------

Verdict table_defaults() {
    const std::map<std::string, std::string> table = {
        {"gamma", "0.99"},          {"learning-rate", "0.000625"}, {"priority-alpha", "0.6"},
        {"beta-start", "0.4"},      {"beta-end", "1"},             {"batch-size", "32"},
        {"update-period", "4"},     {"target-sync-period", "30000"}, {"learning-start", "50000"},
        {"test-epsilon", "0.001"},  {"max-episode-steps", "18000"}, {"replay-capacity", "1000000"},
        {"frame-stack", "4"},       {"epsilon-start", "1"},        {"epsilon-end", "0.1"},
        {"epsilon-steps", "5000000"}, {"max-steps", "100000000"}, {"test-period", "5000000"},
        {"optimizer", "rmsprop"},
    };
    std::map<std::string, std::string> kv;
    std::istringstream in(cli::dump_config(cli::resolve_config("", "", {})));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    std::string bad;
    for (const auto& [k, v] : table)
        if (!kv.count(k) || kv[k] != v) bad += " " + k;
    return check(bad.empty(), bad.empty() ? fmt("all %zu table values match", table.size()) : "mismatch:" + bad);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"gradient correctness", gradients},
        {"architecture shapes", shapes},
        {"prioritized sampling fidelity", sampling},
        {"sum-tree consistency", sum_tree},
        {"importance-sampling weights", is_weights},
        {"Bellman target oracle", bellman},
        {"dueling identity", dueling},
        {"end-to-end learning on Catch", end_to_end},
        {"ablation ordering", ablation_order},
        {"determinism and resume", determinism},
        {"default hyperparameters", table_defaults},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && !only.count(id)) continue;
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        const char* tag = v.kind == Verdict::Kind::pass ? "PASS" : v.kind == Verdict::Kind::warn ? "WARN" : "FAIL";
        failures += v.kind == Verdict::Kind::fail;
        std::cout << tag << "  " << id << ". " << criteria[k].first << ": " << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
