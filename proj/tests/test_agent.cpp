#include <gtest/gtest.h>

#include <cmath>

#include "qlearn/agent/evaluate.hpp"
#include "qlearn/agent/learner.hpp"
#include "qlearn/agent/targets.hpp"
#include "qlearn/agent/trainer.hpp"
#include "qlearn/envs/registry.hpp"
#include "oracles.hpp"

using namespace qlearn;
using namespace qlearn::agent;

namespace {

const bool no_term[] = {false};
const bool term[] = {true};

// Tabular chain net: one-hot 1x5x1 input, linear head, W[s][a] = q[s][a].
nn::Network<double> tabular_net(const std::array<std::array<double, 2>, 5>& q) {
    auto net = nn::build_network<double>(nn::Architecture::linear(), {1, 5, 1}, 2, false);
    auto* p = net.params()[0];
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 2; ++a) p->weight[s * 2 + a] = q[s][a];
    p->bias->fill(0.0);
    return net;
}

std::vector<double> one_hot(std::size_t s) {
    std::vector<double> v(5, 0.0);
    v[s] = 1.0;
    return v;
}

RunConfig tiny_config() {
    RunConfig c;
    c.env = "catch";
    c.env_size = 8;
    c.arch = "small";
    c.frame_size = 0;
    c.frame_stack = 2;
    c.agent.max_steps = 600;
    c.agent.replay_capacity = 300;
    c.agent.learning_start = 100;
    c.agent.batch_size = 8;
    c.agent.target_sync_period = 50;
    c.agent.epsilon = {1.0, 0.1, 400};
    c.agent.max_episode_steps = 100;
    c.test_period = 200;
    c.eval_episodes = 5;
    c.seed = 17;
    return c;
}

}  // namespace

TEST(Targets, TerminalIsReward) {
    const double r[] = {1.0};
    const double q[] = {5.0, 7.0};
    EXPECT_EQ(compute_target_dqn<double>(r, term, q, 2, 0.99)[0], 1.0);
    EXPECT_EQ(compute_target_double<double>(r, term, q, q, 2, 0.99)[0], 1.0);
}

TEST(Targets, DqnExample) {
    const double r[] = {1.0};
    const double q[] = {0.5, 2.0};
    EXPECT_NEAR(compute_target_dqn<double>(r, no_term, q, 2, 0.99)[0], 2.98, 1e-12);
}

TEST(Targets, MyopicLimit) {
    const double r[] = {0.25};
    const double q[] = {3.0, -1.0};
    EXPECT_EQ(compute_target_dqn<double>(r, no_term, q, 2, 0.0)[0], 0.25);
}

TEST(Targets, DoubleExample) {
    const double r[] = {0.0};
    const double online[] = {1, 5, 3};
    const double target[] = {2, 0, 4};
    EXPECT_EQ(compute_target_double<double>(r, no_term, online, target, 3, 0.99)[0], 0.0);
}

TEST(Targets, DoubleEqualsDqnWhenNetsMatch) {
    Rng rng(3);
    std::vector<double> r(16), q(16 * 4);
    std::unique_ptr<bool[]> t(new bool[16]);
    for (std::size_t j = 0; j < 16; ++j) {
        r[j] = rng.uniform(-1, 1);
        t[j] = rng.uniform() < 0.2;
    }
    for (auto& v : q) v = rng.uniform(-2, 2);
    std::span<const bool> ts(t.get(), 16);
    EXPECT_EQ(compute_target_dqn<double>(r, ts, q, 4, 0.9), compute_target_double<double>(r, ts, q, q, 4, 0.9));
}

TEST(Policy, GreedyAndTies) {
    Rng rng(1);
    const double q[] = {0.1, 0.9, 0.3};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(epsilon_greedy<double>(q, 0.0, rng), 1u);
    const double tie[] = {0.5, 0.5};
    EXPECT_EQ(epsilon_greedy<double>(tie, 0.0, rng), 0u);
}

TEST(Policy, FullyRandomIsUniform) {
    Rng rng(9);
    const double q[] = {0, 0, 0, 1};
    std::vector<double> n(4, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) n[epsilon_greedy<double>(q, 1.0, rng)] += 1;
    for (double c : n) EXPECT_NEAR(c / draws, 0.25, 0.01);
}

TEST(Policy, RejectsBadEpsilon) {
    Rng rng(1);
    const double q[] = {0, 1};
    EXPECT_THROW(epsilon_greedy<double>(q, 1.5, rng), std::invalid_argument);
}

TEST(Bellman, QStarIsAFixedPoint) {
    const double gamma = 0.99;
    const auto q = oracle::tabular_q_star(gamma);
    AgentConfig cfg;
    cfg.gamma = gamma;
    for (bool dbl : {false, true}) {
        cfg.double_q = dbl;
        Learner<double> learner(tabular_net(q), cfg);
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
        for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(y[i], q[i / 2][i % 2], 1e-6) << "transition " << i;
    }
}

TEST(Learner, OutputGradientIsMinusWeightedDelta) {
    auto net = nn::build_network<double>(nn::Architecture::mlp(8), {1, 5, 1}, 2, false);
    nn::init_params(net, 4);
    AgentConfig cfg;
    cfg.batch_size = 4;
    cfg.priority_alpha = 0.6;
    Learner<double> learner(std::move(net), cfg);
    replay::ReplayMemory<double> mem(20, 5, {0.6, 0.01});
    Rng rng(2);
    for (std::size_t i = 0; i < 20; ++i) mem.store(one_hot(i % 5), i % 2, rng.uniform(-1, 1), one_hot((i + 1) % 5), i % 7 == 0);
    std::vector<std::size_t> idx(20);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> d(20);
    for (auto& v : d) v = rng.uniform(-2, 2);
    mem.update_priorities(idx, d);

    const auto st = learner.learn_step(mem, 0.5, rng);
    const auto g = learner.last_output_grad();
    for (std::size_t j = 0; j < 4; ++j) {
        const auto a = mem.at(st.batch.indices[j]).action;
        EXPECT_NEAR(g[j * 2 + a], -st.batch.weights[j] * st.samples[j].td_error, 1e-12);
        EXPECT_EQ(g[j * 2 + (1 - a)], 0.0);
        // priority refreshed to |delta| + eps
        EXPECT_NEAR(mem.tree().leaf(st.batch.indices[j]), std::pow(std::abs(st.samples[j].td_error) + 0.01, 0.6),
                    1e-12);
    }
}

TEST(Learner, ZeroLearningRateKeepsParams) {
    auto net = nn::build_network<double>(nn::Architecture::mlp(8), {1, 5, 1}, 2, true);
    nn::init_params(net, 4);
    const auto before = net;
    AgentConfig cfg;
    cfg.batch_size = 2;
    cfg.optimizer.learning_rate = 0.0;
    Learner<double> learner(std::move(net), cfg);
    replay::ReplayMemory<double> mem(4, 5);
    for (std::size_t i = 0; i < 4; ++i) mem.store(one_hot(i), 0, 1.0, one_hot(i + 1), false);
    Rng rng(1);
    learner.learn_step(mem, 0.4, rng);
    const auto pa = before.params();
    const auto pb = std::as_const(learner).online().params();
    for (std::size_t i = 0; i < pa.size(); ++i)
        EXPECT_TRUE(std::ranges::equal(pa[i]->weight.values(), pb[i]->weight.values()));
    double changed = 0;
    for (std::size_t i = 0; i < 4; ++i) changed += std::abs(mem.tree().leaf(i) - 1.0);
    EXPECT_GT(changed, 0.0);
}

TEST(Learner, SingleTransitionRegresses) {
    auto net = nn::build_network<double>(nn::Architecture::linear(), {1, 5, 1}, 2, false);
    nn::init_params(net, 8);
    AgentConfig cfg;
    cfg.batch_size = 1;
    cfg.priority_alpha = 0.0;
    cfg.optimizer.learning_rate = 0.01;
    Learner<double> learner(std::move(net), cfg);
    replay::ReplayMemory<double> mem(1, 5);
    mem.store(one_hot(2), 1, 0.5, one_hot(3), true);  // fixed target 0.5
    Rng rng(1);
    double prev = std::abs(learner.learn_step(mem, 0.4, rng).samples[0].td_error);
    for (int i = 0; i < 100; ++i) {
        const double now = std::abs(learner.learn_step(mem, 0.4, rng).samples[0].td_error);
        EXPECT_LE(now, prev + 1e-12);
        prev = now;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(Evaluate, OptimalCatchPolicyIsPerfect) {
    envs::Catch proto;
    envs::FrameStack<float> stack(24, 24, 1);
    Rng rng(5);
    Policy<float> chase = [](const envs::Environment& e, std::span<const float>, Rng&) -> std::size_t {
        const auto& c = static_cast<const envs::Catch&>(e);
        const auto d = c.ball_col() - c.paddle();
        return d < 0 ? envs::Catch::left : d > 0 ? envs::Catch::right : envs::Catch::stay;
    };
    const auto r = run_episodes<float>(proto, 100, 1000, stack, rng, chase);
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(r.stddev, 0.0);
}

TEST(Evaluate, RandomCatchPolicyMatchesDp) {
    const double v = oracle::catch_random_value(24);
    EXPECT_NEAR(v, 2.0 / 24.0 - 1.0, 1e-12);
    envs::Catch proto;
    envs::FrameStack<float> stack(24, 24, 1);
    Rng rng(6);
    Policy<float> random = [](const envs::Environment&, std::span<const float>, Rng& r) -> std::size_t {
        return static_cast<std::size_t>(r.uniform_int(3));
    };
    const auto r = run_episodes<float>(proto, 20000, 1000, stack, rng, random);
    // standard error of the mean is below 0.003 here
    EXPECT_NEAR(r.mean, v, 0.015);
}

TEST(Evaluate, DeterministicEnvGreedyIsConstant) {
    envs::GridWorld proto;
    envs::FrameStack<float> stack(8, 8, 1);
    auto net = nn::build_network<float>(nn::Architecture::mlp(), {8, 8, 1}, 4, false);
    nn::init_params(net, 2);
    Rng rng(1);
    const auto r = evaluate<float>(net, proto, 5, 0.0, 50, stack, rng);
    for (double x : r.returns) EXPECT_EQ(x, r.returns[0]);
    EXPECT_EQ(r.stddev, 0.0);
    const auto one = evaluate<float>(net, proto, 1, 0.0, 50, stack, rng);
    EXPECT_EQ(one.stddev, 0.0);
}

TEST(Trainer, NoLearningBeforeLearningStart) {
    auto c = tiny_config();
    c.agent.max_steps = 99;
    Trainer<float> t(c);
    std::vector<MetricRecord> recs;
    t.run(c.agent.max_steps, {[&](const MetricRecord& m) { recs.push_back(m); }, {}});
    EXPECT_EQ(t.progress().optimizer_steps, 0u);
    for (const auto& m : recs) {
        EXPECT_FALSE(m.loss.has_value());
        EXPECT_FALSE(m.mean_abs_td.has_value());
    }
}

TEST(Trainer, ZeroBudgetDoesNothing) {
    auto c = tiny_config();
    c.agent.max_steps = 0;
    Trainer<float> t(c);
    int n = 0;
    t.run(c.agent.max_steps, {[&](const MetricRecord&) { ++n; }, {}});
    EXPECT_EQ(n, 0);
    EXPECT_EQ(t.progress().step, 0u);
}

TEST(Trainer, TargetSyncPeriod) {
    auto c = tiny_config();
    Trainer<float> t(c);
    t.run(149);  // learning from 100, next sync at 150
    const auto a = t.learner().online().params();
    const auto b = t.learner().target().network().params();
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        differs |= !std::ranges::equal(a[i]->weight.values(), b[i]->weight.values());
    EXPECT_TRUE(differs);
    t.run(150);
    const auto c2 = t.learner().target().network().params();
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_TRUE(std::ranges::equal(a[i]->weight.values(), c2[i]->weight.values()));
}

TEST(Trainer, SameSeedSameRecords) {
    auto run = [] {
        std::vector<std::string> out;
        Trainer<float> t(tiny_config());
        t.run(600, {[&](const MetricRecord& m) {
                        out.push_back(std::to_string(m.step) + "/" + std::to_string(m.episode_return.value_or(9)) +
                                      "/" + std::to_string(m.loss.value_or(-1)) + "/" +
                                      std::to_string(m.eval_mean.value_or(9)));
                    },
                    {}});
        return out;
    };
    const auto a = run(), b = run();
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
}

TEST(Trainer, InvalidConfigRejected) {
    auto c = tiny_config();
    c.agent.gamma = 1.5;
    EXPECT_THROW(Trainer<float>{c}, std::invalid_argument);
}
