#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "aql/learner.hpp"

using namespace aql;

namespace {

LearnerConfig small_config(int H, std::uint64_t K) {
    LearnerConfig cfg;
    cfg.H = H;
    cfg.K = K;
    cfg.delta = 0.05;
    cfg.lipschitz_L = 1.0;
    return cfg;
}

// Fixed reward stream, next state equals the action.
struct ScriptedEnv {
    std::vector<double> rewards;
    std::size_t i = 0;
    EnvStepResult step(int, const Vec&, const Vec& a, std::mt19937_64&) {
        EnvStepResult out;
        out.reward = rewards[i++ % rewards.size()];
        out.next_state = a;
        return out;
    }
};

}  // namespace

TEST_CASE("learning rate (H+1)/(H+t)") {
    CHECK(learning_rate(1, 5) == 1.0);
    CHECK(learning_rate(5, 5) == Catch::Approx(0.6));
    CHECK(learning_rate(95, 5) == Catch::Approx(0.06));
    CHECK_THROWS_AS(learning_rate(0, 5), std::invalid_argument);
}

TEST_CASE("alpha weight identities") {
    CHECK(alpha_weights(1, 3) == std::vector<double>{1.0});

    auto w = alpha_weights(3, 2);
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));

    w = alpha_weights(10, 3);
    double max_w = 0.0;
    for (double v : w) max_w = std::max(max_w, v);
    CHECK(max_w <= 2.0 * 3 / 10.0);
}

TEST_CASE("alpha weight partial sums approach 1 + 1/H") {
    // sum_{t=i}^T alpha_t^i stays below and converges to 1 + 1/H.
    for (int H : {1, 3, 5}) {
        for (std::uint64_t i : {std::uint64_t{1}, std::uint64_t{4}}) {
            double partial = 0.0;
            for (std::uint64_t t = i; t <= 600; ++t) partial += alpha_weights(t, H)[i - 1];
            CHECK(partial <= 1.0 + 1.0 / H + 1e-9);
            CHECK(partial > (1.0 + 1.0 / H) * 0.95);
        }
    }
}

TEST_CASE("bonus values") {
    LearnerConfig cfg = small_config(5, 2000);
    // 2*sqrt(125 ln(800000) / 4) + 4/sqrt(4)
    const double expected = 2.0 * std::sqrt(125.0 * std::log(800000.0) / 4.0) + 2.0;
    CHECK(bonus(4, cfg) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(bonus(4, cfg) == Catch::Approx(43.2195).margin(1e-3));

    cfg.bonus_scale_stochastic = 0.0;
    cfg.bonus_scale_metric = 0.0;
    for (std::uint64_t t : {1, 7, 100}) CHECK(bonus(t, cfg) == 0.0);

    cfg = small_config(5, 2000);
    double prev = bonus(1, cfg);
    for (std::uint64_t t = 2; t <= 1000; ++t) {
        const double b = bonus(t, cfg);
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("recursive update equals the alpha-weighted closed form") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 100);
    const int H = 4;
    for (int trial = 0; trial < 200; ++trial) {
        const int T = len(rng);
        std::vector<double> targets(static_cast<std::size_t>(T));
        for (auto& y : targets) y = u(rng) * 10.0;

        double q = static_cast<double>(H);
        for (int t = 1; t <= T; ++t) {
            const double a = learning_rate(static_cast<std::uint64_t>(t), H);
            q = (1.0 - a) * q + a * targets[static_cast<std::size_t>(t - 1)];
        }

        const auto w = alpha_weights(static_cast<std::uint64_t>(T), H);
        double closed = 0.0;
        for (int i = 0; i < T; ++i) closed += w[static_cast<std::size_t>(i)] * targets[static_cast<std::size_t>(i)];
        CHECK(q == Catch::Approx(closed).margin(1e-9));
    }
}

TEST_CASE("v_estimate") {
    const int H = 5;
    CHECK(v_estimate(nullptr, {0.3}, H) == 0.0);

    StepPartition tree(2, SpaceDescriptor{1, 1, 1.0}, static_cast<double>(H));
    CHECK(v_estimate(&tree, {0.3}, H) == static_cast<double>(H));

    split(tree, *tree.root);
    for (const auto& child : tree.root->children)
        child->q_hat = child->region.center.action[0] < 0.5 ? 2.5 : 7.0;
    CHECK(v_estimate(&tree, {0.3}, H) == 5.0);  // clipped at H
    for (const auto& child : tree.root->children)
        child->q_hat = child->region.center.action[0] < 0.5 ? 2.5 : 3.0;
    CHECK(v_estimate(&tree, {0.3}, H) == 3.0);
}

TEST_CASE("act returns the action midpoint of the selected ball") {
    AdaptiveAgent agent(small_config(5, 100));
    auto [ball, a] = agent.act(1, {0.3});
    CHECK(ball == agent.tree(1).root.get());
    CHECK(a == Vec{0.5});

    // Same state, same agent: identical output.
    auto [ball2, a2] = agent.act(1, {0.3});
    CHECK(ball2 == ball);
    CHECK(a2 == a);
}

TEST_CASE("act after a root split picks a quadrant action midpoint") {
    AdaptiveAgent agent(small_config(5, 100));
    StepPartition& tree = agent.tree(1);
    split(tree, *tree.root);
    // Make the upper action interval [0.5, 1] the winner for x = 0.1.
    for (const auto& child : tree.root->children)
        if (child->region.center.state[0] == 0.25)
            child->q_hat = child->region.center.action[0] == 0.75 ? 4.0 : 1.0;
    auto [ball, a] = agent.act(1, {0.1});
    CHECK(a == Vec{0.75});
    CHECK(ball->q_hat == 4.0);
}

TEST_CASE("update performs the Q-learning step and splits at threshold") {
    const int H = 5;
    LearnerConfig cfg = small_config(H, 2000);
    AdaptiveAgent agent(cfg);

    // Step h = H: terminal V is 0, t = 1, alpha = 1.
    auto [ball, a] = agent.act(H, {0.0});
    auto ev = agent.update(H, ball, 1.0, a);
    CHECK(ball->q_hat == Catch::Approx(1.0 + bonus(1, cfg)).epsilon(1e-12));
    CHECK(ball->visits == 1);
    REQUIRE(ev.has_value());  // root splits after one visit
    CHECK_FALSE(ball->is_leaf());
    CHECK(agent.tree(H).leaf_count == 4);

    CHECK_THROWS_AS(agent.update(H, ball, 0.5, a), std::logic_error);
}

TEST_CASE("update with zero bonus and H=1 stores the reward") {
    LearnerConfig cfg = small_config(1, 1);
    cfg.bonus_scale_stochastic = 0.0;
    cfg.bonus_scale_metric = 0.0;
    AdaptiveAgent agent(cfg);
    auto [ball, a] = agent.act(1, {0.5});
    agent.update(1, ball, 0.37, a);
    CHECK(ball->q_hat == Catch::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("run_episode executes H steps and splits every root") {
    const int H = 3;
    AdaptiveAgent agent(small_config(H, 50));
    ScriptedEnv env{{0.2, 0.9, 0.4}};
    std::mt19937_64 rng(0);
    EpisodeTrace trace = agent.run_episode(env, {0.0}, rng);
    CHECK(trace.rewards == std::vector<double>{0.2, 0.9, 0.4});
    CHECK(trace.states.size() == H + 1);
    CHECK(trace.total_reward() == Catch::Approx(1.5));
    for (double r : trace.rewards) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
    }
    for (int h = 1; h <= H; ++h) {
        CHECK_FALSE(agent.tree(h).root->is_leaf());
        CHECK(agent.tree(h).root->own_visits() == 1);
    }
    CHECK(agent.episode() == 2);
}

TEST_CASE("greedy policy is frozen") {
    AdaptiveAgent agent(small_config(2, 50));
    ScriptedEnv env{{0.5, 0.1}};
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) agent.run_episode(env, {0.3}, rng);

    GreedyPolicy policy = agent.extract_greedy_policy();
    const Vec a1 = policy.act(1, {0.3});
    CHECK(policy.act(1, {0.3}) == a1);

    for (int k = 0; k < 10; ++k) agent.run_episode(env, {0.3}, rng);
    CHECK(policy.act(1, {0.3}) == a1);  // later training is invisible
}

TEST_CASE("policy sampling with a single snapshot") {
    AdaptiveAgent agent(small_config(2, 1));
    agent.snapshot_at(1);
    ScriptedEnv env{{0.5}};
    std::mt19937_64 rng(2);
    agent.run_episode(env, {0.3}, rng);
    REQUIRE(agent.snapshots().size() == 1);
    CHECK(agent.sample_policy(rng).act(1, {0.3}) == agent.snapshots()[0].act(1, {0.3}));
}

TEST_CASE("lipschitz constants from primitives") {
    CHECK(lipschitz_from_primitives(TransitionRegularity::total_variation, 1.0, 1.0, 5, 1) == 11.0);
    CHECK(lipschitz_from_primitives(TransitionRegularity::wasserstein, 1.0, 1.0, 5, 1) == 5.0);
    CHECK(lipschitz_from_primitives(TransitionRegularity::wasserstein, 1.5, 0.0, 5, 2) == 1.5);
    CHECK(lipschitz_from_primitives(TransitionRegularity::wasserstein, 2.0, 0.5, 4, 3) ==
          Catch::Approx(2.0 * (1.0 + 0.5)));
    CHECK_THROWS_AS(lipschitz_from_primitives(TransitionRegularity::wasserstein, 1.0, 1.0, 5, 6),
                    std::invalid_argument);
}
