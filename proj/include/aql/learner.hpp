// The adaptive Q-learning agent: learning-rate schedule, optimism bonus,
// value estimate, episode interaction loop, and greedy policy snapshots.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aql/partition.hpp"

namespace aql {

struct LearnerConfig {
    int H = 1;          // steps per episode
    std::uint64_t K = 1;  // episodes
    double delta = 0.05;
    double lipschitz_L = 1.0;
    SpaceDescriptor space;
    // Multipliers on the two bonus terms; the experiments tune these.
    double bonus_scale_stochastic = 1.0;
    double bonus_scale_metric = 1.0;

    void validate() const {
        space.validate();
        if (H < 1 || K < 1) throw std::invalid_argument("LearnerConfig: H, K must be >= 1");
        if (delta <= 0.0 || delta >= 1.0)
            throw std::invalid_argument("LearnerConfig: delta must be in (0,1)");
        if (lipschitz_L < 0.0 || bonus_scale_stochastic < 0.0 || bonus_scale_metric < 0.0)
            throw std::invalid_argument("LearnerConfig: scales must be nonnegative");
    }
};

// alpha_t = (H+1)/(H+t)
inline double learning_rate(std::uint64_t t, int H) {
    if (t == 0) throw std::invalid_argument("learning_rate: t must be >= 1");
    return static_cast<double>(H + 1) / (static_cast<double>(H) + static_cast<double>(t));
}

// The effective weights alpha_t^i = alpha_i * prod_{j=i+1}^t (1 - alpha_j)
// placed on the i-th visit's target after t visits. Used by tests to cross
// check the recursive update; the learner itself never materializes them.
inline std::vector<double> alpha_weights(std::uint64_t t, int H) {
    if (t == 0) throw std::invalid_argument("alpha_weights: t must be >= 1");
    std::vector<double> w(t);
    for (std::uint64_t i = 1; i <= t; ++i) {
        double v = learning_rate(i, H);
        for (std::uint64_t j = i + 1; j <= t; ++j) v *= 1.0 - learning_rate(j, H);
        w[i - 1] = v;
    }
    return w;
}

// Confidence radius b(t): a Hoeffding term for the stochastic transitions
// plus a Lipschitz discretization term, each behind its scale knob.
inline double bonus(std::uint64_t t, const LearnerConfig& cfg) {
    if (t == 0) throw std::invalid_argument("bonus: t must be >= 1");
    const double H = cfg.H;
    const double log_term = std::log(4.0 * H * static_cast<double>(cfg.K) / cfg.delta);
    const double td = static_cast<double>(t);
    return cfg.bonus_scale_stochastic * 2.0 * std::sqrt(H * H * H * log_term / td) +
           cfg.bonus_scale_metric * 4.0 * cfg.lipschitz_L * cfg.space.d_max / std::sqrt(td);
}

// V estimate for the next step: min(H, max relevant q_hat), or 0 past the
// horizon (tree_next == nullptr).
inline double v_estimate(const StepPartition* tree_next, const Vec& x, int H) {
    if (tree_next == nullptr) return 0.0;
    double best = 0.0;
    bool any = false;
    detail::for_each_relevant_leaf<const BallNode>(
        *tree_next->root, x, [&](const BallNode& b) {
            if (!any || b.q_hat > best) best = b.q_hat;
            any = true;
        });
    if (!any) throw std::logic_error("v_estimate: no relevant leaf");
    return std::min(static_cast<double>(H), best);
}

enum class TransitionRegularity { total_variation, wasserstein };

// Lipschitz constant of Q* from Lipschitz constants of the primitives:
// L1 on the transition kernel (TV) gives 2*L1*H + L2 with L2 on rewards;
// under the Wasserstein metric (L1 rewards, L2 kernel) the constant is
// sum_{i=0}^{H-h} L1 * L2^i.
inline double lipschitz_from_primitives(TransitionRegularity kind, double L1, double L2,
                                        int H, int h) {
    if (L1 < 0.0 || L2 < 0.0) throw std::invalid_argument("lipschitz constants must be >= 0");
    if (h < 1 || h > H) throw std::invalid_argument("step h out of range");
    if (kind == TransitionRegularity::total_variation)
        return 2.0 * L1 * static_cast<double>(H) + L2;
    double sum = 0.0;
    double pw = 1.0;
    for (int i = 0; i <= H - h; ++i) {
        sum += L1 * pw;
        pw *= L2;
    }
    return sum;
}

struct EnvStepResult {
    double reward = 0.0;
    Vec next_state;
    // Realized arrival for environments that have one (NaN otherwise).
    double arrival = std::numeric_limits<double>::quiet_NaN();
};

struct SplitEvent {
    int step = 0;
    std::uint64_t creation_index = 0;
    int depth = 0;
};

struct EpisodeTrace {
    std::vector<Vec> states;    // H+1 entries
    std::vector<Vec> actions;   // H entries
    std::vector<double> rewards;
    std::vector<std::uint64_t> ball_ids;  // creation_index of the selected ball
    std::vector<double> v_hats;           // V estimate at the visited state, per step
    std::vector<SplitEvent> splits;
    double total_reward() const {
        double s = 0.0;
        for (double r : rewards) s += r;
        return s;
    }
};

// A frozen copy of the trees: acts greedily, never updates.
class GreedyPolicy {
  public:
    GreedyPolicy(std::vector<StepPartition> trees, int H) : trees_(std::move(trees)), H_(H) {}

    Vec act(int h, const Vec& x) const {
        const StepPartition& tree = trees_.at(static_cast<std::size_t>(h - 1));
        return action_midpoint(select_ball(tree, x).region);
    }
    int horizon() const { return H_; }

  private:
    std::vector<StepPartition> trees_;
    int H_;
};

class AdaptiveAgent {
  public:
    explicit AdaptiveAgent(LearnerConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        trees_.reserve(static_cast<std::size_t>(cfg_.H));
        for (int h = 1; h <= cfg_.H; ++h)
            trees_.emplace_back(h, cfg_.space, static_cast<double>(cfg_.H));
    }

    const LearnerConfig& config() const { return cfg_; }
    std::uint64_t episode() const { return episode_; }
    const StepPartition& tree(int h) const { return trees_.at(static_cast<std::size_t>(h - 1)); }
    StepPartition& tree(int h) { return trees_.at(static_cast<std::size_t>(h - 1)); }

    double value_estimate(int h, const Vec& x) const {
        const StepPartition* t =
            h <= cfg_.H ? &trees_[static_cast<std::size_t>(h - 1)] : nullptr;
        return v_estimate(t, x, cfg_.H);
    }

    std::pair<BallNode*, Vec> act(int h, const Vec& x) {
        BallNode& ball = select_ball(tree(h), x);
        return {&ball, action_midpoint(ball.region)};
    }

    // One Q-learning update on the selected ball, then the split check.
    // Returns the split event if the ball was refined.
    std::optional<SplitEvent> update(int h, BallNode* ball, double reward, const Vec& next_state) {
        if (!ball->is_leaf()) throw std::logic_error("update: stale ball (already split)");
        const std::uint64_t t = ++ball->visits;
        const double alpha = learning_rate(t, cfg_.H);
        const double v_next = value_estimate(h + 1, next_state);
        ball->q_hat = (1.0 - alpha) * ball->q_hat + alpha * (reward + v_next + bonus(t, cfg_));
        if (should_split(*ball, cfg_.space.d_max)) {
            split(tree(h), *ball);
            return SplitEvent{h, ball->creation_index, ball->region.depth};
        }
        return std::nullopt;
    }

    template <typename Env>
    EpisodeTrace run_episode(Env& env, const Vec& x1, std::mt19937_64& rng) {
        if (episode_ > cfg_.K) throw std::logic_error("run_episode: past episode budget K");
        EpisodeTrace trace;
        Vec x = x1;
        trace.states.push_back(x);
        for (int h = 1; h <= cfg_.H; ++h) {
            trace.v_hats.push_back(value_estimate(h, x));
            auto [ball, a] = act(h, x);
            trace.ball_ids.push_back(ball->creation_index);
            EnvStepResult out = env.step(h, x, a, rng);
            if (auto ev = update(h, ball, out.reward, out.next_state)) trace.splits.push_back(*ev);
            trace.actions.push_back(std::move(a));
            trace.rewards.push_back(out.reward);
            x = std::move(out.next_state);
            trace.states.push_back(x);
        }
        ++episode_;
        if (!snapshot_all_ && snapshot_episodes_.count(episode_ - 1)) take_snapshot();
        if (snapshot_all_) take_snapshot();
        return trace;
    }

    // Configure which episodes get a policy snapshot for PAC sampling.
    void snapshot_all(bool on) { snapshot_all_ = on; }
    void snapshot_at(std::uint64_t episode) { snapshot_episodes_.insert(episode); }

    GreedyPolicy extract_greedy_policy() const {
        std::vector<StepPartition> copy(trees_.begin(), trees_.end());
        return GreedyPolicy(std::move(copy), cfg_.H);
    }

    // Uniformly random episode's policy among the recorded snapshots.
    const GreedyPolicy& sample_policy(std::mt19937_64& rng) const {
        if (snapshots_.empty()) throw std::logic_error("sample_policy: no snapshots recorded");
        std::uniform_int_distribution<std::size_t> pick(0, snapshots_.size() - 1);
        return snapshots_[pick(rng)];
    }
    const std::vector<GreedyPolicy>& snapshots() const { return snapshots_; }

  private:
    void take_snapshot() { snapshots_.push_back(extract_greedy_policy()); }

    LearnerConfig cfg_;
    std::vector<StepPartition> trees_;
    std::uint64_t episode_ = 1;
    bool snapshot_all_ = false;
    std::set<std::uint64_t> snapshot_episodes_;
    std::vector<GreedyPolicy> snapshots_;
};

}  // namespace aql
