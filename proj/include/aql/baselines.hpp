// Comparison agents: Q-learning on a fixed epsilon-net of the
// state-action space, and the two ambulance heuristics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aql/learner.hpp"

namespace aql {

// Recommended net spacing (K*H)^(-1/(d+2)); d = 2 gives (KH)^(-1/4).
inline double default_epsilon(std::uint64_t K, int H, int d) {
    if (K < 1 || H < 1 || d < 0) throw std::invalid_argument("default_epsilon: bad arguments");
    return std::pow(static_cast<double>(K) * static_cast<double>(H),
                    -1.0 / (static_cast<double>(d) + 2.0));
}

struct NetConfig {
    double epsilon = 0.1;
    int H = 1;
    std::uint64_t K = 1;
    double delta = 0.05;
    double lipschitz_L = 1.0;
    double bonus_scale_stochastic = 1.0;
    double bonus_scale_metric = 1.0;

    void validate() const {
        if (epsilon <= 0.0 || epsilon > 1.0)
            throw std::invalid_argument("NetConfig: epsilon must be in (0,1]");
        if (H < 1 || K < 1) throw std::invalid_argument("NetConfig: H, K must be >= 1");
        if (delta <= 0.0 || delta >= 1.0)
            throw std::invalid_argument("NetConfig: delta must be in (0,1)");
    }
};

// Tabular Q-learning over a fixed uniform grid of cell centers. The grid
// has ceil(1/epsilon) cells per axis (spacing shrinks when 1/epsilon is
// not an integer, so the rectangles always tile [0,1]).
class NetAgent {
  public:
    explicit NetAgent(NetConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        grid_ = static_cast<int>(std::ceil(1.0 / cfg_.epsilon - 1e-12));
        const std::size_t cells = static_cast<std::size_t>(grid_) * static_cast<std::size_t>(grid_);
        q_.assign(static_cast<std::size_t>(cfg_.H) * cells, static_cast<double>(cfg_.H));
        n_.assign(static_cast<std::size_t>(cfg_.H) * cells, 0);
    }

    const NetConfig& config() const { return cfg_; }
    int grid_points() const { return grid_; }
    std::size_t table_size() const {
        return static_cast<std::size_t>(grid_) * static_cast<std::size_t>(grid_);
    }
    double grid_center(int i) const { return (i + 0.5) / grid_; }

    // Nearest grid center; ties go to the smaller coordinate.
    int snap(double v) const {
        int best = 0;
        double best_d = std::abs(v - grid_center(0));
        const int i0 = std::clamp(static_cast<int>(std::floor(v * grid_)), 0, grid_ - 1);
        for (int i = std::max(0, i0 - 1); i <= std::min(grid_ - 1, i0 + 1); ++i) {
            const double d = std::abs(v - grid_center(i));
            if (d < best_d) {
                best = i;
                best_d = d;
            }
        }
        return best;
    }

    double q_value(int h, int xi, int ai) const { return q_[index(h, xi, ai)]; }
    std::uint64_t visit_count(int h, int xi, int ai) const { return n_[index(h, xi, ai)]; }

    // Greedy action at the snapped state; ties to the smaller action index.
    struct Choice {
        int state_index;
        int action_index;
        Vec action;
    };
    Choice act(int h, const Vec& x) const {
        const int xi = snap(x[0]);
        int best = 0;
        for (int ai = 1; ai < grid_; ++ai)
            if (q_value(h, xi, ai) > q_value(h, xi, best)) best = ai;
        return {xi, best, {grid_center(best)}};
    }

    double value_estimate(int h, const Vec& x) const {
        if (h > cfg_.H) return 0.0;
        const int xi = snap(x[0]);
        double best = q_value(h, xi, 0);
        for (int ai = 1; ai < grid_; ++ai) best = std::max(best, q_value(h, xi, ai));
        return std::min(static_cast<double>(cfg_.H), best);
    }

    double net_bonus(std::uint64_t t) const {
        const double H = cfg_.H;
        const double log_term = std::log(4.0 * H * static_cast<double>(cfg_.K) / cfg_.delta);
        const double td = static_cast<double>(t);
        return cfg_.bonus_scale_stochastic * 2.0 * std::sqrt(H * H * H * log_term / td) +
               cfg_.bonus_scale_metric * 4.0 * cfg_.lipschitz_L * cfg_.epsilon / std::sqrt(td);
    }

    void update(int h, const Choice& chosen, double reward, const Vec& next_state) {
        const std::size_t idx = index(h, chosen.state_index, chosen.action_index);
        const std::uint64_t t = ++n_[idx];
        const double alpha = learning_rate(t, cfg_.H);
        q_[idx] = (1.0 - alpha) * q_[idx] +
                  alpha * (reward + value_estimate(h + 1, next_state) + net_bonus(t));
    }

    template <typename Env>
    EpisodeTrace run_episode(Env& env, const Vec& x1, std::mt19937_64& rng) {
        EpisodeTrace trace;
        Vec x = x1;
        trace.states.push_back(x);
        for (int h = 1; h <= cfg_.H; ++h) {
            trace.v_hats.push_back(value_estimate(h, x));
            Choice choice = act(h, x);
            EnvStepResult out = env.step(h, x, choice.action, rng);
            update(h, choice, out.reward, out.next_state);
            trace.actions.push_back(choice.action);
            trace.rewards.push_back(out.reward);
            x = out.next_state;
            trace.states.push_back(x);
        }
        return trace;
    }

  private:
    std::size_t index(int h, int xi, int ai) const {
        return (static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(grid_) +
                static_cast<std::size_t>(xi)) *
                   static_cast<std::size_t>(grid_) +
               static_cast<std::size_t>(ai);
    }

    NetConfig cfg_;
    int grid_ = 1;
    std::vector<double> q_;
    std::vector<std::uint64_t> n_;
};

// Stay put: the ambulance pays only the service cost.
inline Vec heuristic_no_movement(const Vec& x) { return x; }

// Lower median of the observed arrivals (mean of the two middles for an
// even count); 0.5 before any arrival has been seen.
inline double heuristic_median(std::vector<double> arrival_history) {
    if (arrival_history.empty()) return 0.5;
    std::sort(arrival_history.begin(), arrival_history.end());
    const std::size_t n = arrival_history.size();
    if (n % 2 == 1) return arrival_history[n / 2];
    return 0.5 * (arrival_history[n / 2 - 1] + arrival_history[n / 2]);
}

// Running-median agent matching the episode-loop shape of the learners.
class MedianAgent {
  public:
    explicit MedianAgent(int H) : H_(H) {}

    template <typename Env>
    EpisodeTrace run_episode(Env& env, const Vec& x1, std::mt19937_64& rng) {
        EpisodeTrace trace;
        Vec x = x1;
        trace.states.push_back(x);
        for (int h = 1; h <= H_; ++h) {
            Vec a = {heuristic_median(history_)};
            EnvStepResult out = env.step(h, x, a, rng);
            if (!std::isnan(out.arrival)) history_.push_back(out.arrival);
            trace.actions.push_back(std::move(a));
            trace.rewards.push_back(out.reward);
            x = out.next_state;
            trace.states.push_back(x);
        }
        return trace;
    }

  private:
    int H_;
    std::vector<double> history_;
};

class NoMovementAgent {
  public:
    explicit NoMovementAgent(int H) : H_(H) {}

    template <typename Env>
    EpisodeTrace run_episode(Env& env, const Vec& x1, std::mt19937_64& rng) {
        EpisodeTrace trace;
        Vec x = x1;
        trace.states.push_back(x);
        for (int h = 1; h <= H_; ++h) {
            Vec a = heuristic_no_movement(x);
            EnvStepResult out = env.step(h, x, a, rng);
            trace.actions.push_back(std::move(a));
            trace.rewards.push_back(out.reward);
            x = out.next_state;
            trace.states.push_back(x);
        }
        return trace;
    }

  private:
    int H_;
};

}  // namespace aql
