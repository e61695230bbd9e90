// Backward-induction oracle for Q* and V* on a uniform grid, plus the
// regret-bound diagnostic calculator.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "aql/environments.hpp"

namespace aql {

struct OracleGrid {
    int m = 2;  // grid resolution per axis
    int H = 1;
    // v[h-1] has m entries for h in [1, H+1] (v[H] is identically 0).
    std::vector<std::vector<double>> v;
    // q[h-1] has m*m entries, state-major.
    std::vector<std::vector<double>> q;

    double grid_point(int i) const { return static_cast<double>(i) / (m - 1); }
    int snap(double x) const {
        const int i = static_cast<int>(std::lround(x * (m - 1)));
        return std::clamp(i, 0, m - 1);
    }
    double v_at(int h, double x) const {
        if (h > H) return 0.0;
        return v[static_cast<std::size_t>(h - 1)][static_cast<std::size_t>(snap(x))];
    }
    double q_at(int h, double x, double a) const {
        return q[static_cast<std::size_t>(h - 1)]
                [static_cast<std::size_t>(snap(x)) * static_cast<std::size_t>(m) +
                 static_cast<std::size_t>(snap(a))];
    }
};

// Exact backward induction for the oil problem (deterministic transitions;
// the expectation over reward noise is taken at sigma = 0) and quadrature
// backward induction for the ambulance problem.
inline OracleGrid compute_oracle(const EnvSpec& spec, int H, int m, int quad_nodes = 512) {
    if (m < 2) throw std::invalid_argument("compute_oracle: m must be >= 2");
    OracleGrid g;
    g.m = m;
    g.H = H;
    g.v.assign(static_cast<std::size_t>(H) + 1, std::vector<double>(static_cast<std::size_t>(m), 0.0));
    g.q.assign(static_cast<std::size_t>(H),
               std::vector<double>(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0));

    for (int h = H; h >= 1; --h) {
        auto& qh = g.q[static_cast<std::size_t>(h - 1)];
        auto& vh = g.v[static_cast<std::size_t>(h - 1)];
        const auto& vnext = g.v[static_cast<std::size_t>(h)];
        if (const auto* oil = std::get_if<OilConfig>(&spec)) {
            for (int ai = 0; ai < m; ++ai) {
                const double a = g.grid_point(ai);
                const double future = vnext[static_cast<std::size_t>(ai)];  // next state = a
                const double f = oil->survey(a);
                for (int xi = 0; xi < m; ++xi) {
                    const double x = g.grid_point(xi);
                    qh[static_cast<std::size_t>(xi) * static_cast<std::size_t>(m) +
                       static_cast<std::size_t>(ai)] =
                        std::clamp(std::max(0.0, f - std::abs(x - a)), 0.0, 1.0) + future;
                }
            }
        } else {
            const auto& amb = std::get<AmbulanceConfig>(spec);
            const auto& arr = amb.arrivals[std::min<std::size_t>(
                static_cast<std::size_t>(h - 1), amb.arrivals.size() - 1)];
            const auto nodes = quadrature_nodes(arr, quad_nodes);
            const double w = 1.0 / static_cast<double>(nodes.size());
            // Per-action expectation of the service cost and future value;
            // the relocation cost separates out as c*|x-a|.
            std::vector<double> base(static_cast<std::size_t>(m), 0.0);
            for (int ai = 0; ai < m; ++ai) {
                const double a = g.grid_point(ai);
                double acc = 0.0;
                for (double arrival : nodes)
                    acc += (1.0 - amb.cost_weight) * std::abs(arrival - a) -
                           vnext[static_cast<std::size_t>(g.snap(arrival))];
                base[static_cast<std::size_t>(ai)] = 1.0 - w * acc;
            }
            for (int xi = 0; xi < m; ++xi) {
                const double x = g.grid_point(xi);
                for (int ai = 0; ai < m; ++ai) {
                    const double a = g.grid_point(ai);
                    qh[static_cast<std::size_t>(xi) * static_cast<std::size_t>(m) +
                       static_cast<std::size_t>(ai)] =
                        base[static_cast<std::size_t>(ai)] - amb.cost_weight * std::abs(x - a);
                }
            }
        }
        for (int xi = 0; xi < m; ++xi) {
            double best = qh[static_cast<std::size_t>(xi) * static_cast<std::size_t>(m)];
            for (int ai = 1; ai < m; ++ai)
                best = std::max(best, qh[static_cast<std::size_t>(xi) * static_cast<std::size_t>(m) +
                                         static_cast<std::size_t>(ai)]);
            vh[static_cast<std::size_t>(xi)] = best;
        }
    }
    return g;
}

// Realized-reward regret surrogate: V*_1(x_1^k) minus the episode's total
// reward, plus the cumulative sum.
inline std::pair<std::vector<double>, std::vector<double>> per_episode_regret(
    const std::vector<double>& episode_rewards, const OracleGrid& oracle,
    const std::vector<double>& initial_states) {
    if (episode_rewards.size() != initial_states.size())
        throw std::invalid_argument("per_episode_regret: length mismatch");
    std::vector<double> regret(episode_rewards.size());
    std::vector<double> cumulative(episode_rewards.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < episode_rewards.size(); ++k) {
        regret[k] = oracle.v_at(1, initial_states[k]) - episode_rewards[k];
        sum += regret[k];
        cumulative[k] = sum;
    }
    return {std::move(regret), std::move(cumulative)};
}

// Numeric value of the refined regret bound:
//   3H^2 + 6*sqrt(2 H^3 K ln(4HK/delta))
//   + 96 H (sqrt(H^3 ln(4HK/delta)) + L d_max)
//     * inf_{r0} ( K r0 / d_max + sum_{r = d_max 2^-i, r >= r0} N_r d_max / r )
// with the infimum taken over the dyadic grid of r0.
inline double bound_diagnostic(std::uint64_t K, int H, double delta, double L, double d_max,
                               const std::function<double(double)>& covering_number) {
    const double Kd = static_cast<double>(K);
    const double Hd = static_cast<double>(H);
    const double log_term = std::log(4.0 * Hd * Kd / delta);
    double inner = std::numeric_limits<double>::infinity();
    double sum_nr = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double r = d_max * std::ldexp(1.0, -i);
        sum_nr += covering_number(r) * d_max / r;
        inner = std::min(inner, Kd * r / d_max + sum_nr);
    }
    return 3.0 * Hd * Hd + 6.0 * std::sqrt(2.0 * Hd * Hd * Hd * Kd * log_term) +
           96.0 * Hd * (std::sqrt(Hd * Hd * Hd * log_term) + L * d_max) * inner;
}

// Default covering profile N_r = c * r^-d for covering dimension d.
inline std::function<double(double)> covering_profile(double c, double d) {
    return [c, d](double r) { return c * std::pow(r, -d); };
}

}  // namespace aql
