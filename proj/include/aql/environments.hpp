// Benchmark MDPs on S = A = [0,1]: the oil discovery problem
// (deterministic transitions, survey-function rewards) and the ambulance
// relocation problem (stochastic arrivals, travel-cost rewards).
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "aql/learner.hpp"

namespace aql {

struct UniformArrival {
    double lo = 0.0;
    double hi = 1.0;
};
struct BetaArrival {
    double a = 1.0;
    double b = 1.0;
};
using ArrivalSpec = std::variant<UniformArrival, BetaArrival>;

inline void validate(const ArrivalSpec& spec) {
    if (const auto* u = std::get_if<UniformArrival>(&spec)) {
        if (!(u->lo < u->hi) || u->lo < 0.0 || u->hi > 1.0)
            throw std::invalid_argument("uniform arrival: need 0 <= lo < hi <= 1");
    } else {
        const auto& b = std::get<BetaArrival>(spec);
        if (b.a <= 0.0 || b.b <= 0.0)
            throw std::invalid_argument("beta arrival: parameters must be positive");
    }
}

inline double sample_arrival(const ArrivalSpec& spec, std::mt19937_64& rng) {
    if (const auto* u = std::get_if<UniformArrival>(&spec)) {
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        return u->lo + (u->hi - u->lo) * dist(rng);
    }
    const auto& b = std::get<BetaArrival>(spec);
    std::gamma_distribution<double> ga(b.a, 1.0), gb(b.b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return std::clamp(x / (x + y), 0.0, 1.0);
}

// Deterministic quadrature nodes for E[g(X')] under the arrival law:
// n equal-mass nodes at the quantiles of the midpoints (q+0.5)/n. The
// beta quantile function is inverted numerically from a fine CDF table.
inline std::vector<double> quadrature_nodes(const ArrivalSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("quadrature_nodes: n must be >= 1");
    std::vector<double> nodes(static_cast<std::size_t>(n));
    if (const auto* u = std::get_if<UniformArrival>(&spec)) {
        for (int q = 0; q < n; ++q)
            nodes[static_cast<std::size_t>(q)] =
                u->lo + (u->hi - u->lo) * (q + 0.5) / n;
        return nodes;
    }
    const auto& b = std::get<BetaArrival>(spec);
    const int grid = 8192;
    const double log_beta = std::lgamma(b.a) + std::lgamma(b.b) - std::lgamma(b.a + b.b);
    auto pdf = [&](double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::exp((b.a - 1.0) * std::log(x) + (b.b - 1.0) * std::log1p(-x) - log_beta);
    };
    // Trapezoid CDF on midpoints of the fine grid, normalized.
    std::vector<double> cdf(static_cast<std::size_t>(grid) + 1, 0.0);
    for (int i = 0; i < grid; ++i)
        cdf[static_cast<std::size_t>(i) + 1] =
            cdf[static_cast<std::size_t>(i)] + pdf((i + 0.5) / grid) / grid;
    const double total = cdf.back();
    for (auto& v : cdf) v /= total;
    std::size_t lo = 0;
    for (int q = 0; q < n; ++q) {
        const double target = (q + 0.5) / n;
        while (lo + 1 < cdf.size() && cdf[lo + 1] < target) ++lo;
        const double c0 = cdf[lo], c1 = cdf[lo + 1];
        const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        nodes[static_cast<std::size_t>(q)] = (static_cast<double>(lo) + frac) / grid;
    }
    return nodes;
}

struct OilConfig {
    enum class Survey { laplace, quadratic };
    Survey survey_kind = Survey::laplace;
    double lambda = 1.0;
    double well_location = 0.75;  // c
    double noise_sigma = 0.0;
    double initial_state = 0.0;

    void validate() const {
        if (well_location < 0.0 || well_location > 1.0)
            throw std::invalid_argument("oil: well location must be in [0,1]");
        if (lambda < 0.0 || noise_sigma < 0.0)
            throw std::invalid_argument("oil: lambda and noise_sigma must be >= 0");
    }

    double survey(double a) const {
        const double d = a - well_location;
        return survey_kind == Survey::laplace ? std::exp(-lambda * std::abs(d))
                                              : 1.0 - lambda * d * d;
    }
    // Expected (noiseless) reward.
    double mean_reward(double x, double a) const {
        return std::clamp(std::max(0.0, survey(a) - std::abs(x - a)), 0.0, 1.0);
    }
};

struct AmbulanceConfig {
    double cost_weight = 1.0;  // c: relocation vs service trade-off
    std::vector<ArrivalSpec> arrivals;  // one per step h
    // Initial state: fixed value, or redrawn uniformly when redraw_initial.
    double initial_state = 0.5;
    bool redraw_initial = false;

    void validate() const {
        if (cost_weight < 0.0 || cost_weight > 1.0)
            throw std::invalid_argument("ambulance: cost weight must be in [0,1]");
        if (arrivals.empty()) throw std::invalid_argument("ambulance: no arrival specs");
        for (const auto& s : arrivals) aql::validate(s);
    }

    double reward(double x, double a, double arrival) const {
        const double c = cost_weight;
        return std::clamp(1.0 - (c * std::abs(x - a) + (1.0 - c) * std::abs(arrival - a)),
                          0.0, 1.0);
    }
};

// Figure-1 style configuration: H = 5 uniform arrival windows sweeping
// across [0,1], c = 0.
inline AmbulanceConfig shifting_uniform_preset() {
    AmbulanceConfig cfg;
    cfg.cost_weight = 0.0;
    cfg.arrivals = {UniformArrival{0.0, 0.25}, UniformArrival{0.25, 0.5},
                    UniformArrival{0.5, 0.75}, UniformArrival{0.75, 1.0},
                    UniformArrival{0.45, 0.55}};
    return cfg;
}

class OilEnv {
  public:
    explicit OilEnv(OilConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const OilConfig& config() const { return cfg_; }
    Vec initial_state(std::mt19937_64&) const { return {cfg_.initial_state}; }

    EnvStepResult step(int, const Vec& x, const Vec& a, std::mt19937_64& rng) const {
        double noise = 0.0;
        if (cfg_.noise_sigma > 0.0) {
            std::normal_distribution<double> dist(0.0, cfg_.noise_sigma);
            do {
                noise = dist(rng);
            } while (noise < -1.0 || noise > 1.0);
        }
        const double raw = std::max(0.0, cfg_.survey(a[0]) + noise - std::abs(x[0] - a[0]));
        EnvStepResult out;
        out.reward = std::clamp(raw, 0.0, 1.0);
        out.next_state = {a[0]};
        return out;
    }

  private:
    OilConfig cfg_;
};

class AmbulanceEnv {
  public:
    explicit AmbulanceEnv(AmbulanceConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const AmbulanceConfig& config() const { return cfg_; }
    Vec initial_state(std::mt19937_64& rng) const {
        if (!cfg_.redraw_initial) return {cfg_.initial_state};
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        return {dist(rng)};
    }

    const ArrivalSpec& arrival_spec(int h) const {
        return cfg_.arrivals[std::min<std::size_t>(static_cast<std::size_t>(h - 1),
                                                   cfg_.arrivals.size() - 1)];
    }

    EnvStepResult step(int h, const Vec& x, const Vec& a, std::mt19937_64& rng) const {
        const double arrival = sample_arrival(arrival_spec(h), rng);
        EnvStepResult out;
        out.reward = cfg_.reward(x[0], a[0], arrival);
        out.next_state = {arrival};
        out.arrival = arrival;
        return out;
    }

  private:
    AmbulanceConfig cfg_;
};

using EnvSpec = std::variant<OilConfig, AmbulanceConfig>;

}  // namespace aql
