// Experiment harness: config ingestion, seeded execution, regret
// computation against the grid oracle, and artifact output.
#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include "aql/baselines.hpp"
#include "aql/environments.hpp"
#include "aql/learner.hpp"
#include "aql/oracle.hpp"
#include "aql/partition_io.hpp"

namespace aql {

enum class AgentKind { adaptive, net, no_movement, median };

inline std::string to_string(AgentKind k) {
    switch (k) {
        case AgentKind::adaptive: return "adaptive";
        case AgentKind::net: return "net";
        case AgentKind::no_movement: return "no-movement";
        case AgentKind::median: return "median";
    }
    return "?";
}

struct ExperimentConfig {
    EnvSpec environment = OilConfig{};
    AgentKind agent = AgentKind::adaptive;
    std::uint64_t K = 1000;
    int H = 5;
    double delta = 0.05;
    double lipschitz_L = 1.0;
    double bonus_scale_stochastic = 1.0;
    double bonus_scale_metric = 1.0;
    std::optional<double> epsilon;  // net only; default (KH)^(-1/4)
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> snapshot_episodes;
    int oracle_resolution = 201;
    int quadrature_nodes = 512;
    std::string output_dir;

    double net_epsilon() const {
        return epsilon ? *epsilon : default_epsilon(K, H, 2);
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

inline ArrivalSpec parse_arrival(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "uniform") {
        reject_unknown_keys(j, {"type", "lo", "hi"}, "arrival");
        return UniformArrival{j.at("lo").get<double>(), j.at("hi").get<double>()};
    }
    if (type == "beta") {
        reject_unknown_keys(j, {"type", "alpha", "beta"}, "arrival");
        return BetaArrival{j.at("alpha").get<double>(), j.at("beta").get<double>()};
    }
    throw std::invalid_argument("config: unknown arrival type '" + type + "'");
}

inline nlohmann::json arrival_to_json(const ArrivalSpec& s) {
    if (const auto* u = std::get_if<UniformArrival>(&s))
        return {{"type", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
    const auto& b = std::get<BetaArrival>(s);
    return {{"type", "beta"}, {"alpha", b.a}, {"beta", b.b}};
}

inline EnvSpec parse_environment(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "oil") {
        reject_unknown_keys(j, {"type", "survey", "lambda", "well_location", "noise_sigma",
                                "initial_state"},
                            "environment");
        OilConfig cfg;
        const auto survey = j.value("survey", std::string("laplace"));
        if (survey == "laplace") cfg.survey_kind = OilConfig::Survey::laplace;
        else if (survey == "quadratic") cfg.survey_kind = OilConfig::Survey::quadratic;
        else throw std::invalid_argument("config: unknown survey kind '" + survey + "'");
        cfg.lambda = j.value("lambda", 1.0);
        cfg.well_location = j.value("well_location", 0.75);
        cfg.noise_sigma = j.value("noise_sigma", 0.0);
        cfg.initial_state = j.value("initial_state", 0.0);
        cfg.validate();
        return cfg;
    }
    if (type == "ambulance") {
        reject_unknown_keys(j, {"type", "cost_weight", "arrivals", "preset", "initial_state"},
                            "environment");
        AmbulanceConfig cfg;
        if (j.contains("preset")) {
            if (j.at("preset").get<std::string>() != "shifting-uniform")
                throw std::invalid_argument("config: unknown ambulance preset");
            cfg = shifting_uniform_preset();
        }
        if (j.contains("cost_weight")) cfg.cost_weight = j.at("cost_weight").get<double>();
        if (j.contains("arrivals")) {
            cfg.arrivals.clear();
            for (const auto& a : j.at("arrivals")) cfg.arrivals.push_back(parse_arrival(a));
        }
        if (j.contains("initial_state")) {
            const auto& init = j.at("initial_state");
            if (init.is_string()) {
                if (init.get<std::string>() != "uniform")
                    throw std::invalid_argument("config: initial_state must be a number or 'uniform'");
                cfg.redraw_initial = true;
            } else {
                cfg.initial_state = init.get<double>();
            }
        }
        cfg.validate();
        return cfg;
    }
    throw std::invalid_argument("config: unknown environment type '" + type + "'");
}

inline nlohmann::json environment_to_json(const EnvSpec& spec) {
    if (const auto* oil = std::get_if<OilConfig>(&spec)) {
        return {{"type", "oil"},
                {"survey", oil->survey_kind == OilConfig::Survey::laplace ? "laplace" : "quadratic"},
                {"lambda", oil->lambda},
                {"well_location", oil->well_location},
                {"noise_sigma", oil->noise_sigma},
                {"initial_state", oil->initial_state}};
    }
    const auto& amb = std::get<AmbulanceConfig>(spec);
    nlohmann::json arrivals = nlohmann::json::array();
    for (const auto& a : amb.arrivals) arrivals.push_back(arrival_to_json(a));
    nlohmann::json out = {{"type", "ambulance"},
                          {"cost_weight", amb.cost_weight},
                          {"arrivals", std::move(arrivals)}};
    if (amb.redraw_initial) out["initial_state"] = "uniform";
    else out["initial_state"] = amb.initial_state;
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    detail::reject_unknown_keys(
        j,
        {"environment", "agent", "K", "H", "delta", "lipschitz_L", "bonus_scale_stochastic",
         "bonus_scale_metric", "epsilon", "seed", "snapshot_episodes", "oracle_resolution",
         "quadrature_nodes", "output_dir"},
        "config");
    ExperimentConfig cfg;
    cfg.environment = detail::parse_environment(j.at("environment"));
    const auto agent = j.value("agent", std::string("adaptive"));
    if (agent == "adaptive") cfg.agent = AgentKind::adaptive;
    else if (agent == "net") cfg.agent = AgentKind::net;
    else if (agent == "no-movement") cfg.agent = AgentKind::no_movement;
    else if (agent == "median") cfg.agent = AgentKind::median;
    else throw std::invalid_argument("config: unknown agent '" + agent + "'");
    cfg.K = j.at("K").get<std::uint64_t>();
    cfg.H = j.at("H").get<int>();
    cfg.delta = j.value("delta", 0.05);
    cfg.lipschitz_L = j.value("lipschitz_L", 1.0);
    cfg.bonus_scale_stochastic = j.value("bonus_scale_stochastic", 1.0);
    cfg.bonus_scale_metric = j.value("bonus_scale_metric", 1.0);
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("snapshot_episodes"))
        cfg.snapshot_episodes = j.at("snapshot_episodes").get<std::vector<std::uint64_t>>();
    cfg.oracle_resolution = j.value("oracle_resolution", 201);
    cfg.quadrature_nodes = j.value("quadrature_nodes", 512);
    cfg.output_dir = j.value("output_dir", std::string());
    if (cfg.K < 1 || cfg.H < 1) throw std::invalid_argument("config: K and H must be >= 1");
    if (cfg.delta <= 0.0 || cfg.delta >= 1.0)
        throw std::invalid_argument("config: delta must be in (0,1)");
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j = {{"environment", detail::environment_to_json(cfg.environment)},
                        {"agent", to_string(cfg.agent)},
                        {"K", cfg.K},
                        {"H", cfg.H},
                        {"delta", cfg.delta},
                        {"lipschitz_L", cfg.lipschitz_L},
                        {"bonus_scale_stochastic", cfg.bonus_scale_stochastic},
                        {"bonus_scale_metric", cfg.bonus_scale_metric},
                        {"seed", cfg.seed},
                        {"oracle_resolution", cfg.oracle_resolution},
                        {"quadrature_nodes", cfg.quadrature_nodes}};
    if (cfg.epsilon) j["epsilon"] = *cfg.epsilon;
    if (!cfg.snapshot_episodes.empty()) j["snapshot_episodes"] = cfg.snapshot_episodes;
    return j;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = config_to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct RunRecord {
    nlohmann::json config;
    std::uint64_t config_hash = 0;
    std::vector<double> episode_rewards;
    std::vector<double> initial_states;
    // Leaf count (or net table size) per step after each episode, K rows.
    std::vector<std::vector<std::size_t>> partition_sizes;
    std::vector<SplitEvent> split_log;
    std::vector<nlohmann::json> partition_dumps;  // adaptive only, one per step
    std::vector<double> regret;
    std::vector<double> cumulative_regret;
    double wall_clock_seconds = 0.0;
};

namespace detail {

template <typename Agent, typename Env>
void run_loop(const ExperimentConfig& cfg, Agent& agent, Env& env, RunRecord& record,
              std::mt19937_64& rng,
              const std::function<std::vector<std::size_t>()>& sizes) {
    record.episode_rewards.reserve(cfg.K);
    for (std::uint64_t k = 1; k <= cfg.K; ++k) {
        const Vec x1 = env.initial_state(rng);
        record.initial_states.push_back(x1[0]);
        EpisodeTrace trace = agent.run_episode(env, x1, rng);
        record.episode_rewards.push_back(trace.total_reward());
        for (const auto& ev : trace.splits) record.split_log.push_back(ev);
        record.partition_sizes.push_back(sizes());
    }
}

}  // namespace detail

inline RunRecord run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunRecord record;
    record.config = config_to_json(cfg);
    record.config_hash = config_hash(cfg);

    std::mt19937_64 rng(cfg.seed);
    auto with_env = [&](auto&& run) {
        if (const auto* oil = std::get_if<OilConfig>(&cfg.environment)) {
            OilEnv env(*oil);
            run(env);
        } else {
            AmbulanceEnv env(std::get<AmbulanceConfig>(cfg.environment));
            run(env);
        }
    };

    switch (cfg.agent) {
        case AgentKind::adaptive: {
            LearnerConfig lc;
            lc.H = cfg.H;
            lc.K = cfg.K;
            lc.delta = cfg.delta;
            lc.lipschitz_L = cfg.lipschitz_L;
            lc.bonus_scale_stochastic = cfg.bonus_scale_stochastic;
            lc.bonus_scale_metric = cfg.bonus_scale_metric;
            AdaptiveAgent agent(lc);
            for (auto e : cfg.snapshot_episodes) agent.snapshot_at(e);
            with_env([&](auto& env) {
                detail::run_loop(cfg, agent, env, record, rng, [&] {
                    std::vector<std::size_t> s;
                    for (int h = 1; h <= cfg.H; ++h) s.push_back(agent.tree(h).leaf_count);
                    return s;
                });
            });
            for (int h = 1; h <= cfg.H; ++h)
                record.partition_dumps.push_back(dump_partition(agent.tree(h)));
            break;
        }
        case AgentKind::net: {
            NetConfig nc;
            nc.epsilon = cfg.net_epsilon();
            nc.H = cfg.H;
            nc.K = cfg.K;
            nc.delta = cfg.delta;
            nc.lipschitz_L = cfg.lipschitz_L;
            nc.bonus_scale_stochastic = cfg.bonus_scale_stochastic;
            nc.bonus_scale_metric = cfg.bonus_scale_metric;
            NetAgent agent(nc);
            with_env([&](auto& env) {
                detail::run_loop(cfg, agent, env, record, rng, [&] {
                    return std::vector<std::size_t>(static_cast<std::size_t>(cfg.H),
                                                    agent.table_size());
                });
            });
            break;
        }
        case AgentKind::no_movement: {
            NoMovementAgent agent(cfg.H);
            with_env([&](auto& env) {
                detail::run_loop(cfg, agent, env, record, rng,
                                 [&] { return std::vector<std::size_t>(); });
            });
            break;
        }
        case AgentKind::median: {
            MedianAgent agent(cfg.H);
            with_env([&](auto& env) {
                detail::run_loop(cfg, agent, env, record, rng,
                                 [&] { return std::vector<std::size_t>(); });
            });
            break;
        }
    }

    const OracleGrid oracle =
        compute_oracle(cfg.environment, cfg.H, cfg.oracle_resolution, cfg.quadrature_nodes);
    auto [regret, cumulative] =
        per_episode_regret(record.episode_rewards, oracle, record.initial_states);
    record.regret = std::move(regret);
    record.cumulative_regret = std::move(cumulative);

    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline void write_artifacts(const RunRecord& record, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "config.json");
        out << record.config.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "rewards.csv");
        out << "episode,reward,cum_regret\n";
        for (std::size_t k = 0; k < record.episode_rewards.size(); ++k)
            out << (k + 1) << ',' << format_double(record.episode_rewards[k]) << ','
                << format_double(record.cumulative_regret[k]) << "\n";
    }
    for (std::size_t i = 0; i < record.partition_dumps.size(); ++i) {
        std::ofstream out(dir / ("partition_h" + std::to_string(i + 1) + ".json"));
        out << record.partition_dumps[i].dump() << "\n";
    }
    {
        double sum = 0.0;
        for (double r : record.episode_rewards) sum += r;
        nlohmann::json sizes = nlohmann::json::array();
        if (!record.partition_sizes.empty())
            for (std::size_t s : record.partition_sizes.back()) sizes.push_back(s);
        nlohmann::json summary = {
            {"config_hash", record.config_hash},
            {"episodes", record.episode_rewards.size()},
            {"mean_episode_reward",
             record.episode_rewards.empty() ? 0.0
                                            : sum / static_cast<double>(record.episode_rewards.size())},
            {"final_cumulative_regret",
             record.cumulative_regret.empty() ? 0.0 : record.cumulative_regret.back()},
            {"final_partition_sizes", std::move(sizes)},
            {"split_events", record.split_log.size()},
            {"wall_clock_seconds", record.wall_clock_seconds}};
        std::ofstream out(dir / "summary.json");
        out << summary.dump(2) << "\n";
    }
}

struct SweepResult {
    std::string value;
    RunRecord record;
    std::string error;  // nonempty if the sub-run failed
};

// Independent runs over one parameter; a failing value is reported without
// aborting its siblings.
inline std::vector<SweepResult> sweep(const ExperimentConfig& base, const std::string& param,
                                      const std::vector<std::string>& values) {
    std::vector<SweepResult> results;
    for (const auto& value : values) {
        SweepResult res;
        res.value = value;
        try {
            ExperimentConfig cfg = base;
            if (param == "K") cfg.K = std::stoull(value);
            else if (param == "seed") cfg.seed = std::stoull(value);
            else if (param == "epsilon") cfg.epsilon = std::stod(value);
            else if (param == "bonus_scale_stochastic") cfg.bonus_scale_stochastic = std::stod(value);
            else if (param == "bonus_scale_metric") cfg.bonus_scale_metric = std::stod(value);
            else if (param == "lambda") std::get<OilConfig>(cfg.environment).lambda = std::stod(value);
            else if (param == "c") {
                if (auto* oil = std::get_if<OilConfig>(&cfg.environment))
                    oil->well_location = std::stod(value);
                else std::get<AmbulanceConfig>(cfg.environment).cost_weight = std::stod(value);
            } else throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
            res.record = run_experiment(cfg);
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace aql
