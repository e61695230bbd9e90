// Command line front end: run experiments, sweep parameters, compute the
// value-iteration oracle, check dumped partitions, and print dumps.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "aql/checks.hpp"
#include "aql/harness.hpp"

namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::string out_dir) {
    aql::ExperimentConfig cfg = aql::parse_config(load_json(config_path));
    if (seed) cfg.seed = *seed;
    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (out_dir.empty()) out_dir = "run_" + std::to_string(aql::config_hash(cfg));
    aql::RunRecord record = aql::run_experiment(cfg);
    aql::write_artifacts(record, out_dir);
    const double mean = record.episode_rewards.empty()
                            ? 0.0
                            : std::accumulate(record.episode_rewards.begin(),
                                              record.episode_rewards.end(), 0.0) /
                                  static_cast<double>(record.episode_rewards.size());
    std::cout << "wrote " << out_dir << " (mean episode reward " << mean
              << ", final cumulative regret "
              << (record.cumulative_regret.empty() ? 0.0 : record.cumulative_regret.back())
              << ")\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv, std::string out_dir) {
    aql::ExperimentConfig base = aql::parse_config(load_json(config_path));
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) values.push_back(item);
    if (out_dir.empty()) out_dir = base.output_dir.empty() ? "sweep" : base.output_dir;

    auto results = aql::sweep(base, param, values);
    bool any_failed = false;
    std::cout << param << ",mean_episode_reward,final_cum_regret,status\n";
    for (const auto& res : results) {
        if (!res.error.empty()) {
            any_failed = true;
            std::cout << res.value << ",,," << "FAILED: " << res.error << "\n";
            continue;
        }
        aql::write_artifacts(res.record, fs::path(out_dir) / (param + "=" + res.value));
        const auto& r = res.record.episode_rewards;
        const double mean =
            r.empty() ? 0.0 : std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
        std::cout << res.value << ',' << aql::format_double(mean) << ','
                  << aql::format_double(res.record.cumulative_regret.empty()
                                            ? 0.0
                                            : res.record.cumulative_regret.back())
                  << ",ok\n";
    }
    return any_failed ? 1 : 0;
}

int cmd_oracle(const std::string& config_path, int resolution, const std::string& out_file) {
    aql::ExperimentConfig cfg = aql::parse_config(load_json(config_path));
    aql::OracleGrid g =
        aql::compute_oracle(cfg.environment, cfg.H, resolution, cfg.quadrature_nodes);
    nlohmann::json out = {{"resolution", g.m}, {"H", g.H}, {"v", g.v}};
    std::ofstream f(out_file);
    f << out.dump() << "\n";
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

int cmd_check(const std::string& run_dir) {
    bool all_pass = true;
    std::vector<const aql::StepPartition*> finals;
    std::vector<aql::StepPartition> trees;
    for (int h = 1;; ++h) {
        const fs::path p = fs::path(run_dir) / ("partition_h" + std::to_string(h) + ".json");
        if (!fs::exists(p)) break;
        trees.push_back(aql::partition_from_dump(load_json(p.string())));
    }
    if (trees.empty()) {
        std::cerr << "no partition dumps found in " << run_dir << "\n";
        return 2;
    }
    const auto cfg = load_json((fs::path(run_dir) / "config.json").string());
    const auto K = cfg.at("K").get<std::uint64_t>();
    for (const auto& tree : trees) {
        auto part = aql::check_partition_invariants(tree);
        auto vis = aql::check_visit_bounds(tree, tree.d_max);
        std::cout << "step " << tree.step << ": partition invariants "
                  << (part.pass ? "PASS" : "FAIL") << ", visit bounds "
                  << (vis.pass ? "PASS" : "FAIL") << "\n";
        for (const auto& f : part.failures) std::cout << "  " << f << "\n";
        for (const auto& f : vis.failures) std::cout << "  " << f << "\n";
        all_pass = all_pass && part.pass && vis.pass;
        finals.push_back(&tree);
    }
    // Size bound checked with the constant fitted to the observed trees.
    double fitted = 1.0;
    for (const auto* t : finals)
        fitted = std::max(fitted, static_cast<double>(t->leaf_count) /
                                      std::pow(static_cast<double>(K), 0.5));
    auto bb = aql::check_blackbox_conditions(finals, K, 2.0, fitted * 1.0001);
    std::cout << "black-box conditions: nestedness " << (bb.nestedness.pass ? "PASS" : "FAIL")
              << ", visit growth " << (bb.visit_growth.pass ? "PASS" : "FAIL")
              << ", size bound " << (bb.size_bound.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& f : bb.nestedness.failures) std::cout << "  " << f << "\n";
    for (const auto& f : bb.visit_growth.failures) std::cout << "  " << f << "\n";
    for (const auto& f : bb.size_bound.failures) std::cout << "  " << f << "\n";
    all_pass = all_pass && bb.pass();
    std::cout << (all_pass ? "ALL CHECKS PASS" : "CHECKS FAILED") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_dump_partition(const std::string& run_dir, int step) {
    const fs::path p = fs::path(run_dir) / ("partition_h" + std::to_string(step) + ".json");
    std::ifstream in(p);
    if (!in) {
        std::cerr << "no partition dump for step " << step << " in " << run_dir << "\n";
        return 2;
    }
    std::cout << in.rdbuf();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Q-learning simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, param, values, run_dir, out_file;
    std::optional<std::uint64_t> seed;
    int resolution = 201;
    int step = 1;

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "output directory");

    auto* sw = app.add_subcommand("sweep", "run a parameter sweep");
    sw->add_option("--config", config_path, "experiment config (JSON)")->required();
    sw->add_option("--param", param, "parameter to sweep")->required();
    sw->add_option("--values", values, "comma separated values")->required();
    sw->add_option("--out", out_dir, "output directory");

    auto* orc = app.add_subcommand("oracle", "compute the value-iteration oracle");
    orc->add_option("--config", config_path, "experiment config (JSON)")->required();
    orc->add_option("--resolution", resolution, "grid resolution");
    orc->add_option("--out", out_file, "output file")->required();

    auto* chk = app.add_subcommand("check", "run invariant checkers on dumped artifacts");
    chk->add_option("--run", run_dir, "run directory")->required();

    auto* dump = app.add_subcommand("dump-partition", "print a partition dump");
    dump->add_option("--run", run_dir, "run directory")->required();
    dump->add_option("--step", step, "step h")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out_dir);
        if (sw->parsed()) return cmd_sweep(config_path, param, values, out_dir);
        if (orc->parsed()) return cmd_oracle(config_path, resolution, out_file);
        if (chk->parsed()) return cmd_check(run_dir);
        if (dump->parsed()) return cmd_dump_partition(run_dir, step);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
