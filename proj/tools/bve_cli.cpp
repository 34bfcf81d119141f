// Command-line driver for viewpoint-planning simulations.
//
//   bve run     --experiment E3 --runs 100 --seed 7 --out results/
//   bve battery --runs 100 --out results/
//   bve sweep   --experiment E5 --loss approach --out results/
//   bve demo    --experiment E1 --seed 42
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 some run
// finished while its viewpoint problem was still infeasible.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <iostream>
#include <optional>
#include <vector>

#include "bve/config.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInfeasible = 3;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::map<std::string, std::optional<std::string>> raw;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "INI-style configuration file");
    cmd->add_option("-o,--out", opts.out_dir, "output directory")->capture_default_str();
    for (const auto& key : bve::config_keys()) {
        std::string names = "--" + key;
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != key) {
            names += ",--" + dashed;
        }
        cmd->add_option(names, opts.raw[key], "override config key " + key);
    }
}

bve::ScenarioConfig load(const CommonOptions& opts) {
    bve::Overrides file;
    if (!opts.config_path.empty()) {
        file = bve::read_config_file(opts.config_path);
    }
    bve::Overrides flags;
    for (const auto& [key, value] : opts.raw) {
        if (value) {
            flags[key] = *value;
        }
    }
    return bve::parse_config(file, bve::read_environment(), flags);
}

bool any_infeasible(const std::vector<bve::ExperimentResult>& results) {
    for (const auto& r : results) {
        if (r.report.infeasible_runs > 0) {
            return true;
        }
    }
    return false;
}

int cmd_run(const CommonOptions& opts) {
    const bve::ScenarioConfig config = load(opts);
    std::vector<bve::ExperimentResult> results{bve::run_experiment(config)};
    bve::emit_results(results, opts.out_dir);
    std::cout << bve::format_metrics_table(std::vector{results.front().report});
    return any_infeasible(results) ? kExitInfeasible : 0;
}

int cmd_battery(const CommonOptions& opts) {
    bve::ScenarioConfig config = load(opts);
    std::vector<bve::ExperimentResult> results;
    std::vector<bve::MetricsReport> reports;
    for (int e = 1; e <= 10; ++e) {
        config.experiment = static_cast<bve::ExperimentId>(e);
        results.push_back(bve::run_experiment(config));
        reports.push_back(results.back().report);
        std::cerr << "finished " << reports.back().experiment << '\n';
    }
    bve::emit_results(results, opts.out_dir);
    std::cout << bve::format_metrics_table(reports);
    return any_infeasible(results) ? kExitInfeasible : 0;
}

int cmd_sweep(const CommonOptions& opts) {
    const bve::ScenarioConfig config = load(opts);
    const auto rows = bve::recoverability_sweep(config);
    bve::emit_sweep(rows, opts.out_dir);
    bve::write_sweep_csv(std::cout, rows);
    return 0;
}

int cmd_demo(const CommonOptions& opts) {
    bve::ScenarioConfig config = load(opts);
    config.runs = 1;
    bve::ExperimentResult result;
    result.records.push_back(bve::run_single(config, config.seed));
    const auto& rec = result.records.front();
    result.report.experiment = bve::to_string(config.experiment);

    std::printf("experiment %s, seed %llu\n", result.report.experiment.c_str(),
                static_cast<unsigned long long>(config.seed));
    std::printf("fruit      (% .4f, % .4f, % .4f)\n", rec.k.x(), rec.k.y(), rec.k.z());
    std::printf("estimate0  (% .4f, % .4f, % .4f)  error %.1f mm\n", rec.x_hat0.x(), rec.x_hat0.y(), rec.x_hat0.z(),
                1e3 * rec.initial_error());
    std::printf("camera0    (% .4f, % .4f, % .4f)\n", rec.c0.x(), rec.c0.y(), rec.c0.z());
    for (const auto& row : rec.rows) {
        std::printf("%3d  c=(% .4f, % .4f, % .4f)  loss=% .6g  err=%7.2f mm  dist=%.3f m  %s\n", row.i, row.c.x(),
                    row.c.y(), row.c.z(), row.loss, 1e3 * row.eucl_err, (row.c - row.x_hat).norm(),
                    std::string(bve::to_string(row.status)).c_str());
    }
    for (const auto& d : rec.diagnostics) {
        std::printf("note: %s\n", d.c_str());
    }
    if (!rec.failed && !rec.rows.empty()) {
        result.report = bve::compute_metrics(std::vector{rec.k}, std::vector{rec.final_estimate()});
        result.report.experiment = bve::to_string(config.experiment);
        result.report.infeasible_runs = rec.ended_infeasible() ? 1 : 0;
    } else {
        result.report.failed_runs = 1;
    }
    result.report.runs = 1;
    result.report.mean_initial_eucl_mm = 1e3 * rec.initial_error();
    std::vector<bve::ExperimentResult> results{std::move(result)};
    bve::emit_results(results, opts.out_dir);
    return any_infeasible(results) ? kExitInfeasible : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Best-viewpoint estimation with a range-only EKF: simulation driver"};
    app.require_subcommand(1);

    CommonOptions run_opts, battery_opts, sweep_opts, demo_opts;
    auto* run = app.add_subcommand("run", "run one experiment");
    auto* battery = app.add_subcommand("battery", "run experiments E1-E10");
    auto* sweep = app.add_subcommand("sweep", "recoverability sweep over the initial estimation error");
    auto* demo = app.add_subcommand("demo", "single seeded run with a per-iteration trace");
    add_common(run, run_opts);
    add_common(battery, battery_opts);
    add_common(sweep, sweep_opts);
    add_common(demo, demo_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) {
            return cmd_run(run_opts);
        }
        if (*battery) {
            return cmd_battery(battery_opts);
        }
        if (*sweep) {
            return cmd_sweep(sweep_opts);
        }
        return cmd_demo(demo_opts);
    } catch (const bve::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const bve::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const bve::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
