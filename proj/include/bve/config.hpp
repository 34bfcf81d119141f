#pragma once

// Structured configuration (INI-style file, BVE_* environment variables,
// command-line overrides) and result writers.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bve/simulation.hpp"

namespace bve {

using Overrides = std::map<std::string, std::string>;

/// Every recognized configuration key, in file order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form; throws ConfigError naming the key.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);
std::string get_setting(const ScenarioConfig& config, std::string_view key);

/// Reads an INI-style file ([section] headers, key = value lines, '#' or ';'
/// comments). Section names are informational; keys are global.
Overrides read_config_file(const std::filesystem::path& path);

/// BVE_<KEY> environment variables for every known key.
Overrides read_environment();

/// defaults < file < environment < flags. Validates the result.
ScenarioConfig parse_config(const Overrides& file, const Overrides& environment, const Overrides& flags);

/// The config in the file format read_config_file() accepts.
std::string write_config(const ScenarioConfig& config);

/// One row per iteration per run. Columns:
/// experiment,run,seed,iter,cx,cy,cz,kx,ky,kz,xhatx,xhaty,xhatz,pxx,pyy,pzz,loss,eucl_err_m,status
void write_runs_csv(std::ostream& os, std::span<const ExperimentResult> results);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

std::string metrics_to_json(std::span<const MetricsReport> reports);
std::vector<MetricsReport> metrics_from_json(const std::string& text);

/// Writes runs.csv and metrics.json into out_dir (created if missing).
void emit_results(std::span<const ExperimentResult> results, const std::filesystem::path& out_dir);
/// Writes sweep.csv into out_dir.
void emit_sweep(std::span<const SweepRow> rows, const std::filesystem::path& out_dir);

/// Table of per-experiment metrics, one line per experiment.
std::string format_metrics_table(std::span<const MetricsReport> reports);

}  // namespace bve
