#pragma once

// Monte Carlo harness: scenario sampling, the closed viewpoint/filter loop,
// experiment batteries, error metrics and recoverability sweeps.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bve/belief.hpp"
#include "bve/constraints.hpp"
#include "bve/ekf.hpp"
#include "bve/objective.hpp"
#include "bve/optimizer.hpp"

namespace bve {

/// Which covariance the viewpoint search treats as its prior.
enum class BeliefSource {
    Fused,  ///< fusion of P0 with the rotated camera covariance of every visited viewpoint
    Ekf,    ///< the filter's current estimation covariance P
};

struct SweepSettings {
    double max_error = 0.5;  ///< m
    double step = 0.01;      ///< m
    int sims_per_level = 10;
};

struct ScenarioConfig {
    ExperimentId experiment = ExperimentId::E1;
    int runs = 100;
    int iterations = 30;
    std::uint64_t seed = 1;

    Covariance3 sigma_c = Covariance3::diagonal(0.05 * 0.05, 0.01 * 0.01, 0.01 * 0.01);
    ExperimentParams constraints{};
    std::optional<LossFamily> loss_override;
    SigmoidParams sigmoid{};

    double process_noise = 1e-6;  ///< isotropic Q per step, m^2
    bool measurement_noise = true;
    double initial_bias = 0.15;  ///< per-axis uniform half-width, m
    CovarianceUpdate covariance_update = CovarianceUpdate::Simple;
    BeliefSource belief_source = BeliefSource::Fused;

    SolverSettings solver{};
    SweepSettings sweep{};

    /// Throws ConfigError on the first invalid field.
    void validate() const;
    LossKind loss() const;
};

struct Scenario {
    Vec3 k;       ///< true fruit position
    Vec3 c0;      ///< initial camera position
    Vec3 x_hat0;  ///< initial estimate
};

/// k in [-1,1]^3, c0 in [-2,2]^3, x_hat0 = k + uniform per-axis bias in [-bias, bias].
Scenario sample_scenario(std::mt19937_64& rng, double bias = 0.15);

struct IterationRow {
    int i = 0;
    Vec3 c = Vec3::Zero();  ///< camera position the measurement was taken from
    double loss = 0.0;
    Vec3 x_hat = Vec3::Zero();
    Vec3 p_diag = Vec3::Zero();
    double eucl_err = 0.0;  ///< ||x_hat - k||, m
    SolverStatus status = SolverStatus::Converged;
};

struct RunRecord {
    int run = 0;
    std::uint64_t seed = 0;
    Vec3 k = Vec3::Zero();
    Vec3 c0 = Vec3::Zero();
    Vec3 x_hat0 = Vec3::Zero();
    std::vector<IterationRow> rows;
    std::vector<std::string> diagnostics;
    bool failed = false;

    Vec3 final_estimate() const { return rows.empty() ? x_hat0 : rows.back().x_hat; }
    double initial_error() const { return (x_hat0 - k).norm(); }
    double final_error() const { return (final_estimate() - k).norm(); }
    bool ended_infeasible() const { return !rows.empty() && rows.back().status == SolverStatus::Infeasible; }
};

/// Initial filter covariance matching a uniform per-axis bias of half-width `bias`.
Covariance3 initial_covariance(double bias);

/// Seeded scenario, then `iterations` rounds of: choose the next viewpoint,
/// move there, take a noisy range reading and correct the filter.
RunRecord run_single(const ScenarioConfig& config, std::uint64_t seed, int run_index = 0);
RunRecord run_scenario(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t seed, int run_index = 0);

struct MetricsReport {
    std::string experiment;
    int runs = 0;
    int failed_runs = 0;
    int infeasible_runs = 0;
    double mape_pct = 0.0;
    double mae_mm = 0.0;
    double mse_mm2 = 0.0;
    double rmse_mm = 0.0;
    double mean_eucl_mm = 0.0;
    double mean_initial_eucl_mm = 0.0;
};

/// Per-axis MAPE/MAE/MSE/RMSE over N points x 3 axes, plus mean Euclidean
/// error. MAPE skips coordinates with |truth| < 1 mm.
MetricsReport compute_metrics(std::span<const Vec3> truths, std::span<const Vec3> estimates);

struct ExperimentResult {
    std::vector<RunRecord> records;
    MetricsReport report;
};

/// `runs` seeded runs with seed_i = seed + i; metrics over the final estimates
/// of the runs that did not fail.
ExperimentResult run_experiment(const ScenarioConfig& config);

struct SweepRow {
    double level_m = 0.0;
    int sims = 0;
    double mae_mm = 0.0;
    double mse_mm2 = 0.0;
    double rmse_mm = 0.0;
    double mape_pct = 0.0;
    double mean_eucl_mm = 0.0;
};

/// Initial estimation error e = 0, step, ..., max_error; each level runs
/// sims_per_level scenarios with x_hat0 = k + e * (random unit direction).
std::vector<SweepRow> recoverability_sweep(const ScenarioConfig& config);

/// Deterministic 64-bit mix of a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace bve
