#include "bve/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace bve {

namespace {

/// Runs body(0..n-1); results must be written to per-index slots.
template <typename Fn>
void parallel_for(int n, Fn&& body) {
    const int workers = std::min<int>(n, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) {
                body(i);
            }
        });
    }
}

Vec3 uniform_vec(std::mt19937_64& rng, double half_width) {
    std::uniform_real_distribution<double> u(-half_width, half_width);
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    return {x, y, z};
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        const double x = n(rng);
        const double y = n(rng);
        const double z = n(rng);
        const Vec3 v(x, y, z);
        if (v.norm() > 1e-9) {
            return v.normalized();
        }
    }
}

void check(bool ok, const char* key, const char* what) {
    if (!ok) {
        throw ConfigError(key, what);
    }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 over the combined value
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void ScenarioConfig::validate() const {
    check(runs >= 1, "runs", "must be >= 1");
    check(iterations >= 1, "iterations", "must be >= 1");
    check(sigma_c.positive_definite(), "sigma_xx", "camera covariance must be positive definite");
    check(constraints.workspace.radius > 0, "r_m", "must be > 0");
    check(constraints.fruit.radius > 0, "r_k", "must be > 0");
    check(constraints.fov.hfov > 0 && constraints.fov.hfov < std::numbers::pi, "hfov", "must lie in (0, pi)");
    check(constraints.wall.standoff >= 0, "wall_d", "must be >= 0");
    check(constraints.step.radius > 0, "r_d", "must be > 0");
    check(constraints.shell.epsilon > 0 && constraints.shell.epsilon < constraints.shell.l_dist, "l_eps",
          "must satisfy 0 < l_eps < l_dist");
    check(constraints.reach.inner_radius >= 0 && constraints.reach.inner_radius < constraints.workspace.radius,
          "r_inner", "must satisfy 0 <= r_inner < r_m");
    check(sigmoid.a > 0, "sigmoid_a", "must be > 0");
    check(sigmoid.b >= 0, "sigmoid_b", "must be >= 0");
    check(process_noise >= 0, "q", "must be >= 0");
    check(initial_bias > 0, "init_bias", "must be > 0");
    check(solver.max_iterations > 0, "max_iterations", "must be > 0");
    check(solver.constraint_tolerance > 0, "constraint_tolerance", "must be > 0");
    check(solver.step_tolerance > 0, "step_tolerance", "must be > 0");
    check(solver.loss_tolerance > 0, "loss_tolerance", "must be > 0");
    check(solver.multistart_count >= 1, "multistart", "must be >= 1");
    check(sweep.max_error >= 0, "sweep_max", "must be >= 0");
    check(sweep.step > 0, "sweep_step", "must be > 0");
    check(sweep.sims_per_level >= 1, "sweep_sims", "must be >= 1");
}

LossKind ScenarioConfig::loss() const {
    LossKind kind = build_for_experiment(experiment, constraints).first;
    if (loss_override) {
        kind.family = *loss_override;
    }
    kind.sigmoid = sigmoid;
    return kind;
}

Scenario sample_scenario(std::mt19937_64& rng, double bias) {
    Scenario s;
    s.k = uniform_vec(rng, 1.0);
    s.c0 = uniform_vec(rng, 2.0);
    s.x_hat0 = s.k + uniform_vec(rng, bias);
    return s;
}

Covariance3 initial_covariance(double bias) {
    return Covariance3::isotropic(bias * bias / 3.0);
}

RunRecord run_scenario(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t seed, int run_index) {
    RunRecord record;
    record.run = run_index;
    record.seed = seed;
    record.k = scenario.k;
    record.c0 = scenario.c0;
    record.x_hat0 = scenario.x_hat0;

    const LossKind loss = config.loss();
    const ConstraintSet base_set = build_for_experiment(config.experiment, config.constraints).second;
    const ProcessNoise q{Covariance3::isotropic(config.process_noise)};
    const RangeMeasurementModel model{config.sigma_c(0, 0)};

    std::mt19937_64 noise_rng(derive_seed(seed, 1));
    std::normal_distribution<double> normal(0.0, 1.0);

    EkfState state{scenario.x_hat0, initial_covariance(config.initial_bias)};
    Covariance3 sigma_o = state.P;
    Vec3 c = scenario.c0;

    for (int i = 0; i < config.iterations; ++i) {
        const double noise = normal(noise_rng);
        IterationRow row;
        row.i = i;

        const ConstraintSet set = base_set.bind(c, state.x_hat);
        if (set.wall_skipped) {
            record.diagnostics.push_back("iteration " + std::to_string(i) +
                                        ": wall constraint skipped, estimate on the z-axis");
        }
        const ViewpointProblem problem{loss, set, config.belief_source == BeliefSource::Ekf ? state.P : sigma_o,
                                       config.sigma_c, i};
        try {
            const SolverOutcome outcome =
                solve_next_viewpoint(problem, config.solver, derive_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
            row.status = outcome.status;
            row.loss = outcome.loss_value;
            // Infeasible outcomes still carry a step-limited move toward the feasible set.
            if (!set.step || g_step(outcome.c_next, c, *set.step) <= kFeasibilityTolerance) {
                c = outcome.c_next;
            }
        } catch (const Error& e) {
            row.status = SolverStatus::Infeasible;
            row.loss = std::nan("");
            record.diagnostics.push_back("iteration " + std::to_string(i) + ": solver error: " + e.what());
        }

        try {
            const Covariance3 sigma_n = rotate_covariance(look_at_rotation(state.x_hat, c), config.sigma_c);
            state = step(state, scenario.k, c, q, model, config.measurement_noise ? noise : 0.0,
                         config.covariance_update);
            sigma_o = fuse(sigma_o, sigma_n);
        } catch (const Error& e) {
            record.diagnostics.push_back("iteration " + std::to_string(i) + ": filter error: " + e.what());
            record.failed = true;
            break;
        }

        row.c = c;
        row.x_hat = state.x_hat;
        row.p_diag = state.P.matrix().diagonal();
        row.eucl_err = (state.x_hat - scenario.k).norm();
        record.rows.push_back(row);
    }
    return record;
}

RunRecord run_single(const ScenarioConfig& config, std::uint64_t seed, int run_index) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    return run_scenario(config, sample_scenario(rng, config.initial_bias), seed, run_index);
}

MetricsReport compute_metrics(std::span<const Vec3> truths, std::span<const Vec3> estimates) {
    if (truths.empty() || truths.size() != estimates.size()) {
        throw EmptyInput("metrics need equal-length, non-empty truth and estimate lists");
    }
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double pct_sum = 0.0;
    std::size_t pct_terms = 0;
    double eucl_sum = 0.0;
    for (std::size_t n = 0; n < truths.size(); ++n) {
        const Vec3 err = truths[n] - estimates[n];
        for (int j = 0; j < 3; ++j) {
            abs_sum += std::abs(err(j));
            sq_sum += err(j) * err(j);
            if (std::abs(truths[n](j)) >= 1e-3) {
                pct_sum += std::abs(err(j) / truths[n](j));
                ++pct_terms;
            }
        }
        eucl_sum += err.norm();
    }
    const double terms = 3.0 * static_cast<double>(truths.size());

    MetricsReport r;
    r.runs = static_cast<int>(truths.size());
    r.mae_mm = 1e3 * abs_sum / terms;
    r.mse_mm2 = 1e6 * sq_sum / terms;
    r.rmse_mm = std::sqrt(r.mse_mm2);
    r.mape_pct = pct_terms > 0 ? 100.0 * pct_sum / static_cast<double>(pct_terms) : 0.0;
    r.mean_eucl_mm = 1e3 * eucl_sum / static_cast<double>(truths.size());
    return r;
}

ExperimentResult run_experiment(const ScenarioConfig& config) {
    config.validate();
    ExperimentResult result;
    result.records.resize(config.runs);
    parallel_for(config.runs, [&](int i) {
        result.records[i] = run_single(config, config.seed + static_cast<std::uint64_t>(i), i);
    });

    std::vector<Vec3> truths;
    std::vector<Vec3> estimates;
    double initial_sum = 0.0;
    int failed = 0;
    int infeasible = 0;
    for (const auto& rec : result.records) {
        if (rec.failed || rec.rows.empty()) {
            ++failed;
            continue;
        }
        truths.push_back(rec.k);
        estimates.push_back(rec.final_estimate());
        initial_sum += rec.initial_error();
        infeasible += rec.ended_infeasible() ? 1 : 0;
    }
    if (!truths.empty()) {
        result.report = compute_metrics(truths, estimates);
        result.report.mean_initial_eucl_mm = 1e3 * initial_sum / static_cast<double>(truths.size());
    }
    result.report.experiment = to_string(config.experiment);
    result.report.runs = config.runs;
    result.report.failed_runs = failed;
    result.report.infeasible_runs = infeasible;
    return result;
}

std::vector<SweepRow> recoverability_sweep(const ScenarioConfig& config) {
    config.validate();
    const int levels = static_cast<int>(std::floor(config.sweep.max_error / config.sweep.step + 1e-9)) + 1;
    const int sims = config.sweep.sims_per_level;

    std::vector<RunRecord> records(static_cast<std::size_t>(levels) * sims);
    parallel_for(levels * sims, [&](int idx) {
        const int level = idx / sims;
        const double e = level * config.sweep.step;
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(idx);
        std::mt19937_64 rng(derive_seed(seed, 0));
        Scenario s = sample_scenario(rng, config.initial_bias);
        s.x_hat0 = s.k + e * random_unit(rng);
        records[idx] = run_scenario(config, s, seed, idx);
    });

    std::vector<SweepRow> rows;
    rows.reserve(levels);
    for (int level = 0; level < levels; ++level) {
        std::vector<Vec3> truths;
        std::vector<Vec3> estimates;
        for (int s = 0; s < sims; ++s) {
            const auto& rec = records[static_cast<std::size_t>(level) * sims + s];
            if (rec.failed || rec.rows.empty()) {
                continue;
            }
            truths.push_back(rec.k);
            estimates.push_back(rec.final_estimate());
        }
        SweepRow row;
        row.level_m = level * config.sweep.step;
        row.sims = static_cast<int>(truths.size());
        if (!truths.empty()) {
            const MetricsReport m = compute_metrics(truths, estimates);
            row.mae_mm = m.mae_mm;
            row.mse_mm2 = m.mse_mm2;
            row.rmse_mm = m.rmse_mm;
            row.mape_pct = m.mape_pct;
            row.mean_eucl_mm = m.mean_eucl_mm;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace bve
