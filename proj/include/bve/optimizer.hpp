#pragma once

// Next-best-viewpoint search: constrained minimization of a viewpoint loss
// over the next camera position, plus an exhaustive lattice oracle.

#include <cstdint>
#include <string_view>

#include "bve/belief.hpp"
#include "bve/constraints.hpp"
#include "bve/objective.hpp"

namespace bve {

struct SolverSettings {
    int max_iterations = 200;  ///< inner quasi-Newton iterations per start
    double constraint_tolerance = kFeasibilityTolerance;
    double step_tolerance = 1e-10;  ///< m
    double loss_tolerance = 1e-8;
    int multistart_count = 5;
};

enum class SolverStatus { Converged, MaxIterations, Infeasible };

std::string_view to_string(SolverStatus status);

struct SolverOutcome {
    Vec3 c_next = Vec3::Zero();
    double loss_value = 0.0;
    bool feasible = false;
    int iterations_used = 0;
    SolverStatus status = SolverStatus::Infeasible;
};

/// Everything one viewpoint decision depends on. `set` must already be bound
/// to the current camera position and fruit estimate.
struct ViewpointProblem {
    LossKind loss;
    ConstraintSet set;
    Covariance3 belief;   ///< accumulated prior covariance sigma_o
    Covariance3 sigma_c;  ///< camera-frame observation covariance
    int iteration = 0;    ///< drives the approach activation
};

/// Log-barrier interior-point search from several seeded starts.
///
/// Each start is first pushed into the strict interior of the feasible set
/// by projected gradient descent on the squared constraint violation (the
/// step ball is kept as a hard projection). Feasible starts then run a
/// sequence of barrier subproblems with decreasing weight, each minimized by
/// BFGS with central-difference loss gradients and a compass-search fallback
/// where the loss is not smooth. The best feasible result wins, ties broken
/// lexicographically on coordinates.
///
/// When no start becomes feasible the outcome is Infeasible and c_next is the
/// least-violating point found inside the step ball.
SolverOutcome solve_next_viewpoint(const ViewpointProblem& problem, const SolverSettings& settings,
                                   std::uint64_t seed);

struct OracleResult {
    bool feasible = false;
    Vec3 point = Vec3::Zero();
    double value = 0.0;
    std::size_t feasible_points = 0;
};

/// Evaluates the loss on a resolution^3 lattice spanning the step ball around
/// c_current (clipped to the bounding boxes of the workspace sphere and the
/// distance shell), plus c_current itself, and returns the best point that
/// satisfies every active constraint exactly (tolerance 0).
OracleResult grid_oracle(const ViewpointProblem& problem, int resolution);

}  // namespace bve
