#pragma once

// Inequality restrictions g(c_hat) <= 0 on the next camera position.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bve/geometry.hpp"
#include "bve/objective.hpp"

namespace bve {

struct Workspace {
    Vec3 center{0.0, 0.0, 0.159};
    double radius = 0.645;
};

struct FruitBody {
    double radius = 0.04;
};

struct CameraFov {
    double hfov = 1.0471975511965976;  // 60 degrees
};

struct PlantWall {
    double standoff = 0.1;
};

struct StepLimit {
    double radius = 0.2;
};

struct DistanceShell {
    double l_dist = 1.0;
    double epsilon = 0.1;
};

/// Keeps the camera out of a ball of `inner_radius` around the workspace
/// center; stands in for manipulator kinematic validity.
struct ReachabilityShell {
    double inner_radius = 0.15;
};

/// Sign convention for the field-of-view restriction.
enum class FovSign {
    Corrected,  ///< feasible when the fruit rim lies inside the cone
    Paper,      ///< the inequality exactly as printed (rim outside the cone)
};

inline constexpr double kFeasibilityTolerance = 1e-6;

double g_workspace(const Vec3& c_hat, const Workspace& ws);
double g_fruit(const Vec3& c_hat, const Vec3& k_hat, const FruitBody& fruit);
/// Raw printed expression unit(x_lim - c_hat) . e_c - cos(hfov / 2).
double g_fov(const Vec3& c_hat, const Vec3& k_hat, const FruitBody& fruit, const CameraFov& fov,
             PerpMode mode = PerpMode::Paper);
double g_wall(const Vec3& c_hat, const Vec3& k_hat, const PlantWall& wall);
double g_step(const Vec3& c_hat, const Vec3& c_current, const StepLimit& step);
std::pair<double, double> g_distance_shell(const Vec3& c_hat, const Vec3& k_hat, const DistanceShell& shell);
double g_reach(const Vec3& c_hat, const Workspace& ws, const ReachabilityShell& reach);

/// A named constraint value under the uniform g <= 0 convention.
struct ConstraintValue {
    std::string_view name;
    double value;
};

/// Smooth reformulation of one constraint (same zero set and feasible side)
/// with its gradient, as used by the barrier solver.
struct SmoothConstraint {
    double value;
    Vec3 gradient;
};

/// The active restrictions for one viewpoint decision, bound to the current
/// camera position and fruit estimate.
struct ConstraintSet {
    std::optional<Workspace> workspace;
    std::optional<FruitBody> fruit;
    std::optional<CameraFov> fov;
    std::optional<PlantWall> wall;
    std::optional<StepLimit> step;
    std::optional<DistanceShell> shell;
    std::optional<ReachabilityShell> reach;

    FovSign fov_sign = FovSign::Corrected;
    PerpMode perp_mode = PerpMode::Paper;

    Vec3 c_current = Vec3::Zero();
    Vec3 k_hat = Vec3::Zero();

    /// Set when the wall had to be dropped because k_hat lies on the z-axis.
    bool wall_skipped = false;

    /// Copy bound to a new camera position and estimate. Drops the wall (and
    /// flags it) when its normal is undefined.
    ConstraintSet bind(const Vec3& c, const Vec3& k) const;

    bool empty() const;
    std::size_t count() const;

    std::vector<ConstraintValue> evaluate(const Vec3& c_hat) const;
    /// Largest positive g over the active set (0 when feasible).
    double max_violation(const Vec3& c_hat) const;

    std::vector<SmoothConstraint> smooth(const Vec3& c_hat) const;
};

bool is_feasible(const Vec3& c_hat, const ConstraintSet& set, double tol = kFeasibilityTolerance);

enum class ExperimentId { E1 = 1, E2, E3, E4, E5, E6, E7, E8, E9, E10 };

ExperimentId parse_experiment(std::string_view name);
std::string to_string(ExperimentId id);

/// Parameters shared by every experiment's constraint set.
struct ExperimentParams {
    Workspace workspace{};
    FruitBody fruit{};
    CameraFov fov{};
    PlantWall wall{};
    StepLimit step{};
    DistanceShell shell{};
    ReachabilityShell reach{};
    FovSign fov_sign = FovSign::Corrected;
    PerpMode perp_mode = PerpMode::Paper;
};

/// Loss and restrictions for experiment E1..E10. E1-E5 use the dispersion
/// loss, E6-E10 repeat them with the max-eigenvalue loss.
std::pair<LossKind, ConstraintSet> build_for_experiment(ExperimentId id, const ExperimentParams& params);
std::pair<LossKind, ConstraintSet> build_for_experiment(ExperimentId id, const ExperimentParams& params,
                                                        const Vec3& c_current, const Vec3& k_hat);

}  // namespace bve
