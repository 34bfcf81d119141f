#include "bve/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bve {

double g_workspace(const Vec3& c_hat, const Workspace& ws) {
    return (c_hat - ws.center).squaredNorm() - ws.radius * ws.radius;
}

double g_fruit(const Vec3& c_hat, const Vec3& k_hat, const FruitBody& fruit) {
    return -(c_hat - k_hat).squaredNorm() + fruit.radius * fruit.radius;
}

double g_fov(const Vec3& c_hat, const Vec3& k_hat, const FruitBody& fruit, const CameraFov& fov, PerpMode mode) {
    const Vec3 e_c = unit(k_hat - c_hat);
    const Vec3 x_lim = k_hat + fruit.radius * perp_in_paper_convention(e_c, mode);
    return unit(x_lim - c_hat).dot(e_c) - std::cos(fov.hfov / 2.0);
}

double g_wall(const Vec3& c_hat, const Vec3& k_hat, const PlantWall& wall) {
    const Vec3 e_n = unit(Vec3(k_hat.x(), k_hat.y(), 0.0));
    const Vec3 w = k_hat - wall.standoff * e_n;
    return e_n.dot(c_hat - w);
}

double g_step(const Vec3& c_hat, const Vec3& c_current, const StepLimit& step) {
    return (c_hat - c_current).norm() - step.radius;
}

std::pair<double, double> g_distance_shell(const Vec3& c_hat, const Vec3& k_hat, const DistanceShell& shell) {
    const double d = (c_hat - k_hat).norm();
    return {shell.l_dist - shell.epsilon - d, d - shell.l_dist - shell.epsilon};
}

double g_reach(const Vec3& c_hat, const Workspace& ws, const ReachabilityShell& reach) {
    return reach.inner_radius * reach.inner_radius - (c_hat - ws.center).squaredNorm();
}

namespace {

bool wall_normal_defined(const Vec3& k_hat) {
    return std::hypot(k_hat.x(), k_hat.y()) > 1e-9;
}

double registered_fov(const ConstraintSet& set, const Vec3& c_hat) {
    const double raw = g_fov(c_hat, set.k_hat, *set.fruit, *set.fov, set.perp_mode);
    return set.fov_sign == FovSign::Corrected ? -raw : raw;
}

}  // namespace

ConstraintSet ConstraintSet::bind(const Vec3& c, const Vec3& k) const {
    ConstraintSet out = *this;
    out.c_current = c;
    out.k_hat = k;
    out.wall_skipped = false;
    if (out.wall && !wall_normal_defined(k)) {
        out.wall.reset();
        out.wall_skipped = true;
    }
    return out;
}

std::size_t ConstraintSet::count() const {
    return std::size_t(workspace.has_value()) + std::size_t(fruit.has_value()) +
           std::size_t(fov.has_value() && fruit.has_value()) + std::size_t(wall.has_value()) +
           std::size_t(step.has_value()) + 2 * std::size_t(shell.has_value()) +
           std::size_t(reach.has_value() && workspace.has_value());
}

bool ConstraintSet::empty() const { return count() == 0; }

std::vector<ConstraintValue> ConstraintSet::evaluate(const Vec3& c_hat) const {
    std::vector<ConstraintValue> out;
    out.reserve(8);
    if (workspace) {
        out.push_back({"workspace", g_workspace(c_hat, *workspace)});
    }
    if (fruit) {
        out.push_back({"fruit", g_fruit(c_hat, k_hat, *fruit)});
    }
    if (fov && fruit) {
        double v;
        try {
            v = registered_fov(*this, c_hat);
        } catch (const DegenerateDirection&) {
            v = 1.0;
        }
        out.push_back({"fov", v});
    }
    if (wall) {
        out.push_back({"wall", g_wall(c_hat, k_hat, *wall)});
    }
    if (step) {
        out.push_back({"step", g_step(c_hat, c_current, *step)});
    }
    if (shell) {
        const auto [lo, hi] = g_distance_shell(c_hat, k_hat, *shell);
        out.push_back({"shell_min", lo});
        out.push_back({"shell_max", hi});
    }
    if (reach && workspace) {
        out.push_back({"reach", g_reach(c_hat, *workspace, *reach)});
    }
    return out;
}

double ConstraintSet::max_violation(const Vec3& c_hat) const {
    double worst = 0.0;
    for (const auto& g : evaluate(c_hat)) {
        worst = std::max(worst, std::isfinite(g.value) ? g.value : 1e300);
    }
    return worst;
}

std::vector<SmoothConstraint> ConstraintSet::smooth(const Vec3& c_hat) const {
    std::vector<SmoothConstraint> out;
    out.reserve(8);
    if (workspace) {
        const Vec3 d = c_hat - workspace->center;
        out.push_back({d.squaredNorm() - workspace->radius * workspace->radius, 2.0 * d});
    }
    if (fruit) {
        const Vec3 d = c_hat - k_hat;
        out.push_back({fruit->radius * fruit->radius - d.squaredNorm(), -2.0 * d});
    }
    if (fov && fruit) {
        constexpr double h = 1e-6;
        const auto eval = [&](const Vec3& p) {
            try {
                return registered_fov(*this, p);
            } catch (const DegenerateDirection&) {
                return 1.0;
            }
        };
        Vec3 grad;
        for (int j = 0; j < 3; ++j) {
            const Vec3 e = h * Vec3::Unit(j);
            grad(j) = (eval(c_hat + e) - eval(c_hat - e)) / (2.0 * h);
        }
        out.push_back({eval(c_hat), grad});
    }
    if (wall) {
        const Vec3 e_n = unit(Vec3(k_hat.x(), k_hat.y(), 0.0));
        out.push_back({g_wall(c_hat, k_hat, *wall), e_n});
    }
    if (step) {
        const Vec3 d = c_hat - c_current;
        out.push_back({d.squaredNorm() - step->radius * step->radius, 2.0 * d});
    }
    if (shell) {
        const Vec3 d = c_hat - k_hat;
        const double lo = shell->l_dist - shell->epsilon;
        const double hi = shell->l_dist + shell->epsilon;
        out.push_back({lo * lo - d.squaredNorm(), -2.0 * d});
        out.push_back({d.squaredNorm() - hi * hi, 2.0 * d});
    }
    if (reach && workspace) {
        const Vec3 d = c_hat - workspace->center;
        out.push_back({reach->inner_radius * reach->inner_radius - d.squaredNorm(), -2.0 * d});
    }
    return out;
}

bool is_feasible(const Vec3& c_hat, const ConstraintSet& set, double tol) {
    for (const auto& g : set.evaluate(c_hat)) {
        if (!(g.value <= tol)) {
            return false;
        }
    }
    return true;
}

ExperimentId parse_experiment(std::string_view name) {
    std::string s(name);
    if (!s.empty() && (s.front() == 'E' || s.front() == 'e')) {
        s.erase(0, 1);
    }
    if (s.empty() || s.size() > 2 || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
        throw UnknownExperiment("unknown experiment '" + std::string(name) + "'");
    }
    const int n = std::stoi(s);
    if (n < 1 || n > 10) {
        throw UnknownExperiment("unknown experiment '" + std::string(name) + "'");
    }
    return static_cast<ExperimentId>(n);
}

std::string to_string(ExperimentId id) {
    return "E" + std::to_string(static_cast<int>(id));
}

std::pair<LossKind, ConstraintSet> build_for_experiment(ExperimentId id, const ExperimentParams& params) {
    const int n = static_cast<int>(id);
    if (n < 1 || n > 10) {
        throw UnknownExperiment("unknown experiment id " + std::to_string(n));
    }
    const LossKind loss = n <= 5 ? LossKind::dispersion() : LossKind::max_eigenvalue();
    const int level = (n - 1) % 5 + 1;

    ConstraintSet set;
    set.fov_sign = params.fov_sign;
    set.perp_mode = params.perp_mode;
    set.step = params.step;
    if (level <= 2) {
        set.shell = params.shell;
    }
    if (level >= 2) {
        set.workspace = params.workspace;
    }
    if (level >= 3) {
        set.fruit = params.fruit;
        set.fov = params.fov;
    }
    if (level >= 4) {
        set.wall = params.wall;
    }
    if (level >= 5) {
        set.reach = params.reach;
    }
    return {loss, set};
}

std::pair<LossKind, ConstraintSet> build_for_experiment(ExperimentId id, const ExperimentParams& params,
                                                        const Vec3& c_current, const Vec3& k_hat) {
    auto [loss, set] = build_for_experiment(id, params);
    return {loss, set.bind(c_current, k_hat)};
}

}  // namespace bve
