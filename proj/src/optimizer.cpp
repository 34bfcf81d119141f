#include "bve/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace bve {

std::string_view to_string(SolverStatus status) {
    switch (status) {
    case SolverStatus::Converged:
        return "converged";
    case SolverStatus::MaxIterations:
        return "max_iterations";
    case SolverStatus::Infeasible:
        return "infeasible";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGradientStep = 1e-6;
constexpr double kPhaseOneMargin = 1e-4;
constexpr int kPhaseOneIterations = 400;
constexpr int kBarrierStages = 9;
constexpr double kBarrierShrink = 0.1;

bool lex_less(const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
}

class BarrierSearch {
public:
    BarrierSearch(const ViewpointProblem& problem, const SolverSettings& settings)
        : settings_(settings),
          set_(problem.set),
          loss_(problem.loss, problem.set.k_hat, problem.belief, problem.sigma_c, problem.iteration),
          radius_(problem.set.step ? problem.set.step->radius : 0.2) {
        relaxed_ = set_;
        relaxed_.step.reset();
    }

    double radius() const { return radius_; }

    double loss(const Vec3& x) const {
        try {
            const double v = loss_(x);
            return std::isfinite(v) ? v : kInf;
        } catch (const Error&) {
            return kInf;
        }
    }

    bool strictly_feasible(const Vec3& x) const {
        for (const auto& g : set_.smooth(x)) {
            if (!(g.value < 0.0)) {
                return false;
            }
        }
        return true;
    }

    /// Projected gradient descent on the squared margin violation of every
    /// constraint but the step ball, which is enforced by projection.
    Vec3 phase_one(Vec3 x, int& iterations) const {
        x = project(x);
        if (strictly_feasible(x)) {
            return x;
        }
        double t = 1.0;
        double v = violation(x);
        for (int it = 0; it < kPhaseOneIterations; ++it) {
            ++iterations;
            const Vec3 grad = violation_gradient(x);
            if (!(grad.norm() > 0.0)) {
                break;
            }
            t = std::min(1.0, 4.0 * t);
            bool moved = false;
            while (t > 1e-14) {
                const Vec3 trial = project(x - t * grad);
                const double vt = violation(trial);
                if (vt < v - 1e-4 * grad.dot(x - trial)) {
                    moved = (trial - x).norm() > 1e-15;
                    x = trial;
                    v = vt;
                    break;
                }
                t *= 0.5;
            }
            if (strictly_feasible(x)) {
                return x;
            }
            if (!moved) {
                break;
            }
        }
        return x;
    }

    /// Minimizes the loss from a strictly feasible start. Returns false when the
    /// iteration budget ran out.
    bool minimize(Vec3& x, int& iterations) const {
        const double f0 = loss(x);
        const Vec3 grad0 = loss_gradient(x);
        if (!std::isfinite(f0) || !grad0.allFinite()) {
            return true;
        }
        double mu = std::max(grad0.norm() * radius_, 1e-12) * 0.1;
        for (int stage = 0; stage < kBarrierStages; ++stage) {
            int budget = settings_.max_iterations;
            if (!minimize_stage(x, mu, budget, iterations)) {
                return false;
            }
            mu *= kBarrierShrink;
        }
        return true;
    }

private:
    Vec3 project(const Vec3& x) const {
        if (!set_.step) {
            return x;
        }
        const Vec3 d = x - set_.c_current;
        const double limit = radius_ * (1.0 - 1e-9);
        const double n = d.norm();
        return n > limit ? Vec3(set_.c_current + d * (limit / n)) : x;
    }

    double violation(const Vec3& x) const {
        double v = 0.0;
        for (const auto& g : relaxed_.smooth(x)) {
            const double h = std::max(0.0, g.value + kPhaseOneMargin);
            v += h * h;
        }
        return v;
    }

    Vec3 violation_gradient(const Vec3& x) const {
        Vec3 grad = Vec3::Zero();
        for (const auto& g : relaxed_.smooth(x)) {
            const double h = std::max(0.0, g.value + kPhaseOneMargin);
            grad += 2.0 * h * g.gradient;
        }
        return grad;
    }

    Vec3 loss_gradient(const Vec3& x) const {
        Vec3 grad;
        for (int j = 0; j < 3; ++j) {
            const Vec3 e = kGradientStep * Vec3::Unit(j);
            grad(j) = (loss(x + e) - loss(x - e)) / (2.0 * kGradientStep);
        }
        return grad;
    }

    double barrier(const Vec3& x, double mu) const {
        double b = 0.0;
        for (const auto& g : set_.smooth(x)) {
            if (!(g.value < 0.0)) {
                return kInf;
            }
            b -= std::log(-g.value);
        }
        const double f = loss(x);
        return std::isfinite(f) ? f + mu * b : kInf;
    }

    Vec3 barrier_gradient(const Vec3& x, double mu) const {
        Vec3 grad = loss_gradient(x);
        for (const auto& g : set_.smooth(x)) {
            grad -= mu * g.gradient / g.value;
        }
        return grad;
    }

    /// Compass search around x; moves to the first improving poll point.
    bool pattern_step(Vec3& x, double& phi, double mu, double delta) const {
        static const std::array<Vec3, 6> kDirections = {Vec3::UnitX(),  Vec3::UnitY(),  Vec3::UnitZ(),
                                                        -Vec3::UnitX(), -Vec3::UnitY(), -Vec3::UnitZ()};
        while (delta > settings_.step_tolerance) {
            for (const auto& d : kDirections) {
                const Vec3 trial = x + delta * d;
                const double pt = barrier(trial, mu);
                if (pt < phi) {
                    x = trial;
                    phi = pt;
                    return true;
                }
            }
            delta *= 0.5;
        }
        return false;
    }

    bool minimize_stage(Vec3& x, double mu, int& budget, int& iterations) const {
        double phi = barrier(x, mu);
        Vec3 grad = barrier_gradient(x, mu);
        if (!std::isfinite(phi) || !grad.allFinite()) {
            return true;
        }
        Matrix3<double> h_inv = Matrix3<double>::Identity() * (0.1 * radius_ / std::max(grad.norm(), 1e-300));
        bool fresh = true;
        while (budget > 0) {
            --budget;
            ++iterations;
            Vec3 p = -h_inv * grad;
            if (!(grad.dot(p) < 0.0)) {
                h_inv = Matrix3<double>::Identity() * (0.1 * radius_ / std::max(grad.norm(), 1e-300));
                p = -h_inv * grad;
                fresh = true;
            }
            double t = 1.0;
            Vec3 x_new = x;
            double phi_new = kInf;
            bool accepted = false;
            for (int k = 0; k < 60; ++k) {
                x_new = x + t * p;
                phi_new = barrier(x_new, mu);
                if (phi_new <= phi + 1e-4 * t * grad.dot(p)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                x_new = x;
                phi_new = phi;
                if (!pattern_step(x_new, phi_new, mu, std::max(1e-3 * radius_, t * p.norm()))) {
                    return true;
                }
            }
            const Vec3 s = x_new - x;
            const double decrease = phi - phi_new;
            const Vec3 grad_new = barrier_gradient(x_new, mu);
            if (!grad_new.allFinite()) {
                return true;
            }
            const Vec3 y = grad_new - grad;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                if (fresh) {
                    h_inv = Matrix3<double>::Identity() * (sy / y.squaredNorm());
                    fresh = false;
                }
                const double rho = 1.0 / sy;
                const Matrix3<double> v = Matrix3<double>::Identity() - rho * s * y.transpose();
                h_inv = v * h_inv * v.transpose() + rho * s * s.transpose();
            }
            x = x_new;
            phi = phi_new;
            grad = grad_new;
            if (s.lpNorm<Eigen::Infinity>() < settings_.step_tolerance ||
                decrease < settings_.loss_tolerance * 1e-3 * (1.0 + std::abs(phi))) {
                return true;
            }
        }
        return false;
    }

    const SolverSettings& settings_;
    const ConstraintSet& set_;
    ConstraintSet relaxed_;
    ViewpointLoss loss_;
    double radius_;
};

}  // namespace

SolverOutcome solve_next_viewpoint(const ViewpointProblem& problem, const SolverSettings& settings,
                                   std::uint64_t seed) {
    const BarrierSearch search(problem, settings);
    const Vec3& c0 = problem.set.c_current;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<Vec3> starts{c0};
    for (int s = 1; s < std::max(1, settings.multistart_count); ++s) {
        Vec3 dir(normal(rng), normal(rng), normal(rng));
        if (dir.norm() < 1e-12) {
            dir = Vec3::UnitX();
        }
        const double r = search.radius() * (0.5 + 0.5 * uniform(rng));
        starts.push_back(c0 + r * dir.normalized());
    }

    SolverOutcome best;
    best.loss_value = kInf;
    bool have_feasible = false;
    bool best_exhausted = false;
    double least_violation = kInf;
    int iterations = 0;

    for (const Vec3& start : starts) {
        Vec3 x = search.phase_one(start, iterations);
        if (!search.strictly_feasible(x)) {
            const double v = problem.set.max_violation(x);
            if (!have_feasible && (v < least_violation || (v == least_violation && lex_less(x, best.c_next)))) {
                least_violation = v;
                best.c_next = x;
                best.loss_value = search.loss(x);
            }
            continue;
        }
        const Vec3 entry = x;
        const double entry_loss = search.loss(entry);
        const bool finished = search.minimize(x, iterations);
        double value = search.loss(x);
        if (!(value <= entry_loss)) {
            x = entry;
            value = entry_loss;
        }
        if (!have_feasible || value < best.loss_value || (value == best.loss_value && lex_less(x, best.c_next))) {
            have_feasible = true;
            best.c_next = x;
            best.loss_value = value;
            best_exhausted = !finished;
        }
    }

    best.iterations_used = iterations;
    if (have_feasible) {
        best.feasible = is_feasible(best.c_next, problem.set, settings.constraint_tolerance);
        best.status = best_exhausted ? SolverStatus::MaxIterations : SolverStatus::Converged;
    } else {
        best.feasible = false;
        best.status = SolverStatus::Infeasible;
    }
    return best;
}

OracleResult grid_oracle(const ViewpointProblem& problem, int resolution) {
    const ConstraintSet& set = problem.set;
    resolution = std::max(resolution, 2);

    Vec3 lo, hi;
    if (set.step) {
        lo = set.c_current.array() - set.step->radius;
        hi = set.c_current.array() + set.step->radius;
    } else if (set.workspace) {
        lo = set.workspace->center.array() - set.workspace->radius;
        hi = set.workspace->center.array() + set.workspace->radius;
    } else if (set.shell) {
        lo = set.k_hat.array() - (set.shell->l_dist + set.shell->epsilon);
        hi = set.k_hat.array() + (set.shell->l_dist + set.shell->epsilon);
    } else {
        lo = set.c_current.array() - 1.0;
        hi = set.c_current.array() + 1.0;
    }
    if (set.workspace) {
        lo = lo.cwiseMax(Vec3(set.workspace->center.array() - set.workspace->radius));
        hi = hi.cwiseMin(Vec3(set.workspace->center.array() + set.workspace->radius));
    }
    if (set.shell) {
        const double r = set.shell->l_dist + set.shell->epsilon;
        lo = lo.cwiseMax(Vec3(set.k_hat.array() - r));
        hi = hi.cwiseMin(Vec3(set.k_hat.array() + r));
    }

    const ViewpointLoss loss(problem.loss, set.k_hat, problem.belief, problem.sigma_c, problem.iteration);
    OracleResult out;
    const auto consider = [&](const Vec3& p) {
        if (!is_feasible(p, set, 0.0)) {
            return;
        }
        double v;
        try {
            v = loss(p);
        } catch (const Error&) {
            return;
        }
        if (!std::isfinite(v)) {
            return;
        }
        ++out.feasible_points;
        if (!out.feasible || v < out.value) {
            out.feasible = true;
            out.point = p;
            out.value = v;
        }
    };

    consider(set.c_current);
    if ((hi.array() >= lo.array()).all()) {
        const Vec3 span = hi - lo;
        const double denom = resolution - 1;
        for (int i = 0; i < resolution; ++i) {
            for (int j = 0; j < resolution; ++j) {
                for (int k = 0; k < resolution; ++k) {
                    consider(lo + Vec3(span.x() * i / denom, span.y() * j / denom, span.z() * k / denom));
                }
            }
        }
    }
    return out;
}

}  // namespace bve
