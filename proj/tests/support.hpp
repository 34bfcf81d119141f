#pragma once

#include <Eigen/Dense>

#include <random>

#include "bve/belief.hpp"
#include "bve/geometry.hpp"

namespace bve::testing {

inline Vec3 uniform_in_box(std::mt19937_64& rng, double half) {
    std::uniform_real_distribution<double> u(-half, half);
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    return {x, y, z};
}

inline Vec3 random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v;
    do {
        const double x = n(rng);
        const double y = n(rng);
        const double z = n(rng);
        v = Vec3(x, y, z);
    } while (v.norm() < 1e-6);
    return v.normalized();
}

// Haar-ish random rotation through QR of a Gaussian matrix, sign-fixed to det +1.
inline RotationMatrix random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix3d a;
    for (int i = 0; i < 9; ++i) {
        a(i) = n(rng);
    }
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0) {
        q.col(2) = -q.col(2);
    }
    return q;
}

inline Covariance3 random_spd(std::mt19937_64& rng, double lo = 1e-4, double hi = 1e-2) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    const double e0 = std::exp(u(rng));
    const double e1 = std::exp(u(rng));
    const double e2 = std::exp(u(rng));
    const RotationMatrix q = random_rotation(rng);
    return Covariance3(q * Vec3(e0, e1, e2).asDiagonal() * q.transpose());
}

// Fusion computed through general LU inverses, independent of the library's Cholesky path.
inline Eigen::Matrix3d fuse_reference(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
    const Eigen::Matrix3d info = a.fullPivLu().inverse() + b.fullPivLu().inverse();
    return info.fullPivLu().inverse();
}

inline double min_eigenvalue(const Eigen::Matrix3d& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

}  // namespace bve::testing
