#pragma once

// Frames and look-at rotations. Column j of a RotationMatrix is camera axis j
// expressed in the world frame; camera x is the viewing direction.

#include <Eigen/Dense>

#include <cmath>

#include "bve/errors.hpp"

namespace bve {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vector3<double>;
using RotationMatrix = Matrix3<double>;

/// How the lateral fruit-rim direction of the conic field-of-view test is formed.
enum class PerpMode {
    Paper,       ///< (-e.y, e.x, e.z), normalized; not orthogonal to e when e.z != 0
    Orthogonal,  ///< same vector with its component along e projected out
};

inline constexpr double kDegenerateNorm = 1e-12;
inline constexpr double kVerticalViewEps = 1e-9;

template <typename Derived>
Vector3<typename Derived::Scalar> unit(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Scalar n = v.norm();
    if (!(n > Scalar(kDegenerateNorm))) {
        throw DegenerateDirection("cannot normalize a zero-length vector");
    }
    return v / n;
}

/// Rotation whose x column points from the camera at `c` toward `k_hat`, with
/// the y column kept in the world xy-plane. Straight up/down views take y = (0,1,0).
template <typename DerivedK, typename DerivedC>
Matrix3<typename DerivedK::Scalar> look_at_rotation(const Eigen::MatrixBase<DerivedK>& k_hat,
                                                    const Eigen::MatrixBase<DerivedC>& c) {
    using Scalar = typename DerivedK::Scalar;
    const Vector3<Scalar> x = unit(k_hat - c);

    Vector3<Scalar> y;
    if (std::abs(x.x()) < Scalar(kVerticalViewEps) && std::abs(x.y()) < Scalar(kVerticalViewEps)) {
        y = Vector3<Scalar>::UnitY();
    } else {
        y = Vector3<Scalar>(-x.y(), x.x(), Scalar(0)).normalized();
    }
    const Vector3<Scalar> z = x.cross(y).normalized();

    Matrix3<Scalar> r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    return r;
}

template <typename Derived>
Vector3<typename Derived::Scalar> perp_in_paper_convention(const Eigen::MatrixBase<Derived>& e_c,
                                                           PerpMode mode = PerpMode::Paper) {
    using Scalar = typename Derived::Scalar;
    Vector3<Scalar> p(-e_c.y(), e_c.x(), e_c.z());
    if (mode == PerpMode::Orthogonal) {
        p -= p.dot(e_c) * e_c;
        if (p.norm() <= Scalar(kDegenerateNorm)) {
            // vertical view, same tie-break as look_at_rotation
            return Vector3<Scalar>::UnitY();
        }
    }
    return unit(p);
}

}  // namespace bve
