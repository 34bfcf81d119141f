#pragma once

// Covariance algebra for 3D Gaussian position beliefs.

#include <Eigen/Dense>

#include <span>

#include "bve/errors.hpp"
#include "bve/geometry.hpp"

namespace bve {

inline constexpr double kMaxConditionNumber = 1e12;

/// Symmetric 3x3 covariance (m^2). Symmetrized on construction; positive
/// definiteness is checked where an inverse is needed.
template <typename Scalar>
class Covariance3T {
public:
    Covariance3T() : m_(Matrix3<Scalar>::Identity()) {}

    template <typename Derived>
    explicit Covariance3T(const Eigen::MatrixBase<Derived>& m)
        : m_(Scalar(0.5) * (m + m.transpose())) {}

    static Covariance3T diagonal(Scalar xx, Scalar yy, Scalar zz) {
        return Covariance3T(Vector3<Scalar>(xx, yy, zz).asDiagonal().toDenseMatrix());
    }
    static Covariance3T isotropic(Scalar variance) { return diagonal(variance, variance, variance); }

    const Matrix3<Scalar>& matrix() const { return m_; }
    Scalar operator()(int r, int c) const { return m_(r, c); }

    Vector3<Scalar> eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    bool positive_definite() const { return m_.llt().info() == Eigen::Success && eigenvalues().minCoeff() > 0; }

    /// Inverse via Cholesky; throws SingularCovariance if not PD or too ill-conditioned.
    Matrix3<Scalar> inverse() const {
        const Vector3<Scalar> ev = eigenvalues();
        if (!(ev.minCoeff() > Scalar(0)) || ev.maxCoeff() / ev.minCoeff() > Scalar(kMaxConditionNumber)) {
            throw SingularCovariance("covariance is not positive definite or is ill-conditioned");
        }
        Eigen::LLT<Matrix3<Scalar>> llt(m_);
        if (llt.info() != Eigen::Success) {
            throw SingularCovariance("Cholesky factorization failed");
        }
        const Matrix3<Scalar> inv = llt.solve(Matrix3<Scalar>::Identity());
        return Scalar(0.5) * (inv + inv.transpose());
    }

    friend bool operator==(const Covariance3T& a, const Covariance3T& b) { return a.m_ == b.m_; }

private:
    Matrix3<Scalar> m_;
};

using Covariance3 = Covariance3T<double>;

template <typename Scalar>
struct GaussianBeliefT {
    Vector3<Scalar> mean = Vector3<Scalar>::Zero();
    Covariance3T<Scalar> cov;
};
using GaussianBelief = GaussianBeliefT<double>;

/// R * sigma_c * R^T: camera-frame observation noise expressed in the world frame.
template <typename Derived, typename Scalar>
Covariance3T<Scalar> rotate_covariance(const Eigen::MatrixBase<Derived>& r, const Covariance3T<Scalar>& sigma_c) {
    return Covariance3T<Scalar>(r * sigma_c.matrix() * r.transpose());
}

/// (A^-1 + B^-1)^-1
template <typename Scalar>
Covariance3T<Scalar> fuse(const Covariance3T<Scalar>& a, const Covariance3T<Scalar>& b) {
    const Covariance3T<Scalar> precision(a.inverse() + b.inverse());
    return Covariance3T<Scalar>(precision.inverse());
}

/// (S_1^-1 + ... + S_n^-1)^-1
template <typename Scalar>
Covariance3T<Scalar> fuse_chain(std::span<const Covariance3T<Scalar>> priors) {
    if (priors.empty()) {
        throw EmptyInput("fuse_chain needs at least one covariance");
    }
    if (priors.size() == 1) {
        return priors.front();
    }
    Matrix3<Scalar> precision = Matrix3<Scalar>::Zero();
    for (const auto& s : priors) {
        precision += s.inverse();
    }
    return Covariance3T<Scalar>(Covariance3T<Scalar>(precision).inverse());
}

}  // namespace bve
