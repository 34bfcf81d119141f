#pragma once

// Viewpoint losses over the candidate next camera position c_hat, given the
// current fruit estimate k_hat, the accumulated prior covariance sigma_o and
// the constant camera-frame observation covariance sigma_c.

#include <Eigen/Dense>

#include <cmath>

#include "bve/belief.hpp"
#include "bve/errors.hpp"
#include "bve/geometry.hpp"

namespace bve {

struct SigmoidParams {
    double a = 0.8;   ///< aggressiveness
    double b = 10.0;  ///< set-point iteration (activation = 0.5 there)
};

enum class LossFamily {
    Dispersion,              ///< -ln det(sigma_n^-1 + sigma_o^-1)
    MaxEigenvalue,           ///< max |eig| of the fused covariance
    DispersionWithApproach,  ///< dispersion + act(i) * ||k_hat - c_hat||
};

struct LossKind {
    LossFamily family = LossFamily::Dispersion;
    SigmoidParams sigmoid{};

    static LossKind dispersion() { return {LossFamily::Dispersion, {}}; }
    static LossKind max_eigenvalue() { return {LossFamily::MaxEigenvalue, {}}; }
    static LossKind with_approach(SigmoidParams p) { return {LossFamily::DispersionWithApproach, p}; }
};

template <typename Scalar = double>
Scalar sigmoid_act(int i, const SigmoidParams& p) {
    return Scalar(1) / (Scalar(1) + std::exp(-Scalar(p.a) * (Scalar(i) - Scalar(p.b))));
}

/// Evaluates one loss family for a fixed belief. The precision matrices of
/// sigma_o and sigma_c are factorized once so the optimizer can evaluate many
/// candidates cheaply.
template <typename Scalar>
class ViewpointLossT {
public:
    using Vec = Vector3<Scalar>;
    using Mat = Matrix3<Scalar>;

    ViewpointLossT(LossKind kind, const Vec& k_hat, const Covariance3T<Scalar>& sigma_o,
                   const Covariance3T<Scalar>& sigma_c, int iteration = 0)
        : kind_(kind),
          k_hat_(k_hat),
          precision_o_(sigma_o.inverse()),
          precision_c_(sigma_c.inverse()),
          activation_(sigmoid_act<Scalar>(iteration, kind.sigmoid)) {}

    Scalar operator()(const Vec& c_hat) const {
        switch (kind_.family) {
        case LossFamily::Dispersion:
            return dispersion(c_hat);
        case LossFamily::MaxEigenvalue:
            return max_eigenvalue(c_hat);
        case LossFamily::DispersionWithApproach:
            return dispersion(c_hat) + activation_ * (k_hat_ - c_hat).norm();
        }
        return dispersion(c_hat);
    }

    /// Total precision sigma_o^-1 + sigma_n^-1 for a camera at c_hat.
    Mat precision(const Vec& c_hat) const {
        const Mat r = look_at_rotation(k_hat_, c_hat);
        return precision_o_ + r * precision_c_ * r.transpose();
    }

    Scalar dispersion(const Vec& c_hat) const {
        const Scalar det = precision(c_hat).determinant();
        if (!(det > Scalar(0))) {
            throw SingularCovariance("fused precision is not positive definite");
        }
        return -std::log(det);
    }

    Scalar max_eigenvalue(const Vec& c_hat) const {
        const Covariance3T<Scalar> fused(Covariance3T<Scalar>(precision(c_hat)).inverse());
        return fused.eigenvalues().cwiseAbs().maxCoeff();
    }

    /// Analytic gradient of dispersion() with respect to c_hat, propagated
    /// through the look-at rotation.
    Vec dispersion_gradient(const Vec& c_hat) const {
        const Vec v = k_hat_ - c_hat;
        const Scalar vn = v.norm();
        if (!(vn > Scalar(kDegenerateNorm))) {
            throw DegenerateDirection("camera coincides with the fruit estimate");
        }
        const Mat r = look_at_rotation(k_hat_, c_hat);
        const Vec x = r.col(0);
        const Vec y = r.col(1);
        const Vec z = r.col(2);
        const bool vertical = std::abs(x.x()) < Scalar(kVerticalViewEps) && std::abs(x.y()) < Scalar(kVerticalViewEps);
        const Scalar y_raw_norm = std::hypot(x.x(), x.y());

        const Mat m_inv = (precision_o_ + r * precision_c_ * r.transpose()).inverse();
        const Mat right = precision_c_ * r.transpose();

        Vec grad;
        for (int j = 0; j < 3; ++j) {
            const Vec dv = -Vec::Unit(j);
            const Vec dx = (Mat::Identity() - x * x.transpose()) * dv / vn;
            Vec dy = Vec::Zero();
            if (!vertical) {
                const Vec dy_raw(-dx.y(), dx.x(), Scalar(0));
                dy = (Mat::Identity() - y * y.transpose()) * dy_raw / y_raw_norm;
            }
            const Vec dz_raw = dx.cross(y) + x.cross(dy);
            const Vec dz = (Mat::Identity() - z * z.transpose()) * dz_raw;
            Mat dr;
            dr.col(0) = dx;
            dr.col(1) = dy;
            dr.col(2) = dz;
            grad(j) = Scalar(-2) * (m_inv * dr * right).trace();
        }
        return grad;
    }

    const LossKind& kind() const { return kind_; }
    const Vec& k_hat() const { return k_hat_; }

private:
    LossKind kind_;
    Vec k_hat_;
    Mat precision_o_;
    Mat precision_c_;
    Scalar activation_;
};

using ViewpointLoss = ViewpointLossT<double>;

template <typename Scalar>
Scalar loss_dispersion(const Vector3<Scalar>& c_hat, const Vector3<Scalar>& k_hat,
                       const Covariance3T<Scalar>& sigma_o, const Covariance3T<Scalar>& sigma_c) {
    return ViewpointLossT<Scalar>(LossKind::dispersion(), k_hat, sigma_o, sigma_c).dispersion(c_hat);
}

template <typename Scalar>
Scalar loss_max_eig(const Vector3<Scalar>& c_hat, const Vector3<Scalar>& k_hat,
                    const Covariance3T<Scalar>& sigma_o, const Covariance3T<Scalar>& sigma_c) {
    return ViewpointLossT<Scalar>(LossKind::max_eigenvalue(), k_hat, sigma_o, sigma_c).max_eigenvalue(c_hat);
}

template <typename Scalar>
Scalar loss_with_approach(const Vector3<Scalar>& c_hat, const Vector3<Scalar>& k_hat,
                          const Covariance3T<Scalar>& sigma_o, const Covariance3T<Scalar>& sigma_c, int i,
                          const SigmoidParams& p) {
    return ViewpointLossT<Scalar>(LossKind::with_approach(p), k_hat, sigma_o, sigma_c, i)(c_hat);
}

}  // namespace bve
