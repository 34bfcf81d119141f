#pragma once

// Range-only extended Kalman filter for a static target. The state is the
// target position; the measurement is the camera-to-target distance.

#include <Eigen/Dense>

#include <cmath>

#include "bve/belief.hpp"
#include "bve/errors.hpp"
#include "bve/geometry.hpp"

namespace bve {

template <typename Scalar>
struct EkfStateT {
    Vector3<Scalar> x_hat = Vector3<Scalar>::Zero();
    Covariance3T<Scalar> P;
};
using EkfState = EkfStateT<double>;

template <typename Scalar>
struct ProcessNoiseT {
    Covariance3T<Scalar> Q = Covariance3T<Scalar>::isotropic(Scalar(1e-6));
};
using ProcessNoise = ProcessNoiseT<double>;

template <typename Scalar>
struct RangeMeasurementModelT {
    Scalar sigma_xx = Scalar(0.0025);  ///< range variance, m^2
};
using RangeMeasurementModel = RangeMeasurementModelT<double>;

enum class CovarianceUpdate {
    Simple,  ///< (I - K H) P, symmetrized
    Joseph,  ///< (I - K H) P (I - K H)^T + K R K^T
};

/// Static-target prediction: x_hat is kept, P grows by Q.
template <typename Scalar>
EkfStateT<Scalar> predict(const EkfStateT<Scalar>& state, const ProcessNoiseT<Scalar>& q) {
    return {state.x_hat, Covariance3T<Scalar>(state.P.matrix() + q.Q.matrix())};
}

/// Simulated range reading; `noise_sample` is a standard-normal draw.
template <typename Scalar>
Scalar measure_range(const Vector3<Scalar>& true_k, const Vector3<Scalar>& c, const RangeMeasurementModelT<Scalar>& model,
                     Scalar noise_sample) {
    return (true_k - c).norm() + noise_sample * std::sqrt(model.sigma_xx);
}

template <typename Scalar>
EkfStateT<Scalar> update(const EkfStateT<Scalar>& state, Scalar z, const Vector3<Scalar>& c,
                         const RangeMeasurementModelT<Scalar>& model,
                         CovarianceUpdate form = CovarianceUpdate::Simple) {
    const Vector3<Scalar> d = state.x_hat - c;
    const Scalar h = d.norm();
    if (!(h > Scalar(1e-9))) {
        throw DegenerateDirection("range Jacobian undefined: camera at the estimate");
    }
    const Eigen::Matrix<Scalar, 1, 3> H = d.transpose() / h;
    const Matrix3<Scalar>& P = state.P.matrix();
    const Scalar innovation_var = (H * P * H.transpose())(0, 0) + model.sigma_xx;
    if (!(innovation_var > Scalar(0))) {
        throw NumericalBreakdown("non-positive innovation variance");
    }
    const Vector3<Scalar> K = P * H.transpose() / innovation_var;
    const Matrix3<Scalar> IKH = Matrix3<Scalar>::Identity() - K * H;

    Matrix3<Scalar> P_next;
    if (form == CovarianceUpdate::Joseph) {
        P_next = IKH * P * IKH.transpose() + model.sigma_xx * K * K.transpose();
    } else {
        P_next = IKH * P;
    }
    return {state.x_hat + K * (z - h), Covariance3T<Scalar>(P_next)};
}

/// One predict/correct cycle with a simulated reading taken from `c`.
template <typename Scalar>
EkfStateT<Scalar> step(const EkfStateT<Scalar>& state, const Vector3<Scalar>& true_k, const Vector3<Scalar>& c,
                       const ProcessNoiseT<Scalar>& q, const RangeMeasurementModelT<Scalar>& model, Scalar noise_sample,
                       CovarianceUpdate form = CovarianceUpdate::Simple) {
    return update(predict(state, q), measure_range(true_k, c, model, noise_sample), c, model, form);
}

/// Normalized estimation error squared, (x_hat - x)^T P^-1 (x_hat - x).
template <typename Scalar>
Scalar nees(const EkfStateT<Scalar>& state, const Vector3<Scalar>& truth) {
    const Vector3<Scalar> e = state.x_hat - truth;
    return e.dot(state.P.matrix().llt().solve(e));
}

}  // namespace bve
