#ifndef GOMKIT_KALMAN_HPP
#define GOMKIT_KALMAN_HPP

#include <Eigen/Core>

#include "gomkit/errors.hpp"

namespace gomkit {

/// Linear-Gaussian state-space model with a scalar observation:
///   x_t = F x_{t-1} + c_t + w_t,   w_t ~ N(0, Q)
///   y_t = h' x_t + v_t,            v_t ~ N(0, r)
struct ScalarObservationModel {
    Eigen::MatrixXd transition;    // F
    Eigen::MatrixXd process_noise; // Q
    Eigen::VectorXd observation;   // h
    double observation_noise = 0.0;
};

struct KalmanState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

struct KalmanStep {
    double innovation = 0.0;
    double innovation_var = 0.0;
    double loglik = 0.0; // Gaussian log-density of this innovation
};

/// One predict/update cycle. `control` is the additive input c_t.
/// Returns the innovation decomposition term; throws SingularError when
/// the innovation variance is not positive.
KalmanStep kalman_step(const ScalarObservationModel& model, KalmanState& state, double y,
                       const Eigen::VectorXd& control);

} // namespace gomkit

#endif
