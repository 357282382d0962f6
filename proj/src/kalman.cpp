#include "gomkit/kalman.hpp"

#include <cmath>
#include <numbers>

namespace gomkit {

KalmanStep kalman_step(const ScalarObservationModel& model, KalmanState& state, double y,
                       const Eigen::VectorXd& control) {
    // predict
    state.mean = model.transition * state.mean + control;
    state.cov = model.transition * state.cov * model.transition.transpose() + model.process_noise;

    // update
    const Eigen::VectorXd& h = model.observation;
    KalmanStep step;
    step.innovation = y - h.dot(state.mean);
    step.innovation_var = h.dot(state.cov * h) + model.observation_noise;
    if (!(step.innovation_var > 0.0))
        throw SingularError("innovation variance is not positive");
    step.loglik = -0.5 * (std::log(2.0 * std::numbers::pi * step.innovation_var) +
                          step.innovation * step.innovation / step.innovation_var);

    const Eigen::VectorXd gain = state.cov * h / step.innovation_var;
    state.mean += gain * step.innovation;
    // Joseph form keeps the covariance symmetric
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(state.cov.rows(), state.cov.cols());
    const Eigen::MatrixXd J = I - gain * h.transpose();
    state.cov = J * state.cov * J.transpose() +
                gain * model.observation_noise * gain.transpose();
    return step;
}

} // namespace gomkit
