#ifndef GOMKIT_GOM_HPP
#define GOMKIT_GOM_HPP

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "gomkit/errors.hpp"
#include "gomkit/topology.hpp"

namespace gomkit {

/// One fitted second-order equation
///   y_t = alpha1 y_{t-1} + alpha2 y_{t-2} + sum_k beta_k x_{k,t-1} + e_t,
///   e_t ~ N(0, obs_noise_var).
/// alpha2 is the signed coefficient that multiplies the raw lag-2 value.
/// betas and p_betas are aligned with the topology's regressor list for
/// this descriptor.
struct GomModel {
    DescriptorId descriptor;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    std::vector<double> betas;
    double obs_noise_var = 0.0;
    double p_lag1 = 1.0;
    double p_lag2 = 1.0;
    std::vector<double> p_betas;
    double log_likelihood = 0.0;
};

/// The fitted equation bank plus training metadata.
struct GomSystem {
    GomTopology topology;
    std::map<DescriptorId, GomModel> models;
    std::string source_clip;
    long reference_index = -1;
    double frame_time = 0.0;
    std::vector<DescriptorId> held; // descriptors replaced by hold models (see FitOptions)
};

struct FitOptions {
    double ridge = 1e-8;
    /// What to do when an equation cannot be estimated (zero residual
    /// variance, e.g. a constant channel). Throw raises SingularError
    /// naming the descriptors after all others were fitted; Hold installs
    /// y_t = y_{t-1} with no significant terms and records the
    /// descriptor, which keeps constant channels simulatable.
    enum class OnSingular { Throw, Hold } on_singular = OnSingular::Throw;
};

/// Fits every descriptor's equation on the reference repetition by
/// maximum likelihood. Coefficients solve the ridge normal equations
/// (the observation-noise-only state-space MLE is exactly generalized
/// least squares); the stored log-likelihood is evaluated with the
/// Kalman filter. Columns of `reference` follow topology.descriptors.
GomSystem fit(const Eigen::MatrixXd& reference, const GomTopology& topology,
              const FitOptions& options = {});

/// One equation in isolation: series plus explicit regressor columns
/// (T x K, lagged internally to t-1). Same estimator as fit().
GomModel fit_single_equation(const DescriptorId& descriptor, const Eigen::VectorXd& series,
                             const Eigen::MatrixXd& regressors, double ridge = 1e-8);

/// Closed-loop generation: rows 0 and 1 equal `seed` (2 x D) and every
/// later step consumes only simulated values at t-1, t-2. Noise-free and
/// deterministic. Throws DivergenceError when any descriptor leaves
/// ±10^4 degrees.
Eigen::MatrixXd simulate(const GomSystem& system, const Eigen::MatrixXd& seed, long horizon);

/// Teacher-forced variant for diagnostics: lags and regressors come from
/// `real` instead of the simulation. Output row t is the one-step
/// prediction; rows 0, 1 copy `real`.
Eigen::MatrixXd simulate_open_loop(const GomSystem& system, const Eigen::MatrixXd& real);

/// Kalman-filter log-likelihood of one equation on a series: the sum of
/// innovation log-densities for frames 2..T-1, conditioned on the first
/// two frames. `regressors` is T x K, aligned with model.betas.
double equation_loglik(const GomModel& model, const Eigen::VectorXd& series,
                       const Eigen::MatrixXd& regressors);

/// The same quantity computed without any Kalman recursion: the joint
/// Gaussian log-density of frames 2..T-1 given the first two, evaluated
/// from an explicitly constructed mean vector and dense covariance.
/// Limited to 12 predicted frames (T <= 14).
double loglik_oracle(const GomModel& model, const Eigen::VectorXd& series,
                     const Eigen::MatrixXd& regressors);

} // namespace gomkit

#endif
