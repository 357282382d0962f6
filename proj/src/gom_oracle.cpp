#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "gomkit/gom.hpp"

namespace gomkit {

// Reference evaluation of the equation likelihood by brute force: the
// predicted frames z = (y_2 .. y_{T-1}) satisfy L z = d + e with e iid
// N(0, sigma^2) and L unit lower triangular, so z is jointly Gaussian
// with mean L^-1 d and covariance sigma^2 L^-1 L^-T. The density is
// evaluated from that dense covariance directly.
double loglik_oracle(const GomModel& model, const Eigen::VectorXd& series,
                     const Eigen::MatrixXd& regressors) {
    const long T = series.size();
    const long K = regressors.cols();
    if (regressors.rows() != T)
        throw DimensionError("regressor series length does not match the series");
    if (static_cast<long>(model.betas.size()) != K)
        throw DimensionError("model beta count does not match regressor columns");
    if (T < 3) throw LengthError("need at least 3 frames");
    const long m = T - 2;
    if (m > 12)
        throw TooLongError("oracle evaluates at most 12 predicted frames, got " +
                           std::to_string(m));
    if (!(model.obs_noise_var > 0.0)) throw SingularError("obs_noise_var must be positive");

    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
    for (long i = 0; i < m; ++i) {
        const long t = i + 2;
        if (i >= 1)
            L(i, i - 1) = -model.alpha1;
        else
            d[i] += model.alpha1 * series[t - 1];
        if (i >= 2)
            L(i, i - 2) = -model.alpha2;
        else
            d[i] += model.alpha2 * series[t - 2];
        for (long k = 0; k < K; ++k)
            d[i] += model.betas[static_cast<size_t>(k)] * regressors(t - 1, k);
    }

    const Eigen::MatrixXd Linv = L.inverse();
    const Eigen::VectorXd mu = Linv * d;
    const Eigen::MatrixXd cov = model.obs_noise_var * (Linv * Linv.transpose());

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw SingularError("oracle covariance is not positive definite");

    const Eigen::VectorXd centered = series.segment(2, m) - mu;
    const Eigen::VectorXd alpha = llt.solve(centered);
    double logdet = 0.0;
    for (long i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));

    return -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + logdet +
                   centered.dot(alpha));
}

} // namespace gomkit
