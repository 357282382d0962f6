#include "gomkit/gom.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gomkit/kalman.hpp"

namespace gomkit {

namespace {

double two_sided_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Residual variance below this is treated as an exact fit, which leaves
// the likelihood unbounded and every p-value undefined.
constexpr double kSingularVariance = 1e-12;

struct EquationDesign {
    Eigen::MatrixXd X; // (T-2) x (2+K): lag-1, lag-2, regressors at t-1
    Eigen::VectorXd y; // (T-2)
};

EquationDesign build_design(const Eigen::VectorXd& series, const Eigen::MatrixXd& regressors) {
    const long T = series.size();
    const long K = regressors.cols();
    if (regressors.rows() != T)
        throw DimensionError("regressor series length " + std::to_string(regressors.rows()) +
                             " does not match series length " + std::to_string(T));
    if (T < 3) throw LengthError("need at least 3 frames to form the lagged design");

    EquationDesign d;
    d.X.resize(T - 2, 2 + K);
    d.y.resize(T - 2);
    for (long t = 2; t < T; ++t) {
        d.y[t - 2] = series[t];
        d.X(t - 2, 0) = series[t - 1];
        d.X(t - 2, 1) = series[t - 2];
        for (long k = 0; k < K; ++k) d.X(t - 2, 2 + k) = regressors(t - 1, k);
    }
    return d;
}

GomModel fit_equation(const DescriptorId& id, const Eigen::VectorXd& series,
                      const Eigen::MatrixXd& regressors, double ridge) {
    const EquationDesign d = build_design(series, regressors);
    const long n = d.y.size();
    const long p = d.X.cols();
    if (n < p + 1)
        throw LengthError("descriptor " + id.str() + ": " + std::to_string(series.size()) +
                          " frames cannot identify " + std::to_string(p) + " coefficients");

    const Eigen::MatrixXd gram =
        d.X.transpose() * d.X + ridge * Eigen::MatrixXd::Identity(p, p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw SingularError("descriptor " + id.str() + ": normal equations are not solvable");
    const Eigen::VectorXd theta = ldlt.solve(d.X.transpose() * d.y);
    if (!theta.allFinite())
        throw SingularError("descriptor " + id.str() + ": non-finite coefficient estimate");

    const Eigen::VectorXd resid = d.y - d.X * theta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(n);
    if (!(sigma2 > kSingularVariance))
        throw SingularError("descriptor " + id.str() +
                            ": residual variance is (near) zero; the equation is degenerate");

    // asymptotic standard errors from sigma^2 (X'X)^-1, ridge-stabilized
    const Eigen::MatrixXd gram_inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

    GomModel m;
    m.descriptor = id;
    m.alpha1 = theta[0];
    m.alpha2 = theta[1];
    m.betas.assign(theta.data() + 2, theta.data() + p);
    m.obs_noise_var = sigma2;
    m.p_lag1 = two_sided_p(theta[0] / std::sqrt(sigma2 * gram_inv(0, 0)));
    m.p_lag2 = two_sided_p(theta[1] / std::sqrt(sigma2 * gram_inv(1, 1)));
    m.p_betas.resize(static_cast<size_t>(p - 2));
    for (long k = 2; k < p; ++k)
        m.p_betas[static_cast<size_t>(k - 2)] =
            two_sided_p(theta[k] / std::sqrt(sigma2 * gram_inv(k, k)));
    m.log_likelihood = equation_loglik(m, series, regressors);
    return m;
}

GomModel hold_model(const DescriptorId& id) {
    GomModel m;
    m.descriptor = id;
    m.alpha1 = 1.0;
    m.alpha2 = 0.0;
    m.obs_noise_var = kSingularVariance;
    m.p_lag1 = 1.0;
    m.p_lag2 = 1.0;
    m.log_likelihood = 0.0;
    return m;
}

} // namespace

GomModel fit_single_equation(const DescriptorId& descriptor, const Eigen::VectorXd& series,
                             const Eigen::MatrixXd& regressors, double ridge) {
    return fit_equation(descriptor, series, regressors, ridge);
}

GomSystem fit(const Eigen::MatrixXd& reference, const GomTopology& topology,
              const FitOptions& options) {
    topology.validate();
    const long D = static_cast<long>(topology.descriptors.size());
    if (reference.cols() != D)
        throw DimensionError("reference has " + std::to_string(reference.cols()) +
                             " columns for " + std::to_string(D) + " descriptors");

    long widest = 0;
    for (const auto& d : topology.descriptors)
        widest = std::max(widest, static_cast<long>(topology.regressors.at(d).size()));
    if (reference.rows() < 3 + widest)
        throw LengthError("reference of " + std::to_string(reference.rows()) +
                          " frames is shorter than 3 + " + std::to_string(widest) +
                          " (widest equation)");

    GomSystem system;
    system.topology = topology;

    std::string singular;
    for (long i = 0; i < D; ++i) {
        const DescriptorId& id = topology.descriptors[static_cast<size_t>(i)];
        const auto& regs = topology.regressors.at(id);
        Eigen::MatrixXd exog(reference.rows(), static_cast<long>(regs.size()));
        for (size_t k = 0; k < regs.size(); ++k) {
            const long col = topology.descriptor_index(regs[k].regressor);
            exog.col(static_cast<long>(k)) = reference.col(col);
        }
        try {
            system.models[id] = fit_equation(id, reference.col(i), exog, options.ridge);
        } catch (const SingularError& e) {
            if (options.on_singular == FitOptions::OnSingular::Hold) {
                GomModel m = hold_model(id);
                m.p_betas.assign(regs.size(), 1.0);
                m.betas.assign(regs.size(), 0.0);
                system.models[id] = std::move(m);
                system.held.push_back(id);
            } else {
                if (!singular.empty()) singular += "; ";
                singular += e.what();
            }
        }
    }
    if (!singular.empty()) throw SingularError(singular);
    return system;
}

Eigen::MatrixXd simulate(const GomSystem& system, const Eigen::MatrixXd& seed, long horizon) {
    const long D = static_cast<long>(system.topology.descriptors.size());
    if (seed.rows() != 2 || seed.cols() != D)
        throw DimensionError("seed must be 2 x " + std::to_string(D));
    if (horizon < 2) throw SpecError("simulation horizon must be at least 2");
    if (!seed.allFinite()) throw SpecError("seed frames must be finite");

    // resolve column indices once
    struct Wiring {
        const GomModel* model;
        std::vector<long> regressor_cols;
    };
    std::vector<Wiring> wiring(static_cast<size_t>(D));
    for (long i = 0; i < D; ++i) {
        const DescriptorId& id = system.topology.descriptors[static_cast<size_t>(i)];
        auto it = system.models.find(id);
        if (it == system.models.end())
            throw UnknownDescriptorError("system has no model for " + id.str());
        Wiring w;
        w.model = &it->second;
        for (const auto& r : system.topology.regressors.at(id))
            w.regressor_cols.push_back(system.topology.descriptor_index(r.regressor));
        if (w.regressor_cols.size() != w.model->betas.size())
            throw DimensionError("model for " + id.str() +
                                 " does not match the topology's regressor list");
        wiring[static_cast<size_t>(i)] = std::move(w);
    }

    Eigen::MatrixXd out(horizon, D);
    out.row(0) = seed.row(0);
    out.row(1) = seed.row(1);
    constexpr double kDivergenceLimit = 1e4;
    for (long t = 2; t < horizon; ++t) {
        for (long i = 0; i < D; ++i) {
            const Wiring& w = wiring[static_cast<size_t>(i)];
            double v = w.model->alpha1 * out(t - 1, i) + w.model->alpha2 * out(t - 2, i);
            for (size_t k = 0; k < w.regressor_cols.size(); ++k)
                v += w.model->betas[k] * out(t - 1, w.regressor_cols[k]);
            if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit)
                throw DivergenceError("descriptor " +
                                      system.topology.descriptors[static_cast<size_t>(i)].str() +
                                      " diverged at frame " + std::to_string(t));
            out(t, i) = v;
        }
    }
    return out;
}

Eigen::MatrixXd simulate_open_loop(const GomSystem& system, const Eigen::MatrixXd& real) {
    const long D = static_cast<long>(system.topology.descriptors.size());
    if (real.cols() != D)
        throw DimensionError("input has " + std::to_string(real.cols()) + " columns for " +
                             std::to_string(D) + " descriptors");
    if (real.rows() < 2) throw LengthError("need at least 2 frames");

    Eigen::MatrixXd out(real.rows(), D);
    out.topRows(2) = real.topRows(2);
    for (long t = 2; t < real.rows(); ++t) {
        for (long i = 0; i < D; ++i) {
            const DescriptorId& id = system.topology.descriptors[static_cast<size_t>(i)];
            const GomModel& m = system.models.at(id);
            double v = m.alpha1 * real(t - 1, i) + m.alpha2 * real(t - 2, i);
            const auto& regs = system.topology.regressors.at(id);
            for (size_t k = 0; k < regs.size(); ++k)
                v += m.betas[k] * real(t - 1, system.topology.descriptor_index(regs[k].regressor));
            out(t, i) = v;
        }
    }
    return out;
}

double equation_loglik(const GomModel& model, const Eigen::VectorXd& series,
                       const Eigen::MatrixXd& regressors) {
    const long T = series.size();
    const long K = regressors.cols();
    if (regressors.rows() != T)
        throw DimensionError("regressor series length does not match the series");
    if (static_cast<long>(model.betas.size()) != K)
        throw DimensionError("model has " + std::to_string(model.betas.size()) +
                             " betas for " + std::to_string(K) + " regressor columns");
    if (T < 3) throw LengthError("need at least 3 frames");
    if (!(model.obs_noise_var > 0.0)) throw SingularError("obs_noise_var must be positive");

    // State [y_t, y_{t-1}]; the noise term of the equation enters as
    // process noise on the first component and the observation reads the
    // first component exactly, so the innovation at each step is the
    // one-step regression residual.
    ScalarObservationModel ssm;
    ssm.transition.resize(2, 2);
    ssm.transition << model.alpha1, model.alpha2, 1.0, 0.0;
    ssm.process_noise = Eigen::MatrixXd::Zero(2, 2);
    ssm.process_noise(0, 0) = model.obs_noise_var;
    ssm.observation = Eigen::VectorXd::Zero(2);
    ssm.observation[0] = 1.0;
    ssm.observation_noise = 0.0;

    KalmanState state;
    state.mean.resize(2);
    state.mean << series[1], series[0];
    state.cov = Eigen::MatrixXd::Zero(2, 2);

    double loglik = 0.0;
    Eigen::VectorXd control = Eigen::VectorXd::Zero(2);
    for (long t = 2; t < T; ++t) {
        control[0] = 0.0;
        for (long k = 0; k < K; ++k)
            control[0] += model.betas[static_cast<size_t>(k)] * regressors(t - 1, k);
        loglik += kalman_step(ssm, state, series[t], control).loglik;
    }
    return loglik;
}

} // namespace gomkit
