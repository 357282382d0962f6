#include "gomkit/hmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gomkit {

Standardizer Standardizer::fit(const std::vector<Eigen::MatrixXd>& sequences) {
    if (sequences.empty()) throw InsufficientDataError("no sequences to standardize");
    const long D = sequences[0].cols();
    long total = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
    for (const auto& s : sequences) {
        if (s.cols() != D) throw DimensionError("sequences have mixed feature dimensions");
        sum += s.colwise().sum().transpose();
        total += s.rows();
    }
    if (total == 0) throw InsufficientDataError("sequences contain no frames");

    Standardizer z;
    z.mean = sum / static_cast<double>(total);
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(D);
    for (const auto& s : sequences)
        ss += (s.rowwise() - z.mean.transpose()).array().square().colwise().sum().matrix();
    z.stddev = (ss / static_cast<double>(total)).cwiseSqrt();
    for (long j = 0; j < D; ++j) {
        if (!(z.stddev[j] > 1e-12))
            throw DegenerateDataError("feature " + std::to_string(j) +
                                      " has zero variance after standardization");
    }
    return z;
}

Standardizer Standardizer::identity(long dims) {
    Standardizer z;
    z.mean = Eigen::VectorXd::Zero(dims);
    z.stddev = Eigen::VectorXd::Ones(dims);
    return z;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& sequence) const {
    if (sequence.cols() != mean.size())
        throw DimensionError("sequence has " + std::to_string(sequence.cols()) +
                             " features, standardizer expects " + std::to_string(mean.size()));
    return (sequence.rowwise() - mean.transpose()).array().rowwise() /
           stddev.transpose().array();
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Log emission densities, one row per frame, one column per state.
Eigen::MatrixXd log_emissions(const HmmModel& m, const Eigen::MatrixXd& obs) {
    const long T = obs.rows(), n = m.n_states;
    Eigen::MatrixXd logB(T, n);
    Eigen::VectorXd log_norm(n);
    for (long s = 0; s < n; ++s)
        log_norm[s] = -0.5 * (m.variances.row(s).array().log().sum() +
                              static_cast<double>(obs.cols()) * kLog2Pi);
    for (long t = 0; t < T; ++t) {
        for (long s = 0; s < n; ++s) {
            const auto diff = obs.row(t).array() - m.means.row(s).array();
            logB(t, s) = log_norm[s] - 0.5 * (diff.square() / m.variances.row(s).array()).sum();
        }
    }
    return logB;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp_row(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (m == kNegInf) return kNegInf;
    return m + std::log((v.array() - m).exp().sum());
}

struct ForwardBackward {
    Eigen::MatrixXd log_alpha; // T x n
    Eigen::MatrixXd log_beta;  // T x n
    double loglik = 0.0;
};

// Forward-backward entirely in the log domain: an emission that is
// hundreds of nats away from the best state must still carry weight when
// the topology forces the chain through it.
ForwardBackward forward_backward(const HmmModel& m, const Eigen::MatrixXd& logB) {
    const long T = logB.rows(), n = logB.cols();

    Eigen::MatrixXd logA(n, n);
    Eigen::VectorXd logPi(n);
    for (long i = 0; i < n; ++i) {
        logPi[i] = m.initial[i] > 0.0 ? std::log(m.initial[i]) : kNegInf;
        for (long j = 0; j < n; ++j)
            logA(i, j) = m.transition(i, j) > 0.0 ? std::log(m.transition(i, j)) : kNegInf;
    }

    ForwardBackward fb;
    fb.log_alpha.resize(T, n);
    fb.log_beta.resize(T, n);

    fb.log_alpha.row(0) = (logPi + logB.row(0).transpose()).transpose();
    Eigen::VectorXd scratch(n);
    for (long t = 1; t < T; ++t) {
        for (long s = 0; s < n; ++s) {
            scratch = fb.log_alpha.row(t - 1).transpose() + logA.col(s);
            fb.log_alpha(t, s) = logsumexp_row(scratch) + logB(t, s);
        }
    }

    fb.log_beta.row(T - 1).setZero();
    for (long t = T - 2; t >= 0; --t) {
        for (long s = 0; s < n; ++s) {
            scratch = logA.row(s).transpose() + logB.row(t + 1).transpose() +
                      fb.log_beta.row(t + 1).transpose();
            fb.log_beta(t, s) = logsumexp_row(scratch);
        }
    }

    fb.loglik = logsumexp_row(fb.log_alpha.row(T - 1).transpose());
    if (!std::isfinite(fb.loglik))
        throw DegenerateDataError("sequence has zero probability under the model");
    return fb;
}

HmmModel init_model(const std::vector<Eigen::MatrixXd>& standardized, int n_states,
                    HmmTopology topology, double variance_floor) {
    const long D = standardized[0].cols();
    HmmModel m;
    m.n_states = n_states;
    m.topology = topology;
    m.initial = Eigen::VectorXd::Zero(n_states);
    m.transition = Eigen::MatrixXd::Zero(n_states, n_states);
    if (topology == HmmTopology::LeftToRight) {
        m.initial[0] = 1.0;
        for (int s = 0; s < n_states - 1; ++s) {
            m.transition(s, s) = 0.5;
            m.transition(s, s + 1) = 0.5;
        }
        m.transition(n_states - 1, n_states - 1) = 1.0;
    } else {
        m.initial.setConstant(1.0 / n_states);
        m.transition.setConstant(1.0 / n_states);
    }

    // per-state emission start: equal temporal blocks of every sequence
    m.means.resize(n_states, D);
    m.variances.resize(n_states, D);
    long grand_total = 0;
    Eigen::VectorXd grand_sum = Eigen::VectorXd::Zero(D);
    for (const auto& seq : standardized) {
        grand_sum += seq.colwise().sum().transpose();
        grand_total += seq.rows();
    }
    const Eigen::VectorXd grand_mean = grand_sum / static_cast<double>(grand_total);

    for (int s = 0; s < n_states; ++s) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(D);
        Eigen::VectorXd ss = Eigen::VectorXd::Zero(D);
        long count = 0;
        for (const auto& seq : standardized) {
            const long T = seq.rows();
            const long lo = T * s / n_states;
            const long hi = T * (s + 1) / n_states;
            for (long t = lo; t < hi; ++t) {
                sum += seq.row(t).transpose();
                ss += seq.row(t).array().square().matrix().transpose();
                ++count;
            }
        }
        if (count == 0) {
            m.means.row(s) = grand_mean.transpose();
            m.variances.row(s).setOnes();
        } else {
            const Eigen::VectorXd mean = sum / static_cast<double>(count);
            m.means.row(s) = mean.transpose();
            m.variances.row(s) =
                (ss / static_cast<double>(count) - mean.array().square().matrix()).transpose();
        }
        m.variances.row(s) = m.variances.row(s).cwiseMax(variance_floor);
    }
    return m;
}

} // namespace

HmmFitResult hmm_fit(const std::vector<Eigen::MatrixXd>& sequences, int n_states,
                     HmmTopology topology, const HmmFitOptions& options) {
    if (sequences.empty()) throw InsufficientDataError("no training sequences");
    if (n_states < 1) throw InsufficientDataError("n_states must be at least 1");
    if (options.max_iterations < 1) throw SpecError("max_iterations must be at least 1");
    for (const auto& s : sequences) {
        if (s.rows() == 0) throw InsufficientDataError("empty training sequence");
        if (topology == HmmTopology::LeftToRight && s.rows() < n_states)
            throw InsufficientDataError(
                "a left-to-right model with " + std::to_string(n_states) +
                " states cannot emit a sequence of " + std::to_string(s.rows()) + " frames");
    }

    const Standardizer z =
        options.standardizer ? *options.standardizer : Standardizer::fit(sequences);
    std::vector<Eigen::MatrixXd> obs;
    obs.reserve(sequences.size());
    for (const auto& s : sequences) obs.push_back(z.apply(s));

    HmmModel model = init_model(obs, n_states, topology, options.variance_floor);
    model.standardizer = z;

    HmmFitResult result;
    const long n = n_states, D = obs[0].cols();
    HmmModel previous = model;
    bool stopped = false;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd pi_acc = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd xi_acc = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd gamma_acc = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd mean_acc = Eigen::MatrixXd::Zero(n, D);
        Eigen::MatrixXd sq_acc = Eigen::MatrixXd::Zero(n, D);
        double total_ll = 0.0;

        for (const auto& seq : obs) {
            const Eigen::MatrixXd logB = log_emissions(model, seq);
            const ForwardBackward fb = forward_backward(model, logB);
            total_ll += fb.loglik;
            const long T = seq.rows();

            for (long t = 0; t < T; ++t) {
                // gamma_t(s) = exp(log_alpha + log_beta - loglik); scalar
                // std::exp keeps exp(-inf) an exact zero, which Eigen's
                // clamped packet exp does not
                Eigen::VectorXd lg =
                    (fb.log_alpha.row(t) + fb.log_beta.row(t)).transpose();
                const double lmax = lg.maxCoeff();
                Eigen::VectorXd gamma =
                    lg.unaryExpr([&](double v) { return std::exp(v - lmax); });
                gamma /= gamma.sum();
                if (t == 0) pi_acc += gamma;
                gamma_acc += gamma;
                mean_acc += gamma * seq.row(t);
                sq_acc += gamma * seq.row(t).array().square().matrix();
            }
            for (long t = 0; t + 1 < T; ++t) {
                Eigen::MatrixXd lxi(n, n);
                for (long i = 0; i < n; ++i)
                    for (long j = 0; j < n; ++j)
                        lxi(i, j) = model.transition(i, j) > 0.0
                                        ? fb.log_alpha(t, i) + std::log(model.transition(i, j)) +
                                              logB(t + 1, j) + fb.log_beta(t + 1, j)
                                        : kNegInf;
                const double lmax = lxi.maxCoeff();
                if (lmax == kNegInf) continue;
                const Eigen::MatrixXd xi =
                    lxi.unaryExpr([&](double v) { return std::exp(v - lmax); });
                xi_acc += xi / xi.sum();
            }
        }

        if (!result.loglik_trace.empty()) {
            const double prev = result.loglik_trace.back();
            if (total_ll < prev) {
                // numerical wobble made this update worse; roll it back
                model = previous;
                stopped = true;
                break;
            }
            result.loglik_trace.push_back(total_ll);
            if (total_ll - prev < options.tol) {
                stopped = true;
                break;
            }
        } else {
            result.loglik_trace.push_back(total_ll);
        }
        previous = model;

        HmmModel next = model;
        if (topology == HmmTopology::Ergodic) {
            const double pi_sum = pi_acc.sum();
            if (pi_sum > 0.0) next.initial = pi_acc / pi_sum;
        }
        for (long i = 0; i < n; ++i) {
            const double row = xi_acc.row(i).sum();
            if (row > 0.0) next.transition.row(i) = xi_acc.row(i) / row;
        }
        for (long s = 0; s < n; ++s) {
            if (gamma_acc[s] > 1e-12) {
                next.means.row(s) = mean_acc.row(s) / gamma_acc[s];
                next.variances.row(s) =
                    (sq_acc.row(s) / gamma_acc[s] - next.means.row(s).array().square().matrix())
                        .cwiseMax(options.variance_floor);
            }
        }
        model = std::move(next);
    }

    if (!stopped) {
        // the loop ran out of iterations after an M-step; score the final
        // parameters so trace.back() always matches the returned model
        double final_ll = 0.0;
        for (const auto& seq : obs)
            final_ll += forward_backward(model, log_emissions(model, seq)).loglik;
        if (final_ll < result.loglik_trace.back())
            model = previous;
        else
            result.loglik_trace.push_back(final_ll);
    }
    result.model = std::move(model);
    return result;
}

double loglik(const HmmModel& model, const Eigen::MatrixXd& sequence) {
    if (sequence.cols() != model.means.cols())
        throw DimensionError("sequence has " + std::to_string(sequence.cols()) +
                             " features, model expects " + std::to_string(model.means.cols()));
    if (sequence.rows() == 0) throw DimensionError("empty sequence");
    const Eigen::MatrixXd obs = model.standardizer.apply(sequence);
    return forward_backward(model, log_emissions(model, obs)).loglik;
}

} // namespace gomkit
