#ifndef GOMKIT_HMM_HPP
#define GOMKIT_HMM_HPP

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "gomkit/errors.hpp"

namespace gomkit {

enum class HmmTopology { LeftToRight, Ergodic };

/// Per-feature z-scoring fitted on training data. Models carry the
/// standardizer they were trained with; likelihoods of models sharing a
/// standardizer are directly comparable.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;

    /// Throws DegenerateDataError when any feature has zero variance.
    static Standardizer fit(const std::vector<Eigen::MatrixXd>& sequences);
    static Standardizer identity(long dims);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& sequence) const;
};

/// Gaussian-emission hidden Markov model with diagonal covariance.
/// Left-to-right allows self-transitions and +1 steps only (no skips),
/// with the initial distribution pinned to the first state.
struct HmmModel {
    int n_states = 0;
    HmmTopology topology = HmmTopology::LeftToRight;
    Eigen::VectorXd initial;    // pi
    Eigen::MatrixXd transition; // n x n, rows sum to 1
    Eigen::MatrixXd means;      // n x D (standardized space)
    Eigen::MatrixXd variances;  // n x D, >= variance floor
    Standardizer standardizer;
};

struct HmmFitOptions {
    double tol = 1e-4;
    int max_iterations = 100;
    double variance_floor = 1e-6;
    /// Shared standardizer (e.g. pooled over a training fold). Fitted
    /// from the sequences when absent.
    std::optional<Standardizer> standardizer;
};

struct HmmFitResult {
    HmmModel model;
    /// Total data log-likelihood of each accepted parameter set, in
    /// iteration order; non-decreasing by construction (a worsening
    /// update is rolled back instead of kept).
    std::vector<double> loglik_trace;
};

/// Baum-Welch estimation over one or more sequences (rows are frames).
/// State means start from equal temporal blocks of the training data, so
/// the fit is deterministic.
HmmFitResult hmm_fit(const std::vector<Eigen::MatrixXd>& sequences, int n_states,
                     HmmTopology topology, const HmmFitOptions& options = {});

/// Forward-algorithm log-probability with per-step scaling, evaluated in
/// the model's standardized feature space.
double loglik(const HmmModel& model, const Eigen::MatrixXd& sequence);

} // namespace gomkit

#endif
