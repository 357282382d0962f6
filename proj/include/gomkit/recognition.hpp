#ifndef GOMKIT_RECOGNITION_HPP
#define GOMKIT_RECOGNITION_HPP

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gomkit/hmm.hpp"

namespace gomkit {

struct LabeledSequence {
    std::string label;
    Eigen::MatrixXd features; // T x D
};

/// Highest-likelihood class; ties break toward the earlier class label.
std::string classify(const std::map<std::string, HmmModel>& models,
                     const Eigen::MatrixXd& sequence);

struct CvOptions {
    int n_states = 5;
    HmmTopology topology = HmmTopology::LeftToRight;
    int folds = 10;
    std::uint64_t seed = 0;
    HmmFitOptions fit;
};

struct CvReport {
    int folds = 0;
    std::vector<double> fold_accuracy;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<std::string> classes;          // sorted
    std::vector<std::vector<long>> confusion;  // [true][predicted]
    std::vector<std::string> warnings;
    /// Baum-Welch traces of every fit performed, for monotonicity audits.
    std::vector<std::vector<double>> loglik_traces;
};

/// Stratified k-fold cross-validation of per-class HMMs. Feature
/// standardization is pooled over each training fold so class
/// likelihoods are comparable. Folds are reduced (with a warning) when
/// the smallest class has fewer members than requested; classes with
/// fewer than 2 repetitions raise InsufficientDataError.
CvReport cross_validate(const std::vector<LabeledSequence>& data, const CvOptions& options);

} // namespace gomkit

#endif
