#ifndef GOMKIT_METRICS_HPP
#define GOMKIT_METRICS_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gomkit/errors.hpp"
#include "gomkit/gom.hpp"

namespace gomkit {

double rmse(const Eigen::VectorXd& real, const Eigen::VectorXd& sim);
double mae(const Eigen::VectorXd& real, const Eigen::VectorXd& sim);

/// RMSE over the sum of the two series' root-mean-square magnitudes.
/// 0 is a perfect forecast, 1 maximal inequality. Throws DegenerateError
/// when both series are identically zero.
double theil_u1(const Eigen::VectorXd& real, const Eigen::VectorXd& sim);

struct DescriptorMetrics {
    DescriptorId descriptor;
    double rmse = 0.0;
    double mae = 0.0;
    double u1 = 0.0;
};

/// Forecast quality of one gesture's simulations. Per-descriptor values
/// are means over repetitions; the aggregates average descriptors within
/// a repetition first, then repetitions.
struct MetricReport {
    std::vector<DescriptorMetrics> per_descriptor;
    double mean_rmse = 0.0;
    double mean_mae = 0.0;
    double avg_u1 = 0.0;
    long repetitions = 0;
};

/// Simulates every repetition closed-loop from its first two frames over
/// its own length and scores it against the real data. Repetition
/// matrices are T x D with columns following the system's topology.
MetricReport evaluate(const GomSystem& system, const std::vector<Eigen::MatrixXd>& repetitions);

} // namespace gomkit

#endif
