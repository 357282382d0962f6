#ifndef GOMKIT_SIMILARITY_HPP
#define GOMKIT_SIMILARITY_HPP

#include <Eigen/Core>
#include <cstddef>
#include <utility>
#include <vector>

#include "gomkit/errors.hpp"

namespace gomkit {

struct DtwResult {
    double cost = 0.0;
    std::vector<std::pair<long, long>> path; // (i, j) from (0,0) to (Ta-1, Tb-1)
};

/// Full dynamic time warping between two multi-channel series (rows are
/// frames). Local cost is the Euclidean distance between frames; steps
/// are (1,0), (0,1), (1,1) with no window constraint.
DtwResult dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// DTW cost only, O(min(Ta,Tb)) memory. Same value as dtw().cost.
double dtw_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Index of the repetition with the smallest summed DTW cost to all
/// others; ties go to the lowest index. Pairwise costs are computed in
/// parallel when `threads` > 1.
std::size_t select_reference(const std::vector<Eigen::MatrixXd>& repetitions,
                             unsigned threads = 1);

} // namespace gomkit

#endif
