#include "gomkit/similarity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace gomkit {

namespace {

double frame_distance(const Eigen::MatrixXd& a, long i, const Eigen::MatrixXd& b, long j) {
    return (a.row(i) - b.row(j)).norm();
}

void check_inputs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() == 0 || b.rows() == 0)
        throw DimensionError("DTW inputs must be nonempty");
    if (a.cols() != b.cols())
        throw DimensionError("DTW inputs have different channel counts: " +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.cols()));
}

} // namespace

DtwResult dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    check_inputs(a, b);
    const long na = a.rows(), nb = b.rows();
    const double inf = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd acc(na, nb);
    // 0 = diagonal, 1 = from left (j-1), 2 = from above (i-1)
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> step(na, nb);

    for (long i = 0; i < na; ++i) {
        for (long j = 0; j < nb; ++j) {
            const double local = frame_distance(a, i, b, j);
            double best = inf;
            std::int8_t from = 0;
            if (i == 0 && j == 0) {
                acc(i, j) = local;
                step(i, j) = 0;
                continue;
            }
            if (i > 0 && j > 0 && acc(i - 1, j - 1) < best) {
                best = acc(i - 1, j - 1);
                from = 0;
            }
            if (j > 0 && acc(i, j - 1) < best) {
                best = acc(i, j - 1);
                from = 1;
            }
            if (i > 0 && acc(i - 1, j) < best) {
                best = acc(i - 1, j);
                from = 2;
            }
            acc(i, j) = best + local;
            step(i, j) = from;
        }
    }

    DtwResult result;
    result.cost = acc(na - 1, nb - 1);
    long i = na - 1, j = nb - 1;
    result.path.emplace_back(i, j);
    while (i != 0 || j != 0) {
        switch (step(i, j)) {
            case 0: --i; --j; break;
            case 1: --j; break;
            default: --i; break;
        }
        result.path.emplace_back(i, j);
    }
    std::reverse(result.path.begin(), result.path.end());
    return result;
}

double dtw_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    check_inputs(a, b);
    const Eigen::MatrixXd& rows = a.rows() >= b.rows() ? a : b;
    const Eigen::MatrixXd& cols = a.rows() >= b.rows() ? b : a;
    const long na = rows.rows(), nb = cols.rows();

    std::vector<double> prev(static_cast<size_t>(nb)), curr(static_cast<size_t>(nb));
    for (long j = 0; j < nb; ++j) {
        const double local = frame_distance(rows, 0, cols, j);
        prev[static_cast<size_t>(j)] = (j == 0) ? local : prev[static_cast<size_t>(j - 1)] + local;
    }
    for (long i = 1; i < na; ++i) {
        for (long j = 0; j < nb; ++j) {
            const double local = frame_distance(rows, i, cols, j);
            double best = prev[static_cast<size_t>(j)];
            if (j > 0) {
                best = std::min(best, prev[static_cast<size_t>(j - 1)]);
                best = std::min(best, curr[static_cast<size_t>(j - 1)]);
            }
            curr[static_cast<size_t>(j)] = best + local;
        }
        std::swap(prev, curr);
    }
    return prev[static_cast<size_t>(nb - 1)];
}

std::size_t select_reference(const std::vector<Eigen::MatrixXd>& repetitions, unsigned threads) {
    if (repetitions.empty()) throw EmptyError("no repetitions to select a reference from");
    const size_t n = repetitions.size();
    for (size_t i = 1; i < n; ++i) {
        if (repetitions[i].cols() != repetitions[0].cols())
            throw DimensionError("repetition " + std::to_string(i) +
                                 " has a different descriptor dimension");
        if (repetitions[i].rows() == 0) throw DimensionError("empty repetition");
    }
    if (repetitions[0].rows() == 0) throw DimensionError("empty repetition");
    if (n == 1) return 0;

    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<double> totals(n, 0.0);
    if (threads <= 1 || pairs.size() < 2) {
        for (const auto& [i, j] : pairs) {
            const double c = dtw_cost(repetitions[i], repetitions[j]);
            totals[i] += c;
            totals[j] += c;
        }
    } else {
        std::vector<double> costs(pairs.size());
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t k = next.fetch_add(1); k < pairs.size(); k = next.fetch_add(1))
                costs[k] = dtw_cost(repetitions[pairs[k].first], repetitions[pairs[k].second]);
        };
        std::vector<std::thread> pool;
        const unsigned count = std::min<unsigned>(threads, static_cast<unsigned>(pairs.size()));
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (size_t k = 0; k < pairs.size(); ++k) {
            totals[pairs[k].first] += costs[k];
            totals[pairs[k].second] += costs[k];
        }
    }

    size_t best = 0;
    for (size_t i = 1; i < n; ++i)
        if (totals[i] < totals[best]) best = i;
    return best;
}

} // namespace gomkit
