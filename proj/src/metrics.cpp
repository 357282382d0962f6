#include "gomkit/metrics.hpp"

#include <cmath>

namespace gomkit {

namespace {

void check_lengths(const Eigen::VectorXd& real, const Eigen::VectorXd& sim) {
    if (real.size() != sim.size())
        throw LengthMismatchError("series lengths differ: " + std::to_string(real.size()) +
                                  " vs " + std::to_string(sim.size()));
    if (real.size() == 0) throw LengthMismatchError("series are empty");
}

double rms(const Eigen::VectorXd& v) {
    return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

} // namespace

double rmse(const Eigen::VectorXd& real, const Eigen::VectorXd& sim) {
    check_lengths(real, sim);
    return rms(real - sim);
}

double mae(const Eigen::VectorXd& real, const Eigen::VectorXd& sim) {
    check_lengths(real, sim);
    return (real - sim).cwiseAbs().mean();
}

double theil_u1(const Eigen::VectorXd& real, const Eigen::VectorXd& sim) {
    check_lengths(real, sim);
    const double denom = rms(real) + rms(sim);
    if (!(denom > 0.0))
        throw DegenerateError("Theil's U1 is undefined for two identically zero series");
    return rms(real - sim) / denom;
}

MetricReport evaluate(const GomSystem& system, const std::vector<Eigen::MatrixXd>& repetitions) {
    const long D = static_cast<long>(system.topology.descriptors.size());
    MetricReport report;
    if (repetitions.empty()) return report;

    report.per_descriptor.resize(static_cast<size_t>(D));
    for (long i = 0; i < D; ++i)
        report.per_descriptor[static_cast<size_t>(i)].descriptor =
            system.topology.descriptors[static_cast<size_t>(i)];

    double sum_rmse = 0.0, sum_mae = 0.0, sum_u1 = 0.0;
    for (size_t r = 0; r < repetitions.size(); ++r) {
        const Eigen::MatrixXd& real = repetitions[r];
        try {
            if (real.cols() != D)
                throw DimensionError("repetition has " + std::to_string(real.cols()) +
                                     " columns for " + std::to_string(D) + " descriptors");
            if (real.rows() < 2) throw LengthError("repetition shorter than 2 frames");
            const Eigen::MatrixXd sim = simulate(system, real.topRows(2), real.rows());

            double rep_rmse = 0.0, rep_mae = 0.0, rep_u1 = 0.0;
            for (long i = 0; i < D; ++i) {
                auto& slot = report.per_descriptor[static_cast<size_t>(i)];
                const double e_rmse = rmse(real.col(i), sim.col(i));
                const double e_mae = mae(real.col(i), sim.col(i));
                const double e_u1 = theil_u1(real.col(i), sim.col(i));
                slot.rmse += e_rmse;
                slot.mae += e_mae;
                slot.u1 += e_u1;
                rep_rmse += e_rmse;
                rep_mae += e_mae;
                rep_u1 += e_u1;
            }
            sum_rmse += rep_rmse / static_cast<double>(D);
            sum_mae += rep_mae / static_cast<double>(D);
            sum_u1 += rep_u1 / static_cast<double>(D);
            ++report.repetitions;
        } catch (const DivergenceError& e) {
            throw DivergenceError("repetition " + std::to_string(r) + ": " + e.what());
        } catch (const DegenerateError& e) {
            throw DegenerateError("repetition " + std::to_string(r) + ": " + e.what());
        } catch (const DimensionError& e) {
            throw DimensionError("repetition " + std::to_string(r) + ": " + e.what());
        } catch (const LengthMismatchError& e) {
            throw LengthMismatchError("repetition " + std::to_string(r) + ": " + e.what());
        } catch (const LengthError& e) {
            throw LengthError("repetition " + std::to_string(r) + ": " + e.what());
        }
    }

    const double n = static_cast<double>(report.repetitions);
    for (auto& slot : report.per_descriptor) {
        slot.rmse /= n;
        slot.mae /= n;
        slot.u1 /= n;
    }
    report.mean_rmse = sum_rmse / n;
    report.mean_mae = sum_mae / n;
    report.avg_u1 = sum_u1 / n;
    return report;
}

} // namespace gomkit
