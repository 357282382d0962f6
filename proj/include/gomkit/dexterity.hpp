#ifndef GOMKIT_DEXTERITY_HPP
#define GOMKIT_DEXTERITY_HPP

#include <map>
#include <string>
#include <vector>

#include "gomkit/gom.hpp"

namespace gomkit {

/// H1 lag terms appear in reports next to the tagged regressors, so the
/// tag space here extends AssumptionTag with the implicit transition.
enum class TermKind { Lag1, Lag2, Regressor };

struct EquationTerm {
    TermKind kind = TermKind::Regressor;
    DescriptorId term; // the lagged descriptor itself for H1 terms
    double coefficient = 0.0;
    double p_value = 1.0;
    std::string assumption; // "H1", "H2", "H3", "H4s", "H4n"
    bool significant = false;
};

/// All fitted terms of one equation with their significance flags, plus
/// the speed heuristic: both lags significant -> slow, one -> moderate,
/// none -> fast.
struct EquationReport {
    DescriptorId descriptor;
    double threshold = 0.05;
    std::vector<EquationTerm> terms;
    std::string speed; // "slow" | "moderate" | "fast"
};

/// How often each sensor carries a significant term, counted per
/// equation: an equation counts once for a sensor no matter how many of
/// that sensor's axes are significant in it.
struct SensorRanking {
    std::map<std::string, long> counts;
    std::vector<std::string> ordering; // descending count, ties by label
};

EquationReport equation_report(const GomSystem& system, const DescriptorId& descriptor,
                               double threshold = 0.05);

SensorRanking significance_counts(const GomSystem& system, double threshold = 0.05);

/// Vocabulary-level ranking: counts summed over all systems.
SensorRanking significance_counts(const std::vector<const GomSystem*>& systems,
                                  double threshold = 0.05);

/// Top-k sensors of the ranking, whole-sensor granularity.
std::vector<std::string> select_sensors(const SensorRanking& ranking, std::size_t k);

/// Markdown table per equation for every descriptor of the system.
std::string dexterity_report_markdown(const GomSystem& system, double threshold = 0.05);

} // namespace gomkit

#endif
