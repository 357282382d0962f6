#include "gomkit/dexterity.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace gomkit {

EquationReport equation_report(const GomSystem& system, const DescriptorId& descriptor,
                               double threshold) {
    auto it = system.models.find(descriptor);
    if (it == system.models.end())
        throw UnknownDescriptorError("system has no model for " + descriptor.str());
    const GomModel& m = it->second;
    const auto& regs = system.topology.regressors.at(descriptor);

    EquationReport report;
    report.descriptor = descriptor;
    report.threshold = threshold;

    report.terms.push_back({TermKind::Lag1, descriptor, m.alpha1, m.p_lag1, "H1",
                            m.p_lag1 < threshold});
    report.terms.push_back({TermKind::Lag2, descriptor, m.alpha2, m.p_lag2, "H1",
                            m.p_lag2 < threshold});
    for (size_t k = 0; k < regs.size(); ++k) {
        report.terms.push_back({TermKind::Regressor, regs[k].regressor, m.betas[k], m.p_betas[k],
                                assumption_name(regs[k].tag), m.p_betas[k] < threshold});
    }

    const int lags = (m.p_lag1 < threshold ? 1 : 0) + (m.p_lag2 < threshold ? 1 : 0);
    report.speed = lags == 2 ? "slow" : lags == 1 ? "moderate" : "fast";
    return report;
}

namespace {

void accumulate_counts(const GomSystem& system, double threshold,
                       std::map<std::string, long>& counts) {
    for (const auto& s : system.topology.descriptors) counts.emplace(s.sensor, 0);
    for (const auto& d : system.topology.descriptors) {
        const EquationReport report = equation_report(system, d, threshold);
        std::set<std::string> hit;
        for (const auto& term : report.terms)
            if (term.significant) hit.insert(term.term.sensor);
        for (const auto& s : hit) counts[s] += 1;
    }
}

SensorRanking rank(std::map<std::string, long> counts) {
    SensorRanking ranking;
    ranking.counts = std::move(counts);
    for (const auto& [s, c] : ranking.counts) ranking.ordering.push_back(s);
    std::stable_sort(ranking.ordering.begin(), ranking.ordering.end(),
                     [&](const std::string& a, const std::string& b) {
                         const long ca = ranking.counts.at(a), cb = ranking.counts.at(b);
                         if (ca != cb) return ca > cb;
                         return a < b;
                     });
    return ranking;
}

} // namespace

SensorRanking significance_counts(const GomSystem& system, double threshold) {
    std::map<std::string, long> counts;
    accumulate_counts(system, threshold, counts);
    return rank(std::move(counts));
}

SensorRanking significance_counts(const std::vector<const GomSystem*>& systems,
                                  double threshold) {
    std::map<std::string, long> counts;
    for (const GomSystem* s : systems) accumulate_counts(*s, threshold, counts);
    return rank(std::move(counts));
}

std::vector<std::string> select_sensors(const SensorRanking& ranking, std::size_t k) {
    if (k < 1 || k > ranking.ordering.size())
        throw RangeError("k = " + std::to_string(k) + " is outside [1, " +
                         std::to_string(ranking.ordering.size()) + "]");
    return {ranking.ordering.begin(), ranking.ordering.begin() + static_cast<long>(k)};
}

namespace {

std::string term_label(const EquationTerm& t) {
    switch (t.kind) {
        case TermKind::Lag1: return t.term.str() + "[t-1]";
        case TermKind::Lag2: return t.term.str() + "[t-2]";
        case TermKind::Regressor: return t.term.str() + "[t-1]";
    }
    return t.term.str();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string dexterity_report_markdown(const GomSystem& system, double threshold) {
    std::ostringstream out;
    out << "# Dexterity analysis\n\n";
    out << "Significance threshold: p < " << threshold << "\n";
    for (const auto& d : system.topology.descriptors) {
        const EquationReport r = equation_report(system, d, threshold);
        out << "\n## " << d.str() << " (speed: " << r.speed << ")\n\n";
        out << "| term | coefficient | p | assumption | significant |\n";
        out << "|------|-------------|---|------------|-------------|\n";
        for (const auto& t : r.terms) {
            out << "| " << term_label(t) << " | " << num(t.coefficient) << " | "
                << num(t.p_value) << " | " << t.assumption << " | "
                << (t.significant ? "yes" : "no") << " |\n";
        }
    }
    return out.str();
}

} // namespace gomkit
