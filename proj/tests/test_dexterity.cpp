#include <doctest.h>

#include <random>

#include "gomkit/dexterity.hpp"
#include "test_util.hpp"

using namespace gomkit;
using gomkit::test::toy_chains;

namespace {

// Builds a fitted-looking system over two mirrored limbs so every
// assumption tag appears somewhere.
GomSystem synthetic_system(const std::function<double(const DescriptorId&, const std::string&)>&
                               p_of_term) {
    const std::vector<std::string> sensors = {"RSH", "RA", "RFA", "LSH", "LA", "LFA"};
    const ChainSpec chains = toy_chains({{"RSH", "RA", "RFA"}, {"LSH", "LA", "LFA"}},
                                        {{"RSH", "LSH"}, {"RA", "LA"}, {"RFA", "LFA"}});
    GomSystem system;
    system.topology = build_topology(sensors, chains);
    for (const auto& d : system.topology.descriptors) {
        const auto& regs = system.topology.regressors.at(d);
        GomModel m;
        m.descriptor = d;
        m.alpha1 = 1.0;
        m.alpha2 = -0.1;
        m.obs_noise_var = 1.0;
        m.p_lag1 = p_of_term(d, "lag1");
        m.p_lag2 = p_of_term(d, "lag2");
        for (const auto& r : regs) {
            m.betas.push_back(0.5);
            m.p_betas.push_back(p_of_term(d, r.regressor.str()));
        }
        system.models[d] = m;
    }
    return system;
}

} // namespace

TEST_CASE("worked right-arm style equation: moderate speed, significant synergy") {
    // lag-1 p=0.001 significant, lag-2 p=0.188 not; the mirror-arm term
    // is significant with a negative coefficient
    GomSystem system = synthetic_system([](const DescriptorId& d, const std::string& term) {
        if (term == "lag1") return 0.001;
        if (term == "lag2") return 0.188;
        if (d.str() == "RA.Y" && term == "LA.Y") return 0.0004;
        return 0.5;
    });
    auto& model = system.models.at({"RA", Axis::Y});
    for (size_t k = 0; k < system.topology.regressors.at({"RA", Axis::Y}).size(); ++k)
        if (system.topology.regressors.at({"RA", Axis::Y})[k].regressor.str() == "LA.Y")
            model.betas[k] = -0.324;

    const EquationReport report = equation_report(system, {"RA", Axis::Y});
    CHECK(report.speed == "moderate");
    bool found = false;
    for (const auto& t : report.terms) {
        if (t.kind == TermKind::Regressor && t.term.str() == "LA.Y") {
            found = true;
            CHECK(t.assumption == "H3");
            CHECK(t.significant);
            CHECK(t.coefficient == doctest::Approx(-0.324));
        }
        if (t.kind == TermKind::Lag1) CHECK(t.significant);
        if (t.kind == TermKind::Lag2) CHECK_FALSE(t.significant);
    }
    CHECK(found);
}

TEST_CASE("a mediation term with p=0.84 is not significant") {
    GomSystem system = synthetic_system([](const DescriptorId& d, const std::string& term) {
        if (d.str() == "RFA.X" && term == "RSH.X") return 0.84;
        return 0.01;
    });
    const EquationReport report = equation_report(system, {"RFA", Axis::X});
    for (const auto& t : report.terms) {
        if (t.kind == TermKind::Regressor && t.term.str() == "RSH.X") {
            CHECK_FALSE(t.significant);
            CHECK(t.assumption == "H4n"); // two hops away in the chain
        }
    }
    CHECK(report.speed == "slow"); // both lags at p=0.01
}

TEST_CASE("null system: nothing significant, fast speed") {
    const GomSystem system =
        synthetic_system([](const DescriptorId&, const std::string&) { return 1.0; });
    for (const auto& d : system.topology.descriptors) {
        const EquationReport report = equation_report(system, d);
        CHECK(report.speed == "fast");
        for (const auto& t : report.terms) CHECK_FALSE(t.significant);
    }
    const SensorRanking ranking = significance_counts(system);
    for (const auto& [sensor, count] : ranking.counts) CHECK(count == 0);
}

TEST_CASE("unknown descriptor raises") {
    const GomSystem system =
        synthetic_system([](const DescriptorId&, const std::string&) { return 1.0; });
    CHECK_THROWS_AS(equation_report(system, {"ZZ", Axis::X}), UnknownDescriptorError);
}

TEST_CASE("only one sensor's terms significant puts it first with exact counts") {
    // only terms naming RFA descriptors are significant, in every equation
    const GomSystem system = synthetic_system([](const DescriptorId&, const std::string& term) {
        return term.rfind("RFA.", 0) == 0 ? 0.01 : 0.9;
    });
    const SensorRanking ranking = significance_counts(system);
    CHECK(ranking.ordering.front() == "RFA");
    // RFA terms appear in its own three equations (H2 cross-axis terms),
    // in RSH.* and RA.* same-axis mediations, and in LFA.* as the mirror
    // synergy: 3 + 6 + 3 equations
    CHECK(ranking.counts.at("RFA") == 12);
    for (const auto& [sensor, count] : ranking.counts)
        if (sensor != "RFA") CHECK(count == 0);
}

TEST_CASE("lag significance counts toward the equation's own sensor") {
    const GomSystem system = synthetic_system([](const DescriptorId& d, const std::string& term) {
        return (d.str() == "LA.X" && term == "lag1") ? 0.001 : 0.9;
    });
    const SensorRanking ranking = significance_counts(system);
    CHECK(ranking.counts.at("LA") == 1);
    CHECK(ranking.ordering.front() == "LA");
}

TEST_CASE("counts add when systems are merged over a vocabulary") {
    const GomSystem a = synthetic_system([](const DescriptorId&, const std::string& term) {
        return term.rfind("RA.", 0) == 0 ? 0.01 : 0.9;
    });
    const GomSystem b = synthetic_system([](const DescriptorId&, const std::string& term) {
        return term.rfind("RA.", 0) == 0 ? 0.01 : 0.9;
    });
    const SensorRanking single = significance_counts(a);
    const SensorRanking merged = significance_counts(std::vector<const GomSystem*>{&a, &b});
    CHECK(merged.counts.at("RA") == 2 * single.counts.at("RA"));
}

TEST_CASE("sensor selection and tie-breaks") {
    SensorRanking ranking;
    ranking.counts = {{"B", 5}, {"A", 5}, {"C", 9}, {"D", 1}};
    ranking.ordering = {"C", "A", "B", "D"}; // descending, ties lexicographic

    CHECK(select_sensors(ranking, 4) == std::vector<std::string>{"C", "A", "B", "D"});
    CHECK(select_sensors(ranking, 2) == std::vector<std::string>{"C", "A"}); // A beats B on a tie
    CHECK_THROWS_AS(select_sensors(ranking, 0), RangeError);
    CHECK_THROWS_AS(select_sensors(ranking, 5), RangeError);

    // nesting: top-k is always a prefix of top-(k+1)
    for (size_t k = 1; k < 4; ++k) {
        const auto small = select_sensors(ranking, k);
        const auto big = select_sensors(ranking, k + 1);
        CHECK(std::equal(small.begin(), small.end(), big.begin()));
    }
}

TEST_CASE("ranking order is deterministic and computed from counts") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::map<std::pair<std::string, std::string>, double> ps;
    const GomSystem system = synthetic_system([&](const DescriptorId& d, const std::string& t) {
        auto key = std::make_pair(d.str(), t);
        auto it = ps.find(key);
        if (it == ps.end()) it = ps.emplace(key, u(rng)).first;
        return it->second;
    });
    const SensorRanking ranking = significance_counts(system);
    for (size_t i = 1; i < ranking.ordering.size(); ++i) {
        const long prev = ranking.counts.at(ranking.ordering[i - 1]);
        const long curr = ranking.counts.at(ranking.ordering[i]);
        CHECK(prev >= curr);
        if (prev == curr) CHECK(ranking.ordering[i - 1] < ranking.ordering[i]);
    }
}

TEST_CASE("lowering the threshold never increases a count") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::map<std::pair<std::string, std::string>, double> ps;
    const GomSystem system = synthetic_system([&](const DescriptorId& d, const std::string& t) {
        auto key = std::make_pair(d.str(), t);
        auto it = ps.find(key);
        if (it == ps.end()) it = ps.emplace(key, u(rng)).first;
        return it->second;
    });
    const SensorRanking loose = significance_counts(system, 0.5);
    const SensorRanking tight = significance_counts(system, 0.1);
    for (const auto& [sensor, count] : tight.counts) CHECK(count <= loose.counts.at(sensor));
}

TEST_CASE("report flags recompute from stored p-values at any threshold") {
    const GomSystem system = synthetic_system([](const DescriptorId&, const std::string& term) {
        return term == "lag1" ? 0.04 : 0.2;
    });
    const EquationReport strict = equation_report(system, {"RA", Axis::X}, 0.01);
    const EquationReport loose = equation_report(system, {"RA", Axis::X}, 0.25);
    for (const auto& t : strict.terms) CHECK(t.significant == (t.p_value < 0.01));
    for (const auto& t : loose.terms) CHECK(t.significant == (t.p_value < 0.25));
    CHECK(strict.speed == "fast");
    CHECK(loose.speed == "slow");
}

TEST_CASE("markdown report renders one table per equation") {
    const GomSystem system =
        synthetic_system([](const DescriptorId&, const std::string&) { return 0.2; });
    const std::string md = dexterity_report_markdown(system);
    CHECK(md.find("## RA.Y") != std::string::npos);
    CHECK(md.find("| term | coefficient | p | assumption | significant |") != std::string::npos);
    CHECK(md.find("H3") != std::string::npos);
}
