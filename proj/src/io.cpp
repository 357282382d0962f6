#include "gomkit/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace gomkit {

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ArtifactError("cannot write " + tmp.string());
        out << content;
        if (!out) throw ArtifactError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

constexpr int kSystemVersion = 1;
constexpr int kUnwrapVersion = 1;

json topology_to_json(const GomTopology& topo) {
    json j;
    j["descriptors"] = json::array();
    for (const auto& d : topo.descriptors) j["descriptors"].push_back(d.str());
    json edges = json::object();
    for (const auto& d : topo.descriptors) {
        json list = json::array();
        for (const auto& r : topo.regressors.at(d))
            list.push_back(json::array({r.regressor.str(), assumption_name(r.tag)}));
        edges[d.str()] = std::move(list);
    }
    j["edges"] = std::move(edges);
    return j;
}

GomTopology topology_from_json(const json& j) {
    GomTopology topo;
    for (const auto& s : j.at("descriptors"))
        topo.descriptors.push_back(DescriptorId::parse(s.get<std::string>()));
    for (const auto& d : topo.descriptors) {
        std::vector<RegressorRef> regs;
        for (const auto& e : j.at("edges").at(d.str()))
            regs.push_back({DescriptorId::parse(e.at(0).get<std::string>()),
                            assumption_from_name(e.at(1).get<std::string>())});
        topo.regressors[d] = std::move(regs);
    }
    return topo;
}

} // namespace

std::string system_to_json(const GomSystem& system) {
    json j;
    j["version"] = kSystemVersion;
    j["source_clip"] = system.source_clip;
    j["reference_index"] = system.reference_index;
    j["frame_time"] = system.frame_time;

    std::vector<std::string> sensors;
    for (const auto& d : system.topology.descriptors)
        if (sensors.empty() || sensors.back() != d.sensor) sensors.push_back(d.sensor);
    j["sensor_set"] = sensors;

    j["topology"] = topology_to_json(system.topology);

    json models = json::object();
    for (const auto& [id, m] : system.models) {
        const auto& regs = system.topology.regressors.at(id);
        json jm;
        jm["alpha"] = json::array({m.alpha1, m.alpha2});
        json betas = json::object();
        json pvals = json::object();
        pvals["lag1"] = m.p_lag1;
        pvals["lag2"] = m.p_lag2;
        for (size_t k = 0; k < regs.size(); ++k) {
            betas[regs[k].regressor.str()] = m.betas[k];
            pvals[regs[k].regressor.str()] = m.p_betas[k];
        }
        jm["betas"] = std::move(betas);
        jm["obs_noise_var"] = m.obs_noise_var;
        jm["p_values"] = std::move(pvals);
        jm["log_likelihood"] = m.log_likelihood;
        models[id.str()] = std::move(jm);
    }
    j["models"] = std::move(models);

    json held = json::array();
    for (const auto& d : system.held) held.push_back(d.str());
    j["held"] = std::move(held);

    return j.dump(2) + "\n";
}

GomSystem system_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model JSON: ") + e.what());
    }
    if (j.value("version", 0) != kSystemVersion)
        throw ConfigError("unsupported model document version");

    GomSystem system;
    system.source_clip = j.value("source_clip", std::string());
    system.reference_index = j.value("reference_index", -1L);
    system.frame_time = j.value("frame_time", 0.0);
    system.topology = topology_from_json(j.at("topology"));

    for (const auto& d : system.topology.descriptors) {
        const json& jm = j.at("models").at(d.str());
        const auto& regs = system.topology.regressors.at(d);
        GomModel m;
        m.descriptor = d;
        m.alpha1 = jm.at("alpha").at(0).get<double>();
        m.alpha2 = jm.at("alpha").at(1).get<double>();
        m.obs_noise_var = jm.at("obs_noise_var").get<double>();
        m.log_likelihood = jm.at("log_likelihood").get<double>();
        m.p_lag1 = jm.at("p_values").at("lag1").get<double>();
        m.p_lag2 = jm.at("p_values").at("lag2").get<double>();
        for (const auto& r : regs) {
            m.betas.push_back(jm.at("betas").at(r.regressor.str()).get<double>());
            m.p_betas.push_back(jm.at("p_values").at(r.regressor.str()).get<double>());
        }
        system.models[d] = std::move(m);
    }
    for (const auto& h : j.value("held", json::array()))
        system.held.push_back(DescriptorId::parse(h.get<std::string>()));
    return system;
}

void save_system(const std::string& path, const GomSystem& system) {
    write_file_atomic(path, system_to_json(system));
}

GomSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return system_from_json(text);
}

std::string unwrap_log_to_json(const UnwrapLog& log, const std::string& channel) {
    json j;
    j["version"] = kUnwrapVersion;
    j["channel"] = channel;
    json list = json::array();
    for (const auto& c : log.corrections) list.push_back(json::array({c.frame, c.offset}));
    j["corrections"] = std::move(list);
    return j.dump(2) + "\n";
}

std::pair<UnwrapLog, std::string> unwrap_log_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unwrap log JSON: ") + e.what());
    }
    if (j.value("version", 0) != kUnwrapVersion)
        throw ConfigError("unsupported unwrap log version");
    UnwrapLog log;
    for (const auto& c : j.at("corrections"))
        log.corrections.push_back({c.at(0).get<long>(), c.at(1).get<double>()});
    return {std::move(log), j.at("channel").get<std::string>()};
}

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace

std::string cv_report_to_json(const CvReport& report) {
    json j;
    j["folds"] = report.folds;
    j["accuracy"] = report.accuracy;
    j["macro_f1"] = report.macro_f1;
    j["fold_accuracy"] = report.fold_accuracy;
    j["classes"] = report.classes;
    j["confusion"] = report.confusion;
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

std::string cv_report_csv_row(const std::string& vocabulary, const CvReport& report,
                              const std::vector<std::string>& sensors) {
    return vocabulary + "," + std::to_string(report.classes.size()) + "," +
           join(sensors, ';') + "," + fixed3(report.accuracy) + "," + fixed3(report.macro_f1);
}

std::string metrics_csv(const std::vector<std::pair<std::string, MetricReport>>& rows) {
    std::string out = "gesture,repetitions,rmse,mae,avg_u1\n";
    for (const auto& [gesture, report] : rows) {
        out += gesture + "," + std::to_string(report.repetitions);
        if (report.repetitions > 0) {
            out += "," + fixed3(report.mean_rmse) + "," + fixed3(report.mean_mae) + "," +
                   fixed3(report.avg_u1);
        } else {
            out += ",,,";
        }
        out += "\n";
    }
    return out;
}

std::string ranking_csv(const SensorRanking& ranking) {
    std::string out = "sensor,count\n";
    for (const auto& s : ranking.ordering)
        out += s + "," + std::to_string(ranking.counts.at(s)) + "\n";
    return out;
}

} // namespace gomkit
