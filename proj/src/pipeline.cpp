#include "gomkit/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "gomkit/bvh.hpp"
#include "gomkit/dataset.hpp"
#include "gomkit/dexterity.hpp"
#include "gomkit/io.hpp"
#include "gomkit/metrics.hpp"
#include "gomkit/plot.hpp"
#include "gomkit/preprocess.hpp"
#include "gomkit/recognition.hpp"
#include "gomkit/similarity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gomkit {

Stage stage_from_name(const std::string& name) {
    if (name == "fetch") return Stage::Fetch;
    if (name == "preprocess") return Stage::Preprocess;
    if (name == "fit") return Stage::Fit;
    if (name == "simulate") return Stage::Simulate;
    if (name == "evaluate") return Stage::Evaluate;
    if (name == "dexterity") return Stage::Dexterity;
    if (name == "recognize") return Stage::Recognize;
    throw ConfigError("unknown stage '" + name + "'");
}

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::Fetch: return "fetch";
        case Stage::Preprocess: return "preprocess";
        case Stage::Fit: return "fit";
        case Stage::Simulate: return "simulate";
        case Stage::Evaluate: return "evaluate";
        case Stage::Dexterity: return "dexterity";
        case Stage::Recognize: return "recognize";
    }
    return "?";
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    RunConfig c;
    c.dataset = j.value("dataset", std::string());
    c.data_dir = j.value("data_dir", std::string());
    c.manifest_path = j.value("manifest", std::string());
    c.cache_dir = j.value("cache_dir", std::string());
    c.out_dir = j.value("out_dir", std::string());
    c.gesture_filter = j.value("gesture", std::string());

    for (const auto& r : j.value("recordings", json::array())) {
        Recording rec;
        rec.file = r.at("file").get<std::string>();
        rec.annotations = r.value("annotations", std::string());
        rec.label = r.value("label", std::string());
        c.recordings.push_back(std::move(rec));
    }

    if (j.contains("sensors")) c.sensors = j.at("sensors").get<std::vector<std::string>>();
    if (j.contains("sensor_aliases"))
        c.sensor_aliases = j.at("sensor_aliases").get<std::map<std::string, std::string>>();
    if (j.contains("chains")) {
        c.chains.limbs.clear();
        for (const auto& [limb, order] : j.at("chains").items())
            c.chains.limbs[limb] = order.get<std::vector<std::string>>();
    }
    if (j.contains("mirror")) {
        c.chains.mirror = j.at("mirror").get<std::map<std::string, std::string>>();
    } else if (j.contains("chains")) {
        // chains replaced without a mirror map: derive R<->L pairs by label
        c.chains.mirror.clear();
        for (const auto& s : c.sensors) {
            if (s.size() < 2) continue;
            if (s[0] == 'R') {
                const std::string twin = "L" + s.substr(1);
                if (std::find(c.sensors.begin(), c.sensors.end(), twin) != c.sensors.end()) {
                    c.chains.mirror[s] = twin;
                    c.chains.mirror[twin] = s;
                }
            }
        }
    }

    if (j.contains("filter")) {
        c.filter_order = j.at("filter").value("order", 4);
        c.filter_cutoff_hz = j.at("filter").value("cutoff_hz", 0.0);
    }
    c.unwrap_before_filter = j.value("unwrap_before_filter", true);
    c.significance_threshold = j.value("significance_threshold", 0.05);

    if (j.contains("hmm")) {
        const auto& h = j.at("hmm");
        const std::string topo = h.value("topology", std::string("left_to_right"));
        if (topo == "left_to_right")
            c.hmm.topology = HmmTopology::LeftToRight;
        else if (topo == "ergodic")
            c.hmm.topology = HmmTopology::Ergodic;
        else
            throw ConfigError("hmm.topology must be left_to_right or ergodic");
        c.hmm.states = h.value("states", 5);
        c.hmm.folds = h.value("folds", 10);
        c.hmm.seed = h.value("seed", std::uint64_t{12345});
    }
    c.validate();
    return c;
}

std::string RunConfig::to_json() const {
    json j;
    j["dataset"] = dataset;
    j["data_dir"] = data_dir;
    j["manifest"] = manifest_path;
    j["cache_dir"] = cache_dir;
    j["out_dir"] = out_dir;
    j["gesture"] = gesture_filter;
    j["recordings"] = json::array();
    for (const auto& r : recordings) {
        json jr;
        jr["file"] = r.file;
        if (!r.annotations.empty()) jr["annotations"] = r.annotations;
        if (!r.label.empty()) jr["label"] = r.label;
        j["recordings"].push_back(std::move(jr));
    }
    j["sensors"] = sensors;
    j["sensor_aliases"] = sensor_aliases;
    json limbs = json::object();
    for (const auto& [limb, order] : chains.limbs) limbs[limb] = order;
    j["chains"] = std::move(limbs);
    j["mirror"] = chains.mirror;
    j["filter"] = {{"order", filter_order}, {"cutoff_hz", filter_cutoff_hz}};
    j["unwrap_before_filter"] = unwrap_before_filter;
    j["significance_threshold"] = significance_threshold;
    j["hmm"] = {{"topology",
                 hmm.topology == HmmTopology::LeftToRight ? "left_to_right" : "ergodic"},
                {"states", hmm.states},
                {"folds", hmm.folds},
                {"seed", hmm.seed}};
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    if (out_dir.empty()) throw ConfigError("out_dir must be set");
    if (sensors.empty()) throw ConfigError("sensor set must not be empty");
    if (filter_order < 1) throw ConfigError("filter.order must be >= 1");
    if (filter_cutoff_hz < 0.0) throw ConfigError("filter.cutoff_hz must be >= 0");
    if (!(significance_threshold > 0.0 && significance_threshold < 1.0))
        throw ConfigError("significance_threshold must be in (0, 1)");
    if (hmm.states < 1) throw ConfigError("hmm.states must be >= 1");
    if (hmm.folds < 2) throw ConfigError("hmm.folds must be >= 2");
    for (const auto& r : recordings) {
        if (r.file.empty()) throw ConfigError("recording without a file");
        if (r.annotations.empty() && r.label.empty())
            throw ConfigError("recording '" + r.file + "' needs annotations or a label");
    }
}

namespace {

struct StageContext {
    const RunConfig& config;
    fs::path out;

    fs::path preprocess_dir() const { return out / "preprocess"; }
    fs::path models_dir() const { return out / "models"; }
    fs::path simulate_dir() const { return out / "simulate"; }
    fs::path evaluate_dir() const { return out / "evaluate"; }
    fs::path dexterity_dir() const { return out / "dexterity"; }
    fs::path recognize_dir() const { return out / "recognize"; }
};

std::string cache_dir_or_default(const RunConfig& config) {
    if (!config.cache_dir.empty()) return config.cache_dir;
    if (const char* env = std::getenv("GOMKIT_CACHE")) return env;
    return (fs::temp_directory_path() / "gomkit-cache").string();
}

// Sensor labels are config-level names; datasets may use longer joint
// names, resolved through the alias map.
DescriptorId resolve_alias(const RunConfig& config, const DescriptorId& id) {
    auto it = config.sensor_aliases.find(id.sensor);
    return it == config.sensor_aliases.end() ? id : DescriptorId{it->second, id.axis};
}

Eigen::MatrixXd descriptor_matrix(const RunConfig& config, const Skeleton& skeleton,
                                  const MotionClip& clip,
                                  const std::vector<DescriptorId>& descriptors) {
    Eigen::MatrixXd m(clip.frame_count(), static_cast<long>(descriptors.size()));
    for (size_t i = 0; i < descriptors.size(); ++i)
        m.col(static_cast<long>(i)) =
            extract_descriptor(skeleton, clip, resolve_alias(config, descriptors[i]));
    return m;
}

std::vector<Recording> resolve_recordings(const RunConfig& config) {
    if (!config.recordings.empty()) return config.recordings;
    if (!config.manifest_path.empty()) {
        const DatasetManifest manifest = DatasetManifest::load(config.manifest_path);
        std::vector<Recording> out;
        for (const auto& [file, label] : manifest.files) out.push_back({file, "", label});
        if (out.empty())
            throw ConfigError("manifest " + config.manifest_path + " maps no files");
        return out;
    }
    throw ConfigError("no recordings: set recordings[] or a manifest with a file map");
}

std::vector<std::string> gesture_labels(const fs::path& root, const std::string& only) {
    if (!fs::exists(root))
        throw ArtifactError("missing artifact directory: " + root.string() +
                            " (run the preprocess stage first)");
    std::vector<std::string> labels;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) labels.push_back(entry.path().filename().string());
    std::sort(labels.begin(), labels.end());
    if (!only.empty()) {
        if (std::find(labels.begin(), labels.end(), only) == labels.end())
            throw ArtifactError("no preprocessed gesture '" + only + "' under " + root.string());
        return {only};
    }
    return labels;
}

std::vector<fs::path> repetition_files(const fs::path& gesture_dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(gesture_dir))
        if (entry.path().extension() == ".bvh") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ArtifactError("no repetitions under " + gesture_dir.string());
    return files;
}

// ---------------------------------------------------------------- preprocess

void preprocess_channel(const RunConfig& config, Eigen::VectorXd& series, bool is_rotation,
                        double sample_rate, UnwrapLog& log) {
    auto unwrap_step = [&] {
        if (!is_rotation) return;
        const double lo = series.minCoeff(), hi = series.maxCoeff();
        if (lo < -180.0 || hi > 180.0) return; // already corrected upstream
        try {
            auto [unwrapped, l] = unwrap_discontinuities(series);
            series = std::move(unwrapped);
            log = std::move(l);
        } catch (const RangeError&) {
            // transform would leave ±250°; keep the channel untouched
        }
    };
    auto filter_step = [&] {
        if (series.size() <= 3L * config.filter_order) return;
        FilterSpec spec;
        spec.order = config.filter_order;
        spec.sample_rate_hz = sample_rate;
        if (config.filter_cutoff_hz > 0.0) {
            spec.cutoff_hz = config.filter_cutoff_hz;
        } else if (series.size() >= 64) {
            spec.cutoff_hz = select_cutoff(series, sample_rate);
        } else {
            spec.cutoff_hz = 20.0; // too short for a PSD estimate
        }
        spec.cutoff_hz = std::min(spec.cutoff_hz, 0.499 * sample_rate);
        series = butterworth_lowpass(series, spec);
    };

    if (config.unwrap_before_filter) {
        unwrap_step();
        filter_step();
    } else {
        filter_step();
        unwrap_step();
    }
}

int stage_preprocess(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    const std::vector<Recording> recordings = resolve_recordings(config);
    const fs::path data_root(config.data_dir);

    std::map<std::string, long> rep_counter;
    for (const auto& rec : recordings) {
        const fs::path file =
            fs::path(rec.file).is_absolute() ? fs::path(rec.file) : data_root / rec.file;
        if (!fs::exists(file))
            throw ArtifactError("missing recording: " + file.string());
        auto [skeleton, clip] = load_bvh(file.string());

        std::vector<LabeledClip> pieces;
        if (!rec.annotations.empty()) {
            const fs::path ann = fs::path(rec.annotations).is_absolute()
                                     ? fs::path(rec.annotations)
                                     : data_root / rec.annotations;
            pieces = segment(clip, read_annotations_csv(ann.string()));
        } else {
            pieces.push_back({rec.label, clip});
        }

        const double sample_rate = 1.0 / clip.frame_time;
        for (auto& piece : pieces) {
            if (!config.gesture_filter.empty() && piece.label != config.gesture_filter)
                continue;
            json unwraps = json::array();
            long col = 0;
            for (size_t ji = 0; ji < skeleton.joints.size(); ++ji) {
                const JointNode& joint = skeleton.joints[ji];
                for (Channel ch : joint.channels) {
                    Eigen::VectorXd series = piece.clip.frames.col(col);
                    const bool is_rotation = ch == Channel::Xrotation ||
                                             ch == Channel::Yrotation ||
                                             ch == Channel::Zrotation;
                    UnwrapLog log;
                    preprocess_channel(config, series, is_rotation, sample_rate, log);
                    piece.clip.frames.col(col) = series;
                    if (!log.empty()) {
                        const std::string channel = joint.name + "." + channel_name(ch);
                        unwraps.push_back(json::parse(unwrap_log_to_json(log, channel)));
                    }
                    ++col;
                }
            }

            const long index = rep_counter[piece.label]++;
            char stem[32];
            std::snprintf(stem, sizeof(stem), "rep_%03ld", index);
            const fs::path dir = ctx.preprocess_dir() / piece.label;
            fs::create_directories(dir);
            {
                std::ostringstream body;
                write_bvh(body, skeleton, piece.clip);
                write_file_atomic((dir / (std::string(stem) + ".bvh")).string(), body.str());
            }
            if (!unwraps.empty())
                write_file_atomic((dir / (std::string(stem) + ".unwraps.json")).string(),
                                  unwraps.dump(2) + "\n");
        }
    }
    return 0;
}

// ----------------------------------------------------------------------- fit

int stage_fit(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto labels = gesture_labels(ctx.preprocess_dir(), config.gesture_filter);
    fs::create_directories(ctx.models_dir());

    for (const auto& label : labels) {
        const auto files = repetition_files(ctx.preprocess_dir() / label);

        GomTopology topology;
        std::vector<Eigen::MatrixXd> reps;
        double frame_time = 0.0;
        for (size_t i = 0; i < files.size(); ++i) {
            auto [skeleton, clip] = load_bvh(files[i].string());
            if (i == 0) {
                topology = build_topology(config.sensors, config.chains);
                for (const auto& d : topology.descriptors)
                    descriptor_column(skeleton, resolve_alias(config, d)); // throws if missing
                frame_time = clip.frame_time;
            }
            reps.push_back(descriptor_matrix(config, skeleton, clip, topology.descriptors));
        }

        const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
        const size_t reference = select_reference(reps, threads);

        FitOptions options;
        options.on_singular = FitOptions::OnSingular::Hold;
        GomSystem system = fit(reps[reference], topology, options);
        system.source_clip = label;
        system.reference_index = static_cast<long>(reference);
        system.frame_time = frame_time;
        for (const auto& held : system.held)
            std::cerr << "warning: " << label << ": descriptor " << held.str()
                      << " is degenerate on the reference; holding it constant\n";

        save_system((ctx.models_dir() / (label + ".gom.json")).string(), system);
        std::cout << label << ": reference repetition " << reference << " of " << reps.size()
                  << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ simulate

GomSystem load_gesture_system(const StageContext& ctx, const std::string& label) {
    const fs::path path = ctx.models_dir() / (label + ".gom.json");
    if (!fs::exists(path))
        throw ArtifactError("missing model artifact: " + path.string() +
                            " (run the fit stage first)");
    return load_system(path.string());
}

int stage_simulate(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto labels = gesture_labels(ctx.preprocess_dir(), config.gesture_filter);

    for (const auto& label : labels) {
        const GomSystem system = load_gesture_system(ctx, label);
        const auto files = repetition_files(ctx.preprocess_dir() / label);
        const fs::path dir = ctx.simulate_dir() / label;
        fs::create_directories(dir);

        for (size_t r = 0; r < files.size(); ++r) {
            auto [skeleton, clip] = load_bvh(files[r].string());
            const Eigen::MatrixXd real =
                descriptor_matrix(config, skeleton, clip, system.topology.descriptors);
            Eigen::MatrixXd sim;
            try {
                sim = simulate(system, real.topRows(2), real.rows());
            } catch (const DivergenceError& e) {
                throw DivergenceError(label + " repetition " + std::to_string(r) + ": " +
                                      e.what());
            }

            // embed the simulated descriptors back into the clip
            MotionClip out = clip;
            for (size_t i = 0; i < system.topology.descriptors.size(); ++i) {
                const int col = descriptor_column(
                    skeleton, resolve_alias(config, system.topology.descriptors[i]));
                out.frames.col(col) = sim.col(static_cast<long>(i));
            }
            char stem[32];
            std::snprintf(stem, sizeof(stem), "rep_%03zu", r);
            std::ostringstream body;
            write_bvh(body, skeleton, out);
            write_file_atomic((dir / (std::string(stem) + ".sim.bvh")).string(), body.str());

            if (r == 0) {
                const fs::path plots = dir / "plots";
                fs::create_directories(plots);
                const size_t count = std::min<size_t>(system.topology.descriptors.size(), 6);
                for (size_t i = 0; i < count; ++i) {
                    const DescriptorId& d = system.topology.descriptors[i];
                    const std::string svg = svg_line_plot(
                        label + " " + d.str(),
                        {{"real", real.col(static_cast<long>(i)), "#1f77b4"},
                         {"simulated", sim.col(static_cast<long>(i)), "#d62728"}});
                    write_file_atomic((plots / (d.str() + ".svg")).string(), svg);
                }
            }
        }
    }
    return 0;
}

// ------------------------------------------------------------------ evaluate

int stage_evaluate(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto labels = gesture_labels(ctx.preprocess_dir(), config.gesture_filter);

    std::vector<std::pair<std::string, MetricReport>> rows;
    for (const auto& label : labels) {
        const GomSystem system = load_gesture_system(ctx, label);
        std::vector<Eigen::MatrixXd> reps;
        for (const auto& file : repetition_files(ctx.preprocess_dir() / label)) {
            auto [skeleton, clip] = load_bvh(file.string());
            reps.push_back(descriptor_matrix(config, skeleton, clip,
                                             system.topology.descriptors));
        }
        rows.emplace_back(label, evaluate(system, reps));
    }

    fs::create_directories(ctx.evaluate_dir());
    write_file_atomic((ctx.evaluate_dir() / "metrics.csv").string(), metrics_csv(rows));
    for (const auto& [label, report] : rows)
        std::cout << label << ": rmse " << report.mean_rmse << " mae " << report.mean_mae
                  << " avg_u1 " << report.avg_u1 << " (" << report.repetitions
                  << " repetitions)\n";
    return 0;
}

// ----------------------------------------------------------------- dexterity

int stage_dexterity(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    if (!fs::exists(ctx.models_dir()))
        throw ArtifactError("missing artifact directory: " + ctx.models_dir().string() +
                            " (run the fit stage first)");
    std::vector<std::string> labels;
    for (const auto& entry : fs::directory_iterator(ctx.models_dir())) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".gom.json";
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            labels.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(labels.begin(), labels.end());
    if (!config.gesture_filter.empty()) {
        if (std::find(labels.begin(), labels.end(), config.gesture_filter) == labels.end())
            throw ArtifactError("no fitted model for gesture '" + config.gesture_filter + "'");
        labels = {config.gesture_filter};
    }
    if (labels.empty())
        throw ArtifactError("no fitted models under " + ctx.models_dir().string());

    fs::create_directories(ctx.dexterity_dir());
    std::vector<GomSystem> systems;
    for (const auto& label : labels) {
        systems.push_back(load_gesture_system(ctx, label));
        write_file_atomic(
            (ctx.dexterity_dir() / (label + ".md")).string(),
            dexterity_report_markdown(systems.back(), config.significance_threshold));
    }

    std::vector<const GomSystem*> pointers;
    for (const auto& s : systems) pointers.push_back(&s);
    const SensorRanking ranking =
        significance_counts(pointers, config.significance_threshold);
    write_file_atomic((ctx.dexterity_dir() / "sensor_counts.csv").string(),
                      ranking_csv(ranking));
    for (const auto& s : ranking.ordering)
        std::cout << s << ": " << ranking.counts.at(s) << "\n";
    return 0;
}

// ----------------------------------------------------------------- recognize

int stage_recognize(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    const auto labels = gesture_labels(ctx.preprocess_dir(), "");

    std::vector<DescriptorId> features;
    for (const auto& sensor : config.sensors)
        for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) features.push_back({sensor, ax});

    std::vector<LabeledSequence> data;
    for (const auto& label : labels) {
        for (const auto& file : repetition_files(ctx.preprocess_dir() / label)) {
            auto [skeleton, clip] = load_bvh(file.string());
            data.push_back({label, descriptor_matrix(config, skeleton, clip, features)});
        }
    }

    CvOptions options;
    options.n_states = config.hmm.states;
    options.topology = config.hmm.topology;
    options.folds = config.hmm.folds;
    options.seed = config.hmm.seed;
    const CvReport report = cross_validate(data, options);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(ctx.recognize_dir());
    write_file_atomic((ctx.recognize_dir() / "cv_report.json").string(),
                      cv_report_to_json(report));
    const std::string vocabulary = config.dataset.empty() ? "vocabulary" : config.dataset;
    write_file_atomic((ctx.recognize_dir() / "recognition.csv").string(),
                      "vocabulary,n_classes,sensors,accuracy,f1\n" +
                          cv_report_csv_row(vocabulary, report, config.sensors) + "\n");
    std::cout << vocabulary << ": accuracy " << report.accuracy << " macro_f1 "
              << report.macro_f1 << " over " << report.folds << " folds\n";
    return 0;
}

// --------------------------------------------------------------------- fetch

int stage_fetch(const StageContext& ctx) {
    const RunConfig& config = ctx.config;
    if (config.manifest_path.empty())
        throw ConfigError("fetch needs a manifest path in the config");
    DatasetManifest manifest = DatasetManifest::load(config.manifest_path);
    const std::string cache = cache_dir_or_default(config);
    const std::string tree = fetch(manifest, cache);
    if (manifest.sha256.empty()) {
        // record the digest observed on the first verified fetch
        const fs::path payload =
            fs::path(cache) / manifest.name / (manifest.archive ? "payload.zip" : "payload.bin");
        manifest.sha256 = sha256_file(payload.string());
        manifest.save(config.manifest_path);
    }
    std::cout << tree << "\n";
    return 0;
}

} // namespace

int run_pipeline(const RunConfig& config, Stage stage) {
    config.validate();
    StageContext ctx{config, fs::path(config.out_dir)};
    fs::create_directories(ctx.out);
    write_file_atomic((ctx.out / "run_config.json").string(), config.to_json());

    switch (stage) {
        case Stage::Fetch: return stage_fetch(ctx);
        case Stage::Preprocess: return stage_preprocess(ctx);
        case Stage::Fit: return stage_fit(ctx);
        case Stage::Simulate: return stage_simulate(ctx);
        case Stage::Evaluate: return stage_evaluate(ctx);
        case Stage::Dexterity: return stage_dexterity(ctx);
        case Stage::Recognize: return stage_recognize(ctx);
    }
    throw ConfigError("unhandled stage");
}

} // namespace gomkit
