#ifndef GOMKIT_PIPELINE_HPP
#define GOMKIT_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gomkit/hmm.hpp"
#include "gomkit/topology.hpp"

namespace gomkit {

enum class Stage { Fetch, Preprocess, Fit, Simulate, Evaluate, Dexterity, Recognize };

Stage stage_from_name(const std::string& name);
const char* stage_name(Stage stage);

/// One input recording: a BVH file with either a segmentation CSV or a
/// single gesture label covering the whole clip.
struct Recording {
    std::string file;
    std::string annotations; // CSV path, relative to data_dir when relative
    std::string label;
};

struct HmmSettings {
    HmmTopology topology = HmmTopology::LeftToRight;
    int states = 5;
    int folds = 10;
    std::uint64_t seed = 12345;
};

/// Everything one run needs; validated before any stage executes and
/// serialized next to the artifacts it produced.
struct RunConfig {
    std::string dataset;
    std::string data_dir;
    std::string manifest_path;
    std::string cache_dir;
    std::vector<Recording> recordings;
    std::vector<std::string> sensors = default_sensor_set();
    std::map<std::string, std::string> sensor_aliases; // sensor label -> joint name
    ChainSpec chains = default_chain_spec();
    int filter_order = 4;
    double filter_cutoff_hz = 0.0; // 0 = per-channel PSD selection
    bool unwrap_before_filter = true;
    double significance_threshold = 0.05;
    HmmSettings hmm;
    std::string out_dir;
    std::string gesture_filter; // restrict fit/simulate/evaluate to one class

    static RunConfig load(const std::string& path);
    std::string to_json() const;
    void validate() const;
};

/// Runs one stage, writing its artifacts under out_dir. Returns 0 on
/// success; errors are thrown (the CLI maps them to a nonzero exit).
int run_pipeline(const RunConfig& config, Stage stage);

} // namespace gomkit

#endif
