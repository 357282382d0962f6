#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "gomkit/errors.hpp"
#include "gomkit/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gomkit: state-space gesture modeling, generation, and recognition for "
                 "inertial motion capture"};
    app.require_subcommand(1);

    std::string config_path, dataset, gesture, sensors_csv, out_dir;

    const std::vector<std::pair<std::string, std::string>> stages = {
        {"fetch", "download and verify a dataset archive into the cache"},
        {"preprocess", "segment, unwrap, and filter recordings into repetitions"},
        {"fit", "select a reference repetition per gesture and fit its equation bank"},
        {"simulate", "generate closed-loop motion and real-vs-simulated plots"},
        {"evaluate", "score simulations (RMSE, MAE, Theil's U1) into a CSV report"},
        {"dexterity", "per-equation significance tables and sensor ranking"},
        {"recognize", "cross-validated HMM gesture classification"},
    };
    for (const auto& [name, description] : stages) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--dataset", dataset, "dataset name override");
        sub->add_option("--gesture", gesture, "restrict to one gesture class");
        sub->add_option("--sensors", sensors_csv, "comma-separated sensor set override");
        sub->add_option("--out", out_dir, "output directory override");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        gomkit::RunConfig config = gomkit::RunConfig::load(config_path);
        if (!dataset.empty()) config.dataset = dataset;
        if (!gesture.empty()) config.gesture_filter = gesture;
        if (!sensors_csv.empty()) config.sensors = split_list(sensors_csv);
        if (!out_dir.empty()) config.out_dir = out_dir;

        const gomkit::Stage stage =
            gomkit::stage_from_name(app.get_subcommands().front()->get_name());
        return gomkit::run_pipeline(config, stage);
    } catch (const gomkit::Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
