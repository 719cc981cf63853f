#pragma once

#include <map>
#include <string>
#include <vector>

#include "attack.hpp"
#include "config.hpp"
#include "data.hpp"
#include "nn.hpp"

namespace fgsmbench {

struct DetailRow {
    std::string id;
    double epsilon = 0.0;
    int true_label = 0;
    int clean_label = 0;
    int adv_label = 0;
    bool flipped = false;
    double ssim = 0.0;
};

struct StageTimings {
    double data_s = 0.0;
    double train_s = 0.0;
    double sweep_s = 0.0;
    double emit_s = 0.0;
};

struct ExperimentReport {
    std::string version;
    std::map<std::string, std::string> config_echo;
    double clean_accuracy = 0.0;
    std::vector<EpochStats> history;
    std::vector<SweepRecord> sweep;
    std::vector<DetailRow> details;
    StageTimings timings;
};

/// Builds the configured dataset (synthetic, or manifest resized to
/// dataset.size).
Dataset config_dataset(const ExperimentConfig& cfg);

/// Trains the configured model on the train split. Deterministic given cfg.
struct TrainResult {
    Model model;
    std::vector<EpochStats> history;
};
TrainResult train_stage(const ExperimentConfig& cfg, const Dataset& train_set);

/// Runs the attack sweep and assembles the report in memory. When out_dir
/// is nonempty, adversarial PGM dumps requested by the config land under
/// out_dir/adv/.
ExperimentReport sweep_stage(const ExperimentConfig& cfg, const Model& model,
                             const Dataset& test_set, const std::string& out_dir);

/// Writes sweep.csv / detail.csv / the two charts / report.json into
/// out_dir according to formats.
void emit_report(const ExperimentReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats);

/// The whole pipeline: dataset -> split -> train -> sweep -> emit, writing
/// model.ckpt and the report files into cfg.report.out. Byte-identical
/// outputs for identical configs.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// report.json round-trip, used by the standalone report stage.
void save_report_json(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report_json(const std::string& path);

} // namespace fgsmbench
