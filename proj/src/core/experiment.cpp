#include "experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "chart.hpp"
#include "checkpoint.hpp"
#include "metrics.hpp"
#include "textio.hpp"
#include "version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fgsmbench {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool has_format(const std::vector<std::string>& formats, const char* f) {
    for (const auto& s : formats) {
        if (s == f) return true;
    }
    return false;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("report: cannot create directory " + dir + ": " + ec.message());
    }
}

} // namespace

Dataset config_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.source == "manifest") {
        return load_manifest(cfg.dataset.manifest, cfg.dataset.size);
    }
    return synth_dataset(cfg.dataset.n, cfg.dataset.size, cfg.dataset.seed);
}

TrainResult train_stage(const ExperimentConfig& cfg, const Dataset& train_set) {
    if (train_set.items.empty()) {
        throw ArgumentError("train stage: empty training set");
    }
    const auto& first = train_set.items.front().pixels;
    Shape3 input{first.extent(0), first.extent(1), first.extent(2)};
    Model model = Model::make_default(input, cfg.train.arch, cfg.train.train.seed);
    std::vector<EpochStats> history = train(model, train_set.items, cfg.train.train);
    return TrainResult{std::move(model), std::move(history)};
}

ExperimentReport sweep_stage(const ExperimentConfig& cfg, const Model& model,
                             const Dataset& test_set, const std::string& out_dir) {
    ExperimentReport report;
    report.version = kVersion;
    report.config_echo = cfg.echo();

    const bool dump = cfg.report.dump_adversarial > 0 && !out_dir.empty();
    const std::size_t dump_limit = cfg.report.dump_adversarial;
    report.details.reserve(cfg.attack.epsilons.size() * test_set.items.size());
    const SampleSink sink = [&](std::size_t, std::size_t si, const AdversarialSample& s) {
        DetailRow row;
        row.id = test_set.items[si].id;
        row.epsilon = s.epsilon;
        row.true_label = s.true_label;
        row.clean_label = s.clean_prediction.label;
        row.adv_label = s.adv_prediction.label;
        row.flipped = s.flipped;
        row.ssim = ssim(s.original, s.perturbed, cfg.metrics.ssim_window).mean_ssim;
        report.details.push_back(std::move(row));
        if (dump && si < dump_limit) {
            const std::string dir = out_dir + "/adv/eps_" + fmt_g6(s.epsilon);
            ensure_dir(dir);
            save_pgm(dir + "/" + test_set.items[si].id + ".pgm", s.perturbed);
        }
    };
    report.sweep = epsilon_sweep(model, test_set.items, cfg.attack, cfg.metrics.ssim_window,
                                 sink);
    // epsilon 0 leads the normalized grid, so its row is the clean baseline.
    report.clean_accuracy = report.sweep.front().accuracy;
    return report;
}

namespace {

void write_sweep_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("report: cannot create " + path);
    }
    out << "epsilon,accuracy,mean_ssim,n_samples\n";
    for (const auto& rec : report.sweep) {
        out << fmt_g6(rec.epsilon) << "," << fmt_g6(rec.accuracy) << ","
            << fmt_g6(rec.mean_ssim) << "," << rec.n_samples << "\n";
    }
    if (!out) {
        throw IoError("report: write failed for " + path);
    }
}

void write_detail_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("report: cannot create " + path);
    }
    out << "id,epsilon,true_label,clean_label,adv_label,flipped,ssim\n";
    for (const auto& row : report.details) {
        out << row.id << "," << fmt_g6(row.epsilon) << "," << row.true_label << ","
            << row.clean_label << "," << row.adv_label << "," << (row.flipped ? 1 : 0) << ","
            << fmt_g6(row.ssim) << "\n";
    }
    if (!out) {
        throw IoError("report: write failed for " + path);
    }
}

} // namespace

void emit_report(const ExperimentReport& report, const std::string& out_dir,
                 const std::vector<std::string>& formats) {
    if (report.sweep.empty()) {
        throw ArgumentError("report: nothing to emit, sweep is empty");
    }
    ensure_dir(out_dir);
    if (has_format(formats, "csv")) {
        write_sweep_csv(report, out_dir + "/sweep.csv");
        write_detail_csv(report, out_dir + "/detail.csv");
    }
    if (has_format(formats, "svg")) {
        std::vector<std::pair<double, double>> acc, sim;
        for (const auto& rec : report.sweep) {
            acc.emplace_back(rec.epsilon, rec.accuracy);
            sim.emplace_back(rec.epsilon, rec.mean_ssim);
        }
        write_line_chart_svg(out_dir + "/accuracy_vs_epsilon.svg",
                             "Accuracy vs. penetration coefficient", "epsilon", "accuracy",
                             acc);
        write_line_chart_svg(out_dir + "/ssim_vs_epsilon.svg",
                             "Mean SSIM vs. penetration coefficient", "epsilon", "mean SSIM",
                             sim);
    }
    if (has_format(formats, "json")) {
        save_report_json(report, out_dir + "/report.json");
    }
}

ExperimentReport run_experiment(const ExperimentConfig& raw_cfg) {
    ExperimentConfig cfg = raw_cfg;
    cfg.validate_and_normalize();
    const std::string out_dir = cfg.report.out;
    ensure_dir(out_dir);

    auto t0 = std::chrono::steady_clock::now();
    const Dataset full = config_dataset(cfg);
    auto [train_set, test_set] = split_dataset(full, cfg.split.train_fraction, cfg.split.seed);
    const double data_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    TrainResult trained = train_stage(cfg, train_set);
    const double train_s = seconds_since(t0);
    save_model(trained.model, out_dir + "/model.ckpt");

    t0 = std::chrono::steady_clock::now();
    ExperimentReport report = sweep_stage(cfg, trained.model, test_set, out_dir);
    report.history = std::move(trained.history);
    report.timings.data_s = data_s;
    report.timings.train_s = train_s;
    report.timings.sweep_s = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    emit_report(report, out_dir, cfg.report.formats);
    report.timings.emit_s = seconds_since(t0);
    // Refresh the timing block now that emit_s is known.
    if (has_format(cfg.report.formats, "json")) {
        save_report_json(report, out_dir + "/report.json");
    }
    return report;
}

void save_report_json(const ExperimentReport& report, const std::string& path) {
    json j;
    j["version"] = report.version;
    j["config"] = report.config_echo;
    j["clean_accuracy"] = report.clean_accuracy;
    json hist = json::array();
    for (const auto& e : report.history) {
        hist.push_back({{"mean_loss", e.mean_loss}, {"accuracy", e.accuracy}});
    }
    j["history"] = std::move(hist);
    json sweep = json::array();
    for (const auto& rec : report.sweep) {
        sweep.push_back({{"epsilon", rec.epsilon},
                         {"accuracy", rec.accuracy},
                         {"mean_ssim", rec.mean_ssim},
                         {"n_samples", rec.n_samples}});
    }
    j["sweep"] = std::move(sweep);
    json details = json::array();
    for (const auto& row : report.details) {
        details.push_back({{"id", row.id},
                           {"epsilon", row.epsilon},
                           {"true_label", row.true_label},
                           {"clean_label", row.clean_label},
                           {"adv_label", row.adv_label},
                           {"flipped", row.flipped},
                           {"ssim", row.ssim}});
    }
    j["details"] = std::move(details);
    j["timings"] = {{"data_s", report.timings.data_s},
                    {"train_s", report.timings.train_s},
                    {"sweep_s", report.timings.sweep_s},
                    {"emit_s", report.timings.emit_s}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("report: cannot create " + path);
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("report: write failed for " + path);
    }
}

ExperimentReport load_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("report: cannot open " + path);
    }
    json j;
    try {
        in >> j;
        ExperimentReport report;
        report.version = j.at("version").get<std::string>();
        report.config_echo = j.at("config").get<std::map<std::string, std::string>>();
        report.clean_accuracy = j.at("clean_accuracy").get<double>();
        for (const auto& e : j.at("history")) {
            report.history.push_back(
                EpochStats{e.at("mean_loss").get<double>(), e.at("accuracy").get<double>()});
        }
        for (const auto& rec : j.at("sweep")) {
            report.sweep.push_back(SweepRecord{rec.at("epsilon").get<double>(),
                                               rec.at("accuracy").get<double>(),
                                               rec.at("mean_ssim").get<double>(),
                                               rec.at("n_samples").get<std::size_t>()});
        }
        for (const auto& row : j.at("details")) {
            DetailRow d;
            d.id = row.at("id").get<std::string>();
            d.epsilon = row.at("epsilon").get<double>();
            d.true_label = row.at("true_label").get<int>();
            d.clean_label = row.at("clean_label").get<int>();
            d.adv_label = row.at("adv_label").get<int>();
            d.flipped = row.at("flipped").get<bool>();
            d.ssim = row.at("ssim").get<double>();
            report.details.push_back(std::move(d));
        }
        const auto& t = j.at("timings");
        report.timings.data_s = t.at("data_s").get<double>();
        report.timings.train_s = t.at("train_s").get<double>();
        report.timings.sweep_s = t.at("sweep_s").get<double>();
        report.timings.emit_s = t.at("emit_s").get<double>();
        return report;
    } catch (const json::exception& e) {
        throw ParseError("report: malformed " + path + ": " + e.what());
    }
}

} // namespace fgsmbench
