#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/experiment.hpp"
#include "core/metrics.hpp"

using namespace fgsmbench;
namespace fs = std::filesystem;

namespace {

// Small, fast configuration used throughout this suite.
ExperimentConfig tiny_config(const std::string& out) {
    ExperimentConfig cfg = ExperimentConfig::parse_text(R"(
[dataset]
n = 16
size = 16
seed = 5
[split]
train_fraction = 0.75
seed = 6
[train]
learning_rate = 0.05
epochs = 2
batch_size = 4
seed = 7
[attack]
epsilons = 0.1, 0.3
[metrics]
ssim_window = 8
)");
    cfg.report.out = out;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

fs::path work_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "fgsmbench_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("run_experiment produces consistent reports and files") {
    const fs::path out = work_dir("exp_run");
    ExperimentConfig cfg = tiny_config(out.string());
    const ExperimentReport report = run_experiment(cfg);

    REQUIRE(report.sweep.size() == 3);  // 0 prepended + two configured
    CHECK(report.sweep[0].epsilon == 0.0);
    CHECK(report.clean_accuracy == report.sweep[0].accuracy);
    CHECK(std::fabs(report.sweep[0].mean_ssim - 1.0) <= 1e-12);
    CHECK(report.history.size() == 2);
    CHECK(report.details.size() == 3 * 4);  // three epsilons, four test images

    CHECK(fs::exists(out / "model.ckpt"));
    CHECK(fs::exists(out / "sweep.csv"));
    CHECK(fs::exists(out / "detail.csv"));
    CHECK(fs::exists(out / "accuracy_vs_epsilon.svg"));
    CHECK(fs::exists(out / "ssim_vs_epsilon.svg"));
    CHECK(fs::exists(out / "report.json"));

    SUBCASE("sweep.csv layout and content") {
        const auto rows = parse_csv(slurp(out / "sweep.csv"));
        REQUIRE(rows.size() == 4);  // header + one row per epsilon
        CHECK(rows[0] == std::vector<std::string>{"epsilon", "accuracy", "mean_ssim",
                                                  "n_samples"});
        CHECK(rows[1][0] == "0");
        CHECK(rows[1][2] == "1");
        CHECK(rows[1][3] == "4");
    }

    SUBCASE("detail rows recompute the summary accuracy") {
        const auto rows = parse_csv(slurp(out / "detail.csv"));
        REQUIRE(rows.size() == 1 + 12);
        CHECK(rows[0] == std::vector<std::string>{"id", "epsilon", "true_label",
                                                  "clean_label", "adv_label", "flipped",
                                                  "ssim"});
        // Independent aggregation: group by the epsilon column.
        std::map<std::string, std::pair<int, int>> by_eps;  // correct, total
        for (std::size_t r = 1; r < rows.size(); ++r) {
            auto& [correct, total] = by_eps[rows[r][1]];
            if (rows[r][2] == rows[r][4]) ++correct;
            ++total;
        }
        const auto sweep_rows = parse_csv(slurp(out / "sweep.csv"));
        for (std::size_t r = 1; r < sweep_rows.size(); ++r) {
            const auto& [correct, total] = by_eps.at(sweep_rows[r][0]);
            const double recomputed =
                static_cast<double>(correct) / static_cast<double>(total);
            CHECK(std::stod(sweep_rows[r][1]) == doctest::Approx(recomputed).epsilon(1e-12));
        }
    }

    SUBCASE("report.json round-trips and re-emits identical csv") {
        const ExperimentReport loaded = load_report_json((out / "report.json").string());
        CHECK(loaded.clean_accuracy == report.clean_accuracy);
        REQUIRE(loaded.sweep.size() == report.sweep.size());
        for (std::size_t i = 0; i < loaded.sweep.size(); ++i) {
            CHECK(loaded.sweep[i].epsilon == report.sweep[i].epsilon);
            CHECK(loaded.sweep[i].accuracy == report.sweep[i].accuracy);
            CHECK(loaded.sweep[i].mean_ssim == report.sweep[i].mean_ssim);
        }
        const fs::path out2 = work_dir("exp_reemit");
        emit_report(loaded, out2.string(), {"csv"});
        CHECK(slurp(out2 / "sweep.csv") == slurp(out / "sweep.csv"));
        CHECK(slurp(out2 / "detail.csv") == slurp(out / "detail.csv"));
    }
}

TEST_CASE("identical configs give byte-identical csv outputs") {
    const fs::path out_a = work_dir("exp_det_a");
    const fs::path out_b = work_dir("exp_det_b");
    ExperimentConfig cfg_a = tiny_config(out_a.string());
    ExperimentConfig cfg_b = tiny_config(out_b.string());
    run_experiment(cfg_a);
    run_experiment(cfg_b);
    CHECK(slurp(out_a / "sweep.csv") == slurp(out_b / "sweep.csv"));
    CHECK(slurp(out_a / "detail.csv") == slurp(out_b / "detail.csv"));
    CHECK(slurp(out_a / "accuracy_vs_epsilon.svg") == slurp(out_b / "accuracy_vs_epsilon.svg"));
}

TEST_CASE("a sweep over only epsilon 0 reproduces the clean evaluation") {
    const fs::path out = work_dir("exp_zero");
    ExperimentConfig cfg = tiny_config(out.string());
    cfg.attack.epsilons = {0.0};
    const ExperimentReport report = run_experiment(cfg);
    REQUIRE(report.sweep.size() == 1);
    CHECK(report.sweep[0].epsilon == 0.0);
    CHECK(report.sweep[0].accuracy == report.clean_accuracy);
    CHECK(std::fabs(report.sweep[0].mean_ssim - 1.0) <= 1e-12);
    for (const auto& row : report.details) {
        CHECK(row.epsilon == 0.0);
        CHECK(row.adv_label == row.clean_label);
        CHECK(row.ssim == 1.0);
    }
    const auto rows = parse_csv(slurp(out / "sweep.csv"));
    CHECK(rows.size() == 2);  // header plus the single record
}

TEST_CASE("emitted charts expose a parseable mapping that covers the data") {
    const fs::path out = work_dir("exp_chart");
    ExperimentConfig cfg = tiny_config(out.string());
    run_experiment(cfg);

    for (const char* name : {"accuracy_vs_epsilon.svg", "ssim_vs_epsilon.svg"}) {
        const std::string svg = slurp(out / name);
        // Pull an attribute value out of the svg text.
        const auto attr = [&](const std::string& tag_id, const std::string& key,
                              std::size_t from = 0) -> std::pair<double, std::size_t> {
            const std::size_t tag_pos = svg.find(tag_id, from);
            REQUIRE(tag_pos != std::string::npos);
            const std::size_t key_pos = svg.find(key + "=\"", tag_pos);
            REQUIRE(key_pos != std::string::npos);
            const std::size_t start = key_pos + key.size() + 2;
            const std::size_t end = svg.find('"', start);
            return {std::stod(svg.substr(start, end - start)), tag_pos};
        };
        const double x_min = attr("id=\"plot-area\"", "data-x-min").first;
        const double x_max = attr("id=\"plot-area\"", "data-x-max").first;
        const double y_min = attr("id=\"plot-area\"", "data-y-min").first;
        const double y_max = attr("id=\"plot-area\"", "data-y-max").first;
        const double rect_x = attr("id=\"plot-area\"", "x").first;
        const double rect_y = attr("id=\"plot-area\"", "y").first;
        const double rect_w = attr("id=\"plot-area\"", "width").first;
        const double rect_h = attr("id=\"plot-area\"", "height").first;

        // Axis extents must cover [0, max epsilon] and [0, 1].
        CHECK(x_min <= 0.0);
        CHECK(x_max >= 0.3);
        CHECK(y_min <= 0.0);
        CHECK(y_max >= 1.0);

        // Every data point lies inside the plot rectangle and its data
        // coordinates are inside the declared axis ranges.
        std::size_t pos = 0;
        std::size_t circles = 0;
        while ((pos = svg.find("<circle", pos)) != std::string::npos) {
            const auto cx = attr("<circle", "cx", pos).first;
            const auto cy = attr("<circle", "cy", pos).first;
            const auto dx = attr("<circle", "data-x", pos).first;
            const auto dy = attr("<circle", "data-y", pos).first;
            CHECK(cx >= rect_x - 1e-9);
            CHECK(cx <= rect_x + rect_w + 1e-9);
            CHECK(cy >= rect_y - 1e-9);
            CHECK(cy <= rect_y + rect_h + 1e-9);
            CHECK(dx >= x_min);
            CHECK(dx <= x_max);
            CHECK(dy >= y_min);
            CHECK(dy <= y_max);
            ++circles;
            ++pos;
        }
        CHECK(circles == 3);
    }
}

TEST_CASE("adversarial pgm dumps appear when requested") {
    const fs::path out = work_dir("exp_dump");
    ExperimentConfig cfg = tiny_config(out.string());
    cfg.report.dump_adversarial = 2;
    run_experiment(cfg);
    CHECK(fs::exists(out / "adv" / "eps_0.1"));
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(out / "adv" / "eps_0.1")) {
        (void)entry;
        ++count;
    }
    CHECK(count == 2);
}

TEST_CASE("train stage accuracy equals the sweep's epsilon-0 accuracy") {
    const fs::path out = work_dir("exp_stage_eq");
    ExperimentConfig cfg = tiny_config(out.string());
    cfg.validate_and_normalize();

    const Dataset full = config_dataset(cfg);
    const auto [train_set, test_set] =
        split_dataset(full, cfg.split.train_fraction, cfg.split.seed);
    const TrainResult trained = train_stage(cfg, train_set);
    const ExperimentReport swept = sweep_stage(cfg, trained.model, test_set, "");

    std::vector<Prediction> preds;
    std::vector<int> labels;
    for (const auto& item : test_set.items) {
        preds.push_back(predict(trained.model, item.pixels));
        labels.push_back(item.label);
    }
    CHECK(swept.sweep[0].accuracy == accuracy(preds, labels));
}
