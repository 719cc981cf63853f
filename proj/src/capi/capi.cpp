#include "fgsmbench.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <string>

#include "core/attack.hpp"
#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/data.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/metrics.hpp"
#include "core/nn.hpp"
#include "core/version.hpp"

using namespace fgsmbench;

// Opaque handle definitions. Each wraps one core value.
struct fb_config {
    ExperimentConfig cfg;
};
struct fb_dataset {
    Dataset ds;
};
struct fb_model {
    Model model;
};
struct fb_report {
    ExperimentReport report;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Runs fn, translating exceptions into status codes.
template <typename Fn>
fb_status guarded(Fn&& fn) {
    try {
        fn();
        return FB_OK;
    } catch (const ConfigError& e) {
        set_error(e.what());
        return FB_ERROR_CONFIG;
    } catch (const ParseError& e) {
        set_error(e.what());
        return FB_ERROR_DATA;
    } catch (const ArgumentError& e) {
        set_error(e.what());
        return FB_ERROR_ARGUMENT;
    } catch (const IoError& e) {
        set_error(e.what());
        return FB_ERROR_IO;
    } catch (const std::exception& e) {
        set_error(e.what());
        return FB_ERROR_RUNTIME;
    } catch (...) {
        set_error("unknown failure");
        return FB_ERROR_RUNTIME;
    }
}

fb_status require(bool ok, const char* what) {
    if (!ok) {
        set_error(std::string("argument error: ") + what);
        return FB_ERROR_ARGUMENT;
    }
    return FB_OK;
}

std::vector<std::string> parse_formats(const char* formats) {
    if (formats == nullptr) {
        return {"csv", "svg", "json"};
    }
    std::vector<std::string> out;
    std::string cur;
    for (const char* p = formats;; ++p) {
        if (*p == ',' || *p == '\0') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
            if (*p == '\0') break;
        } else if (*p != ' ') {
            cur.push_back(*p);
        }
    }
    return out;
}

} // namespace

extern "C" {

const char* fb_version(void) { return kVersion; }

const char* fb_last_error(void) { return g_last_error.c_str(); }

fb_status fb_config_default(fb_config** out) {
    if (fb_status s = require(out != nullptr, "out handle is null"); s != FB_OK) return s;
    return guarded([&] { *out = new fb_config{ExperimentConfig{}}; });
}

fb_status fb_config_parse_file(const char* path, fb_config** out) {
    if (fb_status s = require(path && out, "path or out handle is null"); s != FB_OK) return s;
    return guarded([&] { *out = new fb_config{ExperimentConfig::parse_file(path)}; });
}

fb_status fb_config_parse_text(const char* text, fb_config** out) {
    if (fb_status s = require(text && out, "text or out handle is null"); s != FB_OK) return s;
    return guarded([&] { *out = new fb_config{ExperimentConfig::parse_text(text)}; });
}

fb_status fb_config_set(fb_config* cfg, const char* dotted_key, const char* value) {
    if (fb_status s = require(cfg && dotted_key && value, "null argument"); s != FB_OK) {
        return s;
    }
    return guarded([&] { cfg->cfg.set(dotted_key, value); });
}

fb_status fb_config_get(const fb_config* cfg, const char* dotted_key, char* buf,
                        size_t buf_len) {
    if (fb_status s = require(cfg && dotted_key && buf, "null argument"); s != FB_OK) return s;
    const auto echo = cfg->cfg.echo();
    const auto it = echo.find(dotted_key);
    if (it == echo.end()) {
        set_error(std::string("config: unknown key '") + dotted_key + "'");
        return FB_ERROR_ARGUMENT;
    }
    if (it->second.size() + 1 > buf_len) {
        set_error("config: value does not fit the buffer");
        return FB_ERROR_ARGUMENT;
    }
    std::memcpy(buf, it->second.c_str(), it->second.size() + 1);
    return FB_OK;
}

void fb_config_free(fb_config* cfg) { delete cfg; }

fb_status fb_dataset_synth(uint64_t n, uint64_t image_size, uint64_t seed, fb_dataset** out) {
    if (fb_status s = require(out != nullptr, "out handle is null"); s != FB_OK) return s;
    return guarded([&] {
        *out = new fb_dataset{synth_dataset(static_cast<std::size_t>(n),
                                            static_cast<std::size_t>(image_size), seed)};
    });
}

fb_status fb_dataset_from_manifest(const char* manifest_path, uint64_t resize_to,
                                   fb_dataset** out) {
    if (fb_status s = require(manifest_path && out, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        *out = new fb_dataset{
            load_manifest(manifest_path, static_cast<std::size_t>(resize_to))};
    });
}

fb_status fb_dataset_from_config(const fb_config* cfg, fb_dataset** out) {
    if (fb_status s = require(cfg && out, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        *out = new fb_dataset{config_dataset(c)};
    });
}

fb_status fb_dataset_split(const fb_dataset* ds, double train_fraction, uint64_t seed,
                           fb_dataset** train_out, fb_dataset** test_out) {
    if (fb_status s = require(ds && train_out && test_out, "null argument"); s != FB_OK) {
        return s;
    }
    return guarded([&] {
        auto [train_ds, test_ds] = split_dataset(ds->ds, train_fraction, seed);
        *train_out = new fb_dataset{std::move(train_ds)};
        *test_out = new fb_dataset{std::move(test_ds)};
    });
}

fb_status fb_dataset_write(const fb_dataset* ds, const char* dir) {
    if (fb_status s = require(ds && dir, "null argument"); s != FB_OK) return s;
    return guarded([&] { write_dataset(ds->ds, dir); });
}

fb_status fb_dataset_count(const fb_dataset* ds, uint64_t* out) {
    if (fb_status s = require(ds && out, "null argument"); s != FB_OK) return s;
    *out = ds->ds.items.size();
    return FB_OK;
}

void fb_dataset_free(fb_dataset* ds) { delete ds; }

fb_status fb_model_train(const fb_config* cfg, const fb_dataset* train_set, fb_model** out) {
    if (fb_status s = require(cfg && train_set && out, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        TrainResult r = train_stage(c, train_set->ds);
        *out = new fb_model{std::move(r.model)};
    });
}

fb_status fb_model_save(const fb_model* model, const char* path) {
    if (fb_status s = require(model && path, "null argument"); s != FB_OK) return s;
    return guarded([&] { save_model(model->model, path); });
}

fb_status fb_model_load(const char* path, fb_model** out) {
    if (fb_status s = require(path && out, "null argument"); s != FB_OK) return s;
    return guarded([&] { *out = new fb_model{load_model(path)}; });
}

fb_status fb_model_evaluate(const fb_model* model, const fb_dataset* ds,
                            double* accuracy_out) {
    if (fb_status s = require(model && ds && accuracy_out, "null argument"); s != FB_OK) {
        return s;
    }
    return guarded([&] {
        if (ds->ds.items.empty()) {
            throw ArgumentError("evaluate: dataset is empty");
        }
        std::vector<Prediction> preds;
        std::vector<int> labels;
        preds.reserve(ds->ds.items.size());
        for (const auto& item : ds->ds.items) {
            preds.push_back(predict(model->model, item.pixels));
            labels.push_back(item.label);
        }
        *accuracy_out = accuracy(preds, labels);
    });
}

void fb_model_free(fb_model* model) { delete model; }

fb_status fb_sweep_run(const fb_config* cfg, const fb_model* model,
                       const fb_dataset* test_set, const char* out_dir, fb_report** out) {
    if (fb_status s = require(cfg && model && test_set && out, "null argument"); s != FB_OK) {
        return s;
    }
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        *out = new fb_report{
            sweep_stage(c, model->model, test_set->ds, out_dir ? out_dir : "")};
    });
}

fb_status fb_report_row_count(const fb_report* report, uint64_t* out) {
    if (fb_status s = require(report && out, "null argument"); s != FB_OK) return s;
    *out = report->report.sweep.size();
    return FB_OK;
}

fb_status fb_report_row(const fb_report* report, uint64_t index, double* epsilon_out,
                        double* accuracy_out, double* mean_ssim_out,
                        uint64_t* n_samples_out) {
    if (fb_status s = require(report != nullptr, "report handle is null"); s != FB_OK) {
        return s;
    }
    if (index >= report->report.sweep.size()) {
        set_error("report row index out of range");
        return FB_ERROR_ARGUMENT;
    }
    const SweepRecord& rec = report->report.sweep[static_cast<std::size_t>(index)];
    if (epsilon_out) *epsilon_out = rec.epsilon;
    if (accuracy_out) *accuracy_out = rec.accuracy;
    if (mean_ssim_out) *mean_ssim_out = rec.mean_ssim;
    if (n_samples_out) *n_samples_out = rec.n_samples;
    return FB_OK;
}

fb_status fb_report_clean_accuracy(const fb_report* report, double* out) {
    if (fb_status s = require(report && out, "null argument"); s != FB_OK) return s;
    *out = report->report.clean_accuracy;
    return FB_OK;
}

fb_status fb_report_write(const fb_report* report, const char* out_dir, const char* formats) {
    if (fb_status s = require(report && out_dir, "null argument"); s != FB_OK) return s;
    return guarded([&] { emit_report(report->report, out_dir, parse_formats(formats)); });
}

fb_status fb_report_load_json(const char* path, fb_report** out) {
    if (fb_status s = require(path && out, "null argument"); s != FB_OK) return s;
    return guarded([&] { *out = new fb_report{load_report_json(path)}; });
}

void fb_report_free(fb_report* report) { delete report; }

fb_status fb_stage_synth(const fb_config* cfg, const char* out_dir, uint64_t* count_out) {
    if (fb_status s = require(cfg && out_dir, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        if (c.dataset.source != "synthetic") {
            throw ArgumentError("synth stage: dataset.source must be synthetic");
        }
        const Dataset ds = synth_dataset(c.dataset.n, c.dataset.size, c.dataset.seed);
        write_dataset(ds, out_dir);
        if (count_out) *count_out = ds.items.size();
    });
}

fb_status fb_stage_train(const fb_config* cfg, const char* out_dir,
                         double* test_accuracy_out) {
    if (fb_status s = require(cfg && out_dir, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        c.report.out = out_dir;
        const Dataset full = config_dataset(c);
        auto [train_set, test_set] =
            split_dataset(full, c.split.train_fraction, c.split.seed);
        TrainResult trained = train_stage(c, train_set);

        std::vector<Prediction> preds;
        std::vector<int> labels;
        for (const auto& item : test_set.items) {
            preds.push_back(predict(trained.model, item.pixels));
            labels.push_back(item.label);
        }
        const double test_acc = accuracy(preds, labels);

        ExperimentReport report;
        report.version = kVersion;
        report.config_echo = c.echo();
        report.clean_accuracy = test_acc;
        report.history = trained.history;
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) {
            throw IoError(std::string("train stage: cannot create ") + out_dir);
        }
        save_model(trained.model, std::string(out_dir) + "/model.ckpt");
        save_report_json(report, std::string(out_dir) + "/train.json");
        if (test_accuracy_out) *test_accuracy_out = test_acc;
    });
}

fb_status fb_stage_attack(const fb_config* cfg, const char* model_path, const char* out_dir) {
    if (fb_status s = require(cfg && model_path && out_dir, "null argument"); s != FB_OK) {
        return s;
    }
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.validate_and_normalize();
        c.report.out = out_dir;
        const Dataset full = config_dataset(c);
        auto [train_set, test_set] =
            split_dataset(full, c.split.train_fraction, c.split.seed);
        (void)train_set;
        const Model model = load_model(model_path);
        ExperimentReport report = sweep_stage(c, model, test_set, out_dir);
        emit_report(report, out_dir, c.report.formats);
    });
}

fb_status fb_stage_sweep(const fb_config* cfg, const char* out_dir) {
    if (fb_status s = require(cfg && out_dir, "null argument"); s != FB_OK) return s;
    return guarded([&] {
        ExperimentConfig c = cfg->cfg;
        c.report.out = out_dir;
        run_experiment(c);
    });
}

fb_status fb_ssim_files(const char* path_a, const char* path_b, uint32_t window,
                        double dynamic_range, double* mean_ssim_out) {
    if (fb_status s = require(path_a && path_b && mean_ssim_out, "null argument");
        s != FB_OK) {
        return s;
    }
    return guarded([&] {
        const PgmImage a = load_pgm(path_a);
        const PgmImage b = load_pgm(path_b);
        *mean_ssim_out = ssim(a.pixels, b.pixels, window, dynamic_range).mean_ssim;
    });
}

} // extern "C"
