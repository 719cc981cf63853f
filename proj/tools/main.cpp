// fgsmbench command line. Everything substantive happens behind the C API;
// this file only parses flags and routes them.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "fgsmbench.h"

namespace {

// Exit codes: 0 ok, 2 usage, then one code per failure category.
int exit_code_for(fb_status s) {
    switch (s) {
        case FB_OK: return 0;
        case FB_ERROR_CONFIG: return 3;
        case FB_ERROR_DATA: return 4;
        case FB_ERROR_IO: return 5;
        case FB_ERROR_ARGUMENT: return 6;
        default: return 7;
    }
}

int fail(fb_status s) {
    std::fprintf(stderr, "fgsmbench: error: %s\n", fb_last_error());
    return exit_code_for(s);
}

struct ConfigDeleter {
    void operator()(fb_config* c) const { fb_config_free(c); }
};
using ConfigPtr = std::unique_ptr<fb_config, ConfigDeleter>;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_seed = true) {
    cmd->add_option("--config", opts.config_path, "Experiment config file (INI)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    if (with_seed) {
        cmd->add_option("--seed", opts.seed,
                        "Master seed; spreads across dataset/split/train stages");
    }
}

// --out flag beats FGSMBENCH_OUT beats the config's report.out (which
// defaults to "out").
std::string resolve_out(const std::string& flag_value, const fb_config* cfg) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FGSMBENCH_OUT"); env && *env) return env;
    char buf[4096];
    if (cfg && fb_config_get(cfg, "report.out", buf, sizeof buf) == FB_OK) {
        return buf;
    }
    return "out";
}

fb_status build_config(const CommonOpts& opts, ConfigPtr& out) {
    fb_config* raw = nullptr;
    fb_status s = opts.config_path.empty() ? fb_config_default(&raw)
                                           : fb_config_parse_file(opts.config_path.c_str(), &raw);
    if (s != FB_OK) return s;
    out.reset(raw);
    if (!opts.seed.empty()) {
        s = fb_config_set(out.get(), "experiment.seed", opts.seed.c_str());
        if (s != FB_OK) return s;
    }
    return FB_OK;
}

std::string format_fixed6(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial-robustness benchmark for grayscale image classifiers"};
    app.set_version_flag("--version", std::string(fb_version()));
    app.require_subcommand(1);

    CommonOpts synth_opts, train_opts, attack_opts, sweep_opts;
    std::string attack_model = "model.ckpt";
    std::string report_in, report_formats = "csv,svg";
    std::string report_out;
    std::string ssim_a, ssim_b;
    std::uint32_t ssim_window = 8;
    double ssim_range = 1.0;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset (PGM + manifest)");
    add_common(synth, synth_opts);

    CLI::App* train = app.add_subcommand("train", "Train the classifier and save a checkpoint");
    add_common(train, train_opts);

    CLI::App* attack = app.add_subcommand(
        "attack", "Run the epsilon sweep against a saved checkpoint");
    add_common(attack, attack_opts);
    attack->add_option("--model", attack_model, "Model checkpoint path")->required();

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Full pipeline: data, split, train, attack sweep, reports");
    add_common(sweep, sweep_opts);

    CLI::App* report = app.add_subcommand("report", "Re-emit report files from a report.json");
    report->add_option("--in", report_in, "Existing report.json")->required();
    report->add_option("--out", report_out, "Output directory");
    report->add_option("--formats", report_formats, "Comma list of csv,svg,json");

    CLI::App* ssim_cmd = app.add_subcommand("ssim", "Mean SSIM between two PGM images");
    ssim_cmd->add_option("a", ssim_a, "First image")->required();
    ssim_cmd->add_option("b", ssim_b, "Second image")->required();
    ssim_cmd->add_option("--window", ssim_window, "Window size (default 8)");
    ssim_cmd->add_option("--range", ssim_range, "Dynamic range (default 1.0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (synth->parsed()) {
        ConfigPtr cfg;
        if (fb_status s = build_config(synth_opts, cfg); s != FB_OK) return fail(s);
        const std::string out = resolve_out(synth_opts.out_dir, cfg.get());
        std::uint64_t count = 0;
        if (fb_status s = fb_stage_synth(cfg.get(), out.c_str(), &count); s != FB_OK) {
            return fail(s);
        }
        std::printf("wrote %llu images and manifest.csv under %s\n",
                    static_cast<unsigned long long>(count), out.c_str());
        return 0;
    }

    if (train->parsed()) {
        ConfigPtr cfg;
        if (fb_status s = build_config(train_opts, cfg); s != FB_OK) return fail(s);
        const std::string out = resolve_out(train_opts.out_dir, cfg.get());
        double test_acc = 0.0;
        if (fb_status s = fb_stage_train(cfg.get(), out.c_str(), &test_acc); s != FB_OK) {
            return fail(s);
        }
        std::printf("checkpoint: %s/model.ckpt\n", out.c_str());
        std::printf("test accuracy: %s\n", format_fixed6(test_acc).c_str());
        return 0;
    }

    if (attack->parsed()) {
        ConfigPtr cfg;
        if (fb_status s = build_config(attack_opts, cfg); s != FB_OK) return fail(s);
        const std::string out = resolve_out(attack_opts.out_dir, cfg.get());
        if (fb_status s = fb_stage_attack(cfg.get(), attack_model.c_str(), out.c_str());
            s != FB_OK) {
            return fail(s);
        }
        std::printf("sweep reports written under %s\n", out.c_str());
        return 0;
    }

    if (sweep->parsed()) {
        ConfigPtr cfg;
        if (fb_status s = build_config(sweep_opts, cfg); s != FB_OK) return fail(s);
        const std::string out = resolve_out(sweep_opts.out_dir, cfg.get());
        if (fb_status s = fb_stage_sweep(cfg.get(), out.c_str()); s != FB_OK) {
            return fail(s);
        }
        std::printf("sweep complete; reports under %s\n", out.c_str());
        return 0;
    }

    if (report->parsed()) {
        fb_report* rep = nullptr;
        if (fb_status s = fb_report_load_json(report_in.c_str(), &rep); s != FB_OK) {
            return fail(s);
        }
        const std::string out = resolve_out(report_out, nullptr);
        const fb_status s = fb_report_write(rep, out.c_str(), report_formats.c_str());
        fb_report_free(rep);
        if (s != FB_OK) return fail(s);
        std::printf("report files written under %s\n", out.c_str());
        return 0;
    }

    if (ssim_cmd->parsed()) {
        double mean = 0.0;
        if (fb_status s =
                fb_ssim_files(ssim_a.c_str(), ssim_b.c_str(), ssim_window, ssim_range, &mean);
            s != FB_OK) {
            return fail(s);
        }
        std::printf("%s\n", format_fixed6(mean).c_str());
        return 0;
    }

    return 2;
}
