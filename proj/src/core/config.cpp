#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "textio.hpp"

namespace fgsmbench {

std::vector<double> epsilon_grid(const std::string& name) {
    if (name == "small") {
        return {0.001, 0.005, 0.01, 0.02, 0.05};
    }
    if (name == "high") {
        return {0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
    }
    if (name == "full") {
        return {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
    }
    throw ConfigError("config: unknown epsilon grid '" + name +
                     "' (expected small, high or full)");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
    }
    return out;
}

double parse_f64(const std::string& v, const std::string& key) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("config: '" + key + "' expects a finite number, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

} // namespace

ExperimentConfig::ExperimentConfig() { attack.epsilons = epsilon_grid("high"); }

void ExperimentConfig::set(const std::string& dotted_key, const std::string& raw_value) {
    const std::size_t dot = dotted_key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError("config: expected section.key, got '" + dotted_key + "'");
    }
    const std::string section = dotted_key.substr(0, dot);
    const std::string key = dotted_key.substr(dot + 1);
    const std::string value = trim(raw_value);
    const std::string full = section + "." + key;

    if (section == "dataset") {
        if (key == "source") {
            if (value != "synthetic" && value != "manifest") {
                throw ConfigError("config: dataset.source must be synthetic or manifest");
            }
            dataset.source = value;
        } else if (key == "n") {
            dataset.n = parse_u64(value, full);
        } else if (key == "size") {
            dataset.size = parse_u64(value, full);
        } else if (key == "seed") {
            dataset.seed = parse_u64(value, full);
        } else if (key == "manifest") {
            dataset.manifest = value;
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "split") {
        if (key == "train_fraction") {
            split.train_fraction = parse_f64(value, full);
        } else if (key == "seed") {
            split.seed = parse_u64(value, full);
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "train") {
        if (key == "learning_rate") {
            train.train.learning_rate = parse_f64(value, full);
        } else if (key == "epochs") {
            train.train.epochs = parse_u64(value, full);
        } else if (key == "batch_size") {
            train.train.batch_size = parse_u64(value, full);
        } else if (key == "seed") {
            train.train.seed = parse_u64(value, full);
        } else if (key == "conv1_filters") {
            train.arch.conv1_filters = parse_u64(value, full);
        } else if (key == "conv2_filters") {
            train.arch.conv2_filters = parse_u64(value, full);
        } else if (key == "hidden") {
            train.arch.hidden = parse_u64(value, full);
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "attack") {
        if (key == "grid") {
            attack.epsilons = epsilon_grid(value);
        } else if (key == "epsilons") {
            std::vector<double> eps;
            for (const auto& part : split_list(value)) {
                eps.push_back(parse_f64(part, full));
            }
            if (eps.empty()) {
                throw ConfigError("config: attack.epsilons must list at least one value");
            }
            attack.epsilons = std::move(eps);
        } else if (key == "clip") {
            attack.clip = parse_bool(value, full);
        } else if (key == "clip_lo") {
            attack.clip_lo = parse_f64(value, full);
        } else if (key == "clip_hi") {
            attack.clip_hi = parse_f64(value, full);
        } else if (key == "norm") {
            if (value != kNormOrder) {
                throw ConfigError("config: attack.norm is fixed to '" + std::string(kNormOrder) +
                                 "'");
            }
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "metrics") {
        if (key == "ssim_window") {
            metrics.ssim_window = parse_u64(value, full);
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "report") {
        if (key == "out") {
            report.out = value;
        } else if (key == "formats") {
            report.formats = split_list(value);
        } else if (key == "dump_adversarial") {
            report.dump_adversarial = parse_u64(value, full);
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "experiment") {
        if (key == "seed") {
            // One master seed spreads across the stages; explicit per-stage
            // seeds set afterwards still win.
            const std::uint64_t s = parse_u64(value, full);
            dataset.seed = s;
            split.seed = s + 1;
            train.train.seed = s + 2;
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else {
        throw ConfigError("config: unknown section '" + section + "'");
    }
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw ConfigError("config: malformed section header at line " +
                                 std::to_string(lineno));
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        }
        if (section.empty()) {
            throw ConfigError("config: key outside any [section] at line " +
                             std::to_string(lineno));
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            cfg.set(section + "." + key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("config: cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void ExperimentConfig::validate_and_normalize() {
    if (dataset.source == "manifest" && dataset.manifest.empty()) {
        throw ConfigError("config: dataset.manifest is required when source = manifest");
    }
    if (dataset.source == "synthetic" && dataset.n < 10) {
        throw ConfigError("config: dataset.n must be >= 10");
    }
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
        throw ConfigError("config: split.train_fraction must be in (0, 1)");
    }
    try {
        train.train.validate();
        attack.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (metrics.ssim_window == 0) {
        throw ConfigError("config: metrics.ssim_window must be positive");
    }
    if (dataset.source == "synthetic" && metrics.ssim_window > dataset.size) {
        throw ConfigError("config: metrics.ssim_window exceeds the image size");
    }
    if (report.out.empty()) {
        throw ConfigError("config: report.out must not be empty");
    }
    for (const auto& f : report.formats) {
        if (f != "csv" && f != "svg" && f != "json") {
            throw ConfigError("config: unknown report format '" + f + "'");
        }
    }
    // The clean baseline row is part of the contract: epsilon 0 leads every
    // sweep exactly once.
    std::vector<double> eps;
    eps.push_back(0.0);
    for (double e : attack.epsilons) {
        if (e != 0.0) eps.push_back(e);
    }
    attack.epsilons = std::move(eps);
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
    std::map<std::string, std::string> m;
    m["dataset.source"] = dataset.source;
    m["dataset.n"] = std::to_string(dataset.n);
    m["dataset.size"] = std::to_string(dataset.size);
    m["dataset.seed"] = std::to_string(dataset.seed);
    if (!dataset.manifest.empty()) m["dataset.manifest"] = dataset.manifest;
    m["split.train_fraction"] = fmt_g6(split.train_fraction);
    m["split.seed"] = std::to_string(split.seed);
    m["train.learning_rate"] = fmt_g6(train.train.learning_rate);
    m["train.epochs"] = std::to_string(train.train.epochs);
    m["train.batch_size"] = std::to_string(train.train.batch_size);
    m["train.seed"] = std::to_string(train.train.seed);
    m["train.conv1_filters"] = std::to_string(train.arch.conv1_filters);
    m["train.conv2_filters"] = std::to_string(train.arch.conv2_filters);
    m["train.hidden"] = std::to_string(train.arch.hidden);
    std::string eps;
    for (std::size_t i = 0; i < attack.epsilons.size(); ++i) {
        if (i) eps += ",";
        eps += fmt_g6(attack.epsilons[i]);
    }
    m["attack.epsilons"] = eps;
    m["attack.norm"] = kNormOrder;
    m["attack.clip"] = attack.clip ? "true" : "false";
    m["attack.clip_lo"] = fmt_g6(attack.clip_lo);
    m["attack.clip_hi"] = fmt_g6(attack.clip_hi);
    m["metrics.ssim_window"] = std::to_string(metrics.ssim_window);
    m["report.out"] = report.out;
    std::string formats;
    for (std::size_t i = 0; i < report.formats.size(); ++i) {
        if (i) formats += ",";
        formats += report.formats[i];
    }
    m["report.formats"] = formats;
    m["report.dump_adversarial"] = std::to_string(report.dump_adversarial);
    return m;
}

} // namespace fgsmbench
