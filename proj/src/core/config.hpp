#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attack.hpp"
#include "nn.hpp"

namespace fgsmbench {

// Named epsilon grids; values are configuration defaults, not contract.
std::vector<double> epsilon_grid(const std::string& name);

struct DatasetConfig {
    std::string source = "synthetic";   // "synthetic" or "manifest"
    std::size_t n = 100;
    std::size_t size = 64;
    std::uint64_t seed = 42;
    std::string manifest;
};

struct SplitConfig {
    double train_fraction = 0.9;
    std::uint64_t seed = 43;
};

struct TrainSection {
    TrainConfig train;
    DefaultArch arch;
};

struct MetricsConfig {
    std::size_t ssim_window = 8;
};

struct ReportConfig {
    std::string out = "out";
    std::vector<std::string> formats = {"csv", "svg", "json"};
    std::size_t dump_adversarial = 0;   // PGM dumps per epsilon; 0 disables
};

/// Everything one experiment run needs, parsed from a flat INI-style file
/// with [section] headers and key = value lines. Unknown sections or keys
/// are rejected.
struct ExperimentConfig {
    DatasetConfig dataset;
    SplitConfig split;
    TrainSection train;
    AttackConfig attack;
    MetricsConfig metrics;
    ReportConfig report;

    ExperimentConfig();

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_text(const std::string& text);

    /// Applies a single "section.key" override using the same rules as the
    /// parser.
    void set(const std::string& dotted_key, const std::string& value);

    /// Validates every nested config and guarantees the epsilon list starts
    /// with 0 (prepending it when absent).
    void validate_and_normalize();

    /// Flat "section.key" -> value map of the effective configuration.
    std::map<std::string, std::string> echo() const;
};

} // namespace fgsmbench
