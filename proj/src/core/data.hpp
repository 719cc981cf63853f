#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace fgsmbench {

/// Grayscale image with ground-truth label. Pixels are [1 x H x W] in [0,1];
/// label 0 = normal, 1 = cancer.
struct LabeledImage {
    Tensor pixels;
    int label = 0;
    std::string id;
};

struct Dataset {
    std::vector<LabeledImage> items;
    std::string source;                    // "synthetic" or "imported"
    std::optional<std::uint64_t> seed;     // present when synthetic

    std::size_t size() const { return items.size(); }
};

/// Result of reading a binary PGM: pixels scaled into [0,1] plus the file's
/// maxval, so a save with the same maxval round-trips the bytes exactly.
struct PgmImage {
    Tensor pixels;   // [1 x H x W]
    int maxval = 255;
};

/// Reads a binary ("P5") PGM with maxval <= 255. One comment line after the
/// magic is tolerated. ASCII ("P2") files are rejected.
PgmImage load_pgm(const std::string& path);

/// Writes pixels (rank-2 [H x W] or rank-3 [1 x H x W], values in [0,1])
/// as binary PGM with the given maxval.
void save_pgm(const std::string& path, const Tensor& pixels, int maxval = 255);

/// Corner-aligned bilinear resize of a [C x H x W] image. Output values
/// stay within the input's range.
Tensor resize_bilinear(const Tensor& img, std::size_t out_h, std::size_t out_w);

/// Deterministic synthetic dataset: round(0.7*n) "normal" images (smooth
/// low-frequency background) and the rest "cancer" (same background plus
/// 1-3 bright Gaussian blobs standing in for masses). n must be >= 10.
Dataset synth_dataset(std::size_t n, std::size_t image_size, std::uint64_t seed);

/// Seeded shuffle followed by a stratified prefix split: each split's class
/// ratio matches the source within one item per class. The test side must
/// end up nonempty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction,
                                          std::uint64_t seed);

/// Manifest: one "id,relative-path,label" record per line, no header.
/// Paths are resolved against the manifest's directory. resize_to > 0
/// resizes every image to resize_to x resize_to on load.
Dataset load_manifest(const std::string& manifest_path, std::size_t resize_to = 0);

/// Writes dir/images/<id>.pgm for every item plus dir/manifest.csv.
void write_dataset(const Dataset& ds, const std::string& dir);

} // namespace fgsmbench
