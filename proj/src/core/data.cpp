#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace fgsmbench {

namespace {

// Reads one whitespace-delimited header token, tolerating comment lines.
std::string next_header_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) continue;
        break;
    }
    if (c == EOF) return tok;
    tok.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
    }
    if (c == '#') in.unget();
    return tok;
}

std::size_t parse_extent(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(std::string("pgm: malformed ") + what);
    }
    const unsigned long long v = std::stoull(tok);
    if (v == 0) {
        throw ParseError(std::string("pgm: zero ") + what);
    }
    return static_cast<std::size_t>(v);
}

} // namespace

PgmImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("pgm: cannot open " + path);
    }
    const std::string magic = next_header_token(in);
    if (magic != "P5") {
        throw ParseError("pgm: bad magic '" + magic + "' in " + path +
                         " (only binary P5 is supported)");
    }
    const std::size_t width = parse_extent(next_header_token(in), "width");
    const std::size_t height = parse_extent(next_header_token(in), "height");
    const std::size_t maxval = parse_extent(next_header_token(in), "maxval");
    if (maxval > 255) {
        throw ParseError("pgm: maxval " + std::to_string(maxval) + " exceeds 255 in " + path);
    }
    // The header ends with exactly one whitespace byte before the raster.
    std::vector<unsigned char> raw(width * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw ParseError("pgm: truncated pixel data in " + path);
    }
    Tensor pixels({1, height, width});
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        pixels[i] = static_cast<double>(raw[i]) * scale;
    }
    return PgmImage{std::move(pixels), static_cast<int>(maxval)};
}

void save_pgm(const std::string& path, const Tensor& pixels, int maxval) {
    if (maxval < 1 || maxval > 255) {
        throw ArgumentError("save_pgm: maxval must be in [1, 255]");
    }
    std::size_t h = 0, w = 0;
    if (pixels.rank() == 2) {
        h = pixels.extent(0);
        w = pixels.extent(1);
    } else if (pixels.rank() == 3 && pixels.extent(0) == 1) {
        h = pixels.extent(1);
        w = pixels.extent(2);
    } else {
        throw ArgumentError("save_pgm: expected [H x W] or [1 x H x W] pixels");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("pgm: cannot create " + path);
    }
    out << "P5\n" << w << " " << h << "\n" << maxval << "\n";
    std::vector<unsigned char> raw(h * w);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double v = pixels[i] * static_cast<double>(maxval);
        long q = std::lround(v);
        if (q < 0) q = 0;
        if (q > maxval) q = maxval;
        raw[i] = static_cast<unsigned char>(q);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw IoError("pgm: write failed for " + path);
    }
}

Tensor resize_bilinear(const Tensor& img, std::size_t out_h, std::size_t out_w) {
    if (img.rank() != 3) {
        throw ArgumentError("resize_bilinear: expected a [C x H x W] tensor");
    }
    if (out_h == 0 || out_w == 0) {
        throw ArgumentError("resize_bilinear: output extents must be positive");
    }
    const std::size_t channels = img.extent(0);
    const std::size_t in_h = img.extent(1);
    const std::size_t in_w = img.extent(2);
    Tensor out({channels, out_h, out_w});
    // Corner-aligned sampling: output corner pixels land on input corners.
    const double sy = out_h > 1 ? static_cast<double>(in_h - 1) / static_cast<double>(out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(in_w - 1) / static_cast<double>(out_w - 1) : 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            const double fy = static_cast<double>(oy) * sy;
            std::size_t y0 = static_cast<std::size_t>(fy);
            if (y0 >= in_h - 1) y0 = in_h - 1;
            const std::size_t y1 = std::min(y0 + 1, in_h - 1);
            const double wy = fy - static_cast<double>(y0);
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                const double fx = static_cast<double>(ox) * sx;
                std::size_t x0 = static_cast<std::size_t>(fx);
                if (x0 >= in_w - 1) x0 = in_w - 1;
                const std::size_t x1 = std::min(x0 + 1, in_w - 1);
                const double wx = fx - static_cast<double>(x0);
                const double top = img.at3(c, y0, x0) * (1.0 - wx) + img.at3(c, y0, x1) * wx;
                const double bot = img.at3(c, y1, x0) * (1.0 - wx) + img.at3(c, y1, x1) * wx;
                out.at3(c, oy, ox) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

namespace {

// Smooth background: a coarse uniform-noise grid upsampled bilinearly,
// then shifted so the image mean is exactly kBackgroundMean.
constexpr double kBackgroundMean = 0.30;

Tensor synth_background(SeededRng& rng, std::size_t size) {
    const std::size_t grid = std::clamp<std::size_t>(size / 8, 4, 12);
    Tensor coarse = rng_uniform(rng, {1, grid, grid}, 0.18, 0.42);
    Tensor img = resize_bilinear(coarse, size, size);
    double mean = 0.0;
    for (double v : img.values()) mean += v;
    mean /= static_cast<double>(img.size());
    for (double& v : img.values()) v += kBackgroundMean - mean;
    return img;
}

void add_blob(Tensor& img, double cy, double cx, double sigma, double amplitude) {
    const std::size_t h = img.extent(1), w = img.extent(2);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t y = 0; y < h; ++y) {
        const double dy = static_cast<double>(y) - cy;
        for (std::size_t x = 0; x < w; ++x) {
            const double dx = static_cast<double>(x) - cx;
            img.at3(0, y, x) += amplitude * std::exp(-(dy * dy + dx * dx) * inv);
        }
    }
}

std::string synth_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn-%04zu", i);
    return buf;
}

} // namespace

Dataset synth_dataset(std::size_t n, std::size_t image_size, std::uint64_t seed) {
    if (n < 10) {
        throw ArgumentError("synth_dataset: n must be >= 10");
    }
    if (image_size < 8) {
        throw ArgumentError("synth_dataset: image_size must be >= 8");
    }
    const std::size_t n_normal =
        static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
    SeededRng rng(seed);
    Dataset ds;
    ds.source = "synthetic";
    ds.seed = seed;
    ds.items.reserve(n);
    const double sz = static_cast<double>(image_size);
    for (std::size_t i = 0; i < n; ++i) {
        LabeledImage item;
        item.id = synth_id(i);
        item.label = i < n_normal ? 0 : 1;
        Tensor img = synth_background(rng, image_size);
        if (item.label == 1) {
            const std::size_t blobs = 1 + rng.next_index(3);
            for (std::size_t b = 0; b < blobs; ++b) {
                const double amplitude = rng.next_uniform(0.40, 0.60);
                const double sigma = rng.next_uniform(0.08, 0.14) * sz;
                const double cy = rng.next_uniform(0.2, 0.8) * sz;
                const double cx = rng.next_uniform(0.2, 0.8) * sz;
                add_blob(img, cy, cx, sigma, amplitude);
            }
        }
        item.pixels = clamp(img, 0.0, 1.0);
        ds.items.push_back(std::move(item));
    }
    return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction,
                                          std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("split: train_fraction must be in (0, 1)");
    }
    if (ds.items.empty()) {
        throw ArgumentError("split: dataset is empty");
    }
    std::size_t per_class[2] = {0, 0};
    for (const auto& item : ds.items) {
        per_class[item.label == 1 ? 1 : 0]++;
    }
    std::size_t train_quota[2];
    for (int c = 0; c < 2; ++c) {
        train_quota[c] = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(per_class[c])));
        train_quota[c] = std::min(train_quota[c], per_class[c]);
    }
    const std::size_t train_total = train_quota[0] + train_quota[1];
    if (train_total == 0 || train_total == ds.items.size()) {
        throw ArgumentError("split: degenerate split, both sides must be nonempty");
    }
    SeededRng rng(seed);
    const std::vector<std::size_t> order = shuffled_indices(rng, ds.items.size());
    Dataset train, test;
    train.source = ds.source;
    train.seed = ds.seed;
    test.source = ds.source;
    test.seed = ds.seed;
    std::size_t taken[2] = {0, 0};
    for (const std::size_t idx : order) {
        const auto& item = ds.items[idx];
        const int c = item.label == 1 ? 1 : 0;
        if (taken[c] < train_quota[c]) {
            train.items.push_back(item);
            taken[c]++;
        } else {
            test.items.push_back(item);
        }
    }
    return {std::move(train), std::move(test)};
}

Dataset load_manifest(const std::string& manifest_path, std::size_t resize_to) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("manifest: cannot open " + manifest_path);
    }
    // Validate every record before touching any image file.
    struct Record {
        std::string id;
        std::string rel;
        int label;
    };
    std::vector<Record> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id, rel, label_text;
        if (!std::getline(fields, id, ',') || !std::getline(fields, rel, ',') ||
            !std::getline(fields, label_text)) {
            throw ParseError("manifest: malformed record at line " + std::to_string(lineno));
        }
        if (label_text != "0" && label_text != "1") {
            throw ParseError("manifest: label must be 0 or 1 at line " + std::to_string(lineno));
        }
        if (!seen_ids.insert(id).second) {
            throw ParseError("manifest: duplicate id '" + id + "' at line " + std::to_string(lineno));
        }
        records.push_back(Record{id, rel, label_text == "1" ? 1 : 0});
    }
    if (records.empty()) {
        throw ParseError("manifest: no records in " + manifest_path);
    }
    const fs::path base = fs::path(manifest_path).parent_path();
    Dataset ds;
    ds.source = "imported";
    ds.items.reserve(records.size());
    for (const auto& rec : records) {
        LabeledImage item;
        item.id = rec.id;
        item.label = rec.label;
        PgmImage pgm = load_pgm((base / rec.rel).string());
        item.pixels = resize_to > 0 ? resize_bilinear(pgm.pixels, resize_to, resize_to)
                                    : std::move(pgm.pixels);
        ds.items.push_back(std::move(item));
    }
    return ds;
}

void write_dataset(const Dataset& ds, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "images", ec);
    if (ec) {
        throw IoError("dataset: cannot create " + dir + ": " + ec.message());
    }
    std::ofstream manifest(fs::path(dir) / "manifest.csv");
    if (!manifest) {
        throw IoError("dataset: cannot create manifest in " + dir);
    }
    for (const auto& item : ds.items) {
        const std::string rel = "images/" + item.id + ".pgm";
        save_pgm((fs::path(dir) / rel).string(), item.pixels);
        manifest << item.id << "," << rel << "," << item.label << "\n";
    }
    if (!manifest) {
        throw IoError("dataset: manifest write failed in " + dir);
    }
}

} // namespace fgsmbench
