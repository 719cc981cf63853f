#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fgsmbench {

namespace {

constexpr char kMagic[8] = {'F', 'G', 'S', 'M', 'B', 'N', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw ParseError("checkpoint: truncated header");
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw ParseError("checkpoint: truncated header");
    return v;
}

void put_blob(std::ostream& out, const Tensor& t) {
    put_u64(out, t.size());
    if (t.size() > 0) {
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
}

void get_blob(std::istream& in, Tensor& t) {
    const std::uint64_t n = get_u64(in);
    if (n != t.size()) {
        throw ParseError("checkpoint: parameter blob size does not match the layer list");
    }
    if (n > 0) {
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw ParseError("checkpoint: truncated parameter blob");
    }
}

} // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("checkpoint: cannot create " + path);
    }
    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(model.input_shape().channels));
    put_u32(out, static_cast<std::uint32_t>(model.input_shape().height));
    put_u32(out, static_cast<std::uint32_t>(model.input_shape().width));
    put_u32(out, static_cast<std::uint32_t>(model.layers().size()));
    for (const auto& layer : model.layers()) {
        if (const auto* conv = std::get_if<Conv2dSpec>(&layer)) {
            put_u32(out, 0);
            put_u32(out, static_cast<std::uint32_t>(conv->in_channels));
            put_u32(out, static_cast<std::uint32_t>(conv->out_channels));
            put_u32(out, static_cast<std::uint32_t>(conv->kernel));
        } else if (std::get_if<ReluSpec>(&layer)) {
            put_u32(out, 1);
        } else if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
            put_u32(out, 2);
            put_u32(out, static_cast<std::uint32_t>(pool->window));
        } else if (std::get_if<FlattenSpec>(&layer)) {
            put_u32(out, 3);
        } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
            put_u32(out, 4);
            put_u32(out, static_cast<std::uint32_t>(fc->in));
            put_u32(out, static_cast<std::uint32_t>(fc->out));
        }
    }
    for (const auto& p : model.params()) {
        put_blob(out, p.weights);
        put_blob(out, p.bias);
    }
    if (!out) {
        throw IoError("checkpoint: write failed for " + path);
    }
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("checkpoint: cannot open " + path);
    }
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ParseError("checkpoint: bad magic in " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
    }
    Shape3 input;
    input.channels = get_u32(in);
    input.height = get_u32(in);
    input.width = get_u32(in);
    const std::uint32_t n_layers = get_u32(in);
    std::vector<LayerSpec> layers;
    layers.reserve(n_layers);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        const std::uint32_t tag = get_u32(in);
        switch (tag) {
            case 0: {
                const std::uint32_t c_in = get_u32(in);
                const std::uint32_t c_out = get_u32(in);
                const std::uint32_t k = get_u32(in);
                layers.push_back(Conv2dSpec{c_in, c_out, k});
                break;
            }
            case 1:
                layers.push_back(ReluSpec{});
                break;
            case 2:
                layers.push_back(MaxPoolSpec{get_u32(in)});
                break;
            case 3:
                layers.push_back(FlattenSpec{});
                break;
            case 4: {
                const std::uint32_t f_in = get_u32(in);
                const std::uint32_t f_out = get_u32(in);
                layers.push_back(FcSpec{f_in, f_out});
                break;
            }
            default:
                throw ParseError("checkpoint: unknown layer tag " + std::to_string(tag));
        }
    }
    Model model(input, std::move(layers), 0);
    for (auto& p : model.mutable_params()) {
        get_blob(in, p.weights);
        get_blob(in, p.bias);
    }
    // Anything after the last blob means the file was not written by us.
    in.peek();
    if (!in.eof()) {
        throw ParseError("checkpoint: trailing bytes in " + path);
    }
    for (const auto& p : model.params()) {
        if (!p.empty()) {
            ensure_finite(p.weights, "checkpoint");
            ensure_finite(p.bias, "checkpoint");
        }
    }
    return model;
}

} // namespace fgsmbench
