#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fgsmbench {

namespace {

std::string shape_text(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += " x ";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Walks the layer stack and returns every intermediate shape (input first).
// Throws ArgumentError on the first incompatibility.
std::vector<std::vector<std::size_t>> trace_shapes(const Shape3& input,
                                                   const std::vector<LayerSpec>& layers) {
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::size_t> cur = {input.channels, input.height, input.width};
    if (input.channels == 0 || input.height == 0 || input.width == 0) {
        throw ArgumentError("model: input extents must be positive");
    }
    shapes.push_back(cur);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& layer = layers[li];
        const std::string where = "model layer " + std::to_string(li);
        if (const auto* conv = std::get_if<Conv2dSpec>(&layer)) {
            if (cur.size() != 3) {
                throw ArgumentError(where + ": conv expects a [C x H x W] input, got " +
                                    shape_text(cur));
            }
            if (conv->kernel == 0 || conv->in_channels != cur[0]) {
                throw ArgumentError(where + ": conv channel mismatch");
            }
            if (cur[1] < conv->kernel || cur[2] < conv->kernel) {
                throw ArgumentError(where + ": input " + shape_text(cur) +
                                    " smaller than kernel " + std::to_string(conv->kernel));
            }
            cur = {conv->out_channels, cur[1] - conv->kernel + 1, cur[2] - conv->kernel + 1};
        } else if (std::get_if<ReluSpec>(&layer)) {
            // shape preserved
        } else if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
            if (cur.size() != 3) {
                throw ArgumentError(where + ": maxpool expects a [C x H x W] input");
            }
            if (pool->window < 2) {
                throw ArgumentError(where + ": pool window must be >= 2");
            }
            if (cur[1] % pool->window != 0 || cur[2] % pool->window != 0) {
                throw ArgumentError(where + ": pool input " + shape_text(cur) +
                                    " not divisible by window " + std::to_string(pool->window));
            }
            cur = {cur[0], cur[1] / pool->window, cur[2] / pool->window};
        } else if (std::get_if<FlattenSpec>(&layer)) {
            std::size_t n = 1;
            for (std::size_t e : cur) n *= e;
            cur = {n};
        } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
            if (cur.size() != 1 || cur[0] != fc->in) {
                throw ArgumentError(where + ": fc expects a flat input of " +
                                    std::to_string(fc->in) + ", got " + shape_text(cur));
            }
            if (fc->out == 0) {
                throw ArgumentError(where + ": fc output extent must be positive");
            }
            cur = {fc->out};
        }
        for (std::size_t e : cur) {
            if (e < 1) {
                throw ArgumentError(where + ": intermediate extent dropped below 1");
            }
        }
        shapes.push_back(cur);
    }
    if (shapes.back() != std::vector<std::size_t>{2}) {
        throw ArgumentError("model: final layer must produce 2 logits, got " +
                            shape_text(shapes.back()));
    }
    return shapes;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

} // namespace

Model::Model(Shape3 input, std::vector<LayerSpec> layers, std::uint64_t init_seed)
    : input_shape_(input), layers_(std::move(layers)) {
    trace_shapes(input_shape_, layers_);
    initialize_params(init_seed);
}

namespace {

// H -> conv5 -> pool2 -> conv5 -> pool2 with validity checks; used to size
// the flatten layer before the model's own shape validation runs.
std::size_t default_arch_spatial(std::size_t e, const char* axis) {
    const auto fail = [&](const std::string& why) {
        throw ArgumentError("model: input " + std::string(axis) + " of " + std::to_string(e) +
                            " is incompatible with the default architecture (" + why + ")");
    };
    if (e < 5) fail("first conv needs >= 5");
    std::size_t cur = e - 4;
    if (cur % 2 != 0) fail("first pool input is odd");
    cur /= 2;
    if (cur < 5) fail("second conv needs >= 5");
    cur -= 4;
    if (cur % 2 != 0) fail("second pool input is odd");
    return cur / 2;
}

} // namespace

Model Model::make_default(Shape3 input, const DefaultArch& arch, std::uint64_t init_seed) {
    if (arch.conv1_filters == 0 || arch.conv2_filters == 0 || arch.hidden == 0) {
        throw ArgumentError("model: filter and hidden counts must be positive");
    }
    // Flatten width follows from the input shape rather than a fixed table.
    const std::size_t h2 = default_arch_spatial(input.height, "height");
    const std::size_t w2 = default_arch_spatial(input.width, "width");
    std::vector<LayerSpec> layers;
    layers.push_back(Conv2dSpec{input.channels, arch.conv1_filters, 5});
    layers.push_back(ReluSpec{});
    layers.push_back(MaxPoolSpec{2});
    layers.push_back(Conv2dSpec{arch.conv1_filters, arch.conv2_filters, 5});
    layers.push_back(ReluSpec{});
    layers.push_back(MaxPoolSpec{2});
    layers.push_back(FlattenSpec{});
    layers.push_back(FcSpec{arch.conv2_filters * h2 * w2, arch.hidden});
    layers.push_back(ReluSpec{});
    layers.push_back(FcSpec{arch.hidden, 2});
    return Model(input, std::move(layers), init_seed);
}

void Model::initialize_params(std::uint64_t seed) {
    SeededRng rng(seed);
    params_.clear();
    params_.reserve(layers_.size());
    for (const auto& layer : layers_) {
        LayerParams p;
        if (const auto* conv = std::get_if<Conv2dSpec>(&layer)) {
            const std::size_t k = conv->kernel;
            const double lim =
                glorot_limit(conv->in_channels * k * k, conv->out_channels * k * k);
            p.weights = rng_uniform(rng, {conv->out_channels, conv->in_channels, k, k},
                                    -lim, lim);
            p.bias = Tensor({conv->out_channels});
        } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
            const double lim = glorot_limit(fc->in, fc->out);
            p.weights = rng_uniform(rng, {fc->out, fc->in}, -lim, lim);
            p.bias = Tensor({fc->out});
        }
        params_.push_back(std::move(p));
    }
}

void Model::set_all_params_zero() {
    for (auto& p : params_) {
        if (p.empty()) continue;
        std::fill(p.weights.values().begin(), p.weights.values().end(), 0.0);
        std::fill(p.bias.values().begin(), p.bias.values().end(), 0.0);
    }
}

std::vector<std::vector<std::size_t>> Model::shape_trace() const {
    return trace_shapes(input_shape_, layers_);
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw ArgumentError("train: learning_rate must be positive");
    }
    if (batch_size == 0) {
        throw ArgumentError("train: batch_size must be positive");
    }
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    if (input.rank() != 3 || kernels.rank() != 4 || bias.rank() != 1) {
        throw ArgumentError("conv2d: expected input [C x H x W], kernels [F x C x K x K], bias [F]");
    }
    const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
    const std::size_t f = kernels.extent(0), k = kernels.extent(2);
    if (kernels.extent(1) != c || kernels.extent(3) != k || bias.extent(0) != f) {
        throw ArgumentError("conv2d: kernel/bias shape mismatch");
    }
    if (h < k || w < k) {
        throw ArgumentError("conv2d: input smaller than kernel");
    }
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    Tensor out({f, oh, ow});
    for (std::size_t fi = 0; fi < f; ++fi) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = bias[fi];
                for (std::size_t ci = 0; ci < c; ++ci) {
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        const double* in_row = input.data() + (ci * h + oy + ky) * w + ox;
                        const double* k_row = kernels.data() + ((fi * c + ci) * k + ky) * k;
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            acc += in_row[kx] * k_row[kx];
                        }
                    }
                }
                out.at3(fi, oy, ox) = acc;
            }
        }
    }
    return out;
}

MaxPoolResult maxpool_forward(const Tensor& input, std::size_t window) {
    if (input.rank() != 3) {
        throw ArgumentError("maxpool: expected a [C x H x W] input");
    }
    const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
    if (window < 2 || h % window != 0 || w % window != 0) {
        throw ArgumentError("maxpool: extents must be divisible by the window");
    }
    const std::size_t oh = h / window, ow = w / window;
    MaxPoolResult res{Tensor({c, oh, ow}), {}};
    res.argmax.resize(c * oh * ow);
    std::size_t out_i = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                for (std::size_t dy = 0; dy < window; ++dy) {
                    for (std::size_t dx = 0; dx < window; ++dx) {
                        const std::size_t idx =
                            (ci * h + oy * window + dy) * w + ox * window + dx;
                        if (input[idx] > best) {
                            best = input[idx];
                            best_idx = idx;
                        }
                    }
                }
                res.output[out_i] = best;
                res.argmax[out_i] = best_idx;
                ++out_i;
            }
        }
    }
    return res;
}

Tensor maxpool_backward(const std::vector<std::size_t>& argmax, const Tensor& grad_out,
                        const std::vector<std::size_t>& input_shape) {
    if (argmax.size() != grad_out.size()) {
        throw ArgumentError("maxpool_backward: argmax and gradient sizes differ");
    }
    Tensor din(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= din.size()) {
            throw ArgumentError("maxpool_backward: argmax index out of range");
        }
        din[argmax[i]] += grad_out[i];
    }
    return din;
}

Tensor relu_forward(const Tensor& t) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = t[i] > 0.0 ? t[i] : 0.0;
    }
    return out;
}

Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
    if (x.rank() != 1 || weights.rank() != 2 || bias.rank() != 1) {
        throw ArgumentError("fc: expected x [in], weights [out x in], bias [out]");
    }
    const std::size_t out_n = weights.extent(0), in_n = weights.extent(1);
    if (x.extent(0) != in_n || bias.extent(0) != out_n) {
        throw ArgumentError("fc: shape mismatch");
    }
    Tensor out({out_n});
    for (std::size_t o = 0; o < out_n; ++o) {
        double acc = bias[o];
        const double* row = weights.data() + o * in_n;
        for (std::size_t i = 0; i < in_n; ++i) {
            acc += row[i] * x[i];
        }
        out[o] = acc;
    }
    return out;
}

std::pair<LossValue, Tensor> softmax_cross_entropy(const Tensor& logits, int label) {
    if (logits.rank() != 1 || logits.extent(0) != 2) {
        throw ArgumentError("softmax_cross_entropy: expected 2 logits");
    }
    if (label != 0 && label != 1) {
        throw ArgumentError("softmax_cross_entropy: label must be 0 or 1");
    }
    ensure_finite(logits, "softmax_cross_entropy");
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    LossValue loss;
    loss.logits = logits;
    loss.probabilities = Tensor({2}, {e0 / z, e1 / z});
    loss.value = -(logits[label] - m) + std::log(z);
    Tensor grad({2}, {loss.probabilities[0], loss.probabilities[1]});
    grad[label] -= 1.0;
    return {std::move(loss), std::move(grad)};
}

namespace {

struct ForwardTrace {
    // inputs[i] is what layer i consumed; inputs.back() is the logits.
    std::vector<Tensor> inputs;
    // per-pool argmax tables, in layer order
    std::vector<std::vector<std::size_t>> pool_argmax;
};

ForwardTrace run_forward(const Model& model, const Tensor& x) {
    const auto& in_shape = model.input_shape();
    if (x.shape() != std::vector<std::size_t>{in_shape.channels, in_shape.height, in_shape.width}) {
        throw ArgumentError("forward: input does not match the model input shape");
    }
    ForwardTrace trace;
    Tensor cur = x;
    for (std::size_t li = 0; li < model.layers().size(); ++li) {
        trace.inputs.push_back(cur);
        const auto& layer = model.layers()[li];
        const auto& p = model.params()[li];
        if (std::get_if<Conv2dSpec>(&layer)) {
            cur = conv2d_forward(cur, p.weights, p.bias);
        } else if (std::get_if<ReluSpec>(&layer)) {
            cur = relu_forward(cur);
        } else if (const auto* pool = std::get_if<MaxPoolSpec>(&layer)) {
            MaxPoolResult r = maxpool_forward(cur, pool->window);
            trace.pool_argmax.push_back(std::move(r.argmax));
            cur = std::move(r.output);
        } else if (std::get_if<FlattenSpec>(&layer)) {
            cur = Tensor({cur.size()}, cur.values());
        } else if (std::get_if<FcSpec>(&layer)) {
            cur = fc_forward(cur, p.weights, p.bias);
        }
    }
    trace.inputs.push_back(std::move(cur));
    return trace;
}

} // namespace

LossValue forward_loss(const Model& model, const Tensor& x, int label) {
    ForwardTrace trace = run_forward(model, x);
    return softmax_cross_entropy(trace.inputs.back(), label).first;
}

BackwardResult backward(const Model& model, const Tensor& x, int label) {
    ForwardTrace trace = run_forward(model, x);
    auto [loss, grad] = softmax_cross_entropy(trace.inputs.back(), label);

    BackwardResult res;
    res.loss = std::move(loss);
    res.param_grads.resize(model.layers().size());

    std::size_t pool_cursor = trace.pool_argmax.size();
    for (std::size_t li = model.layers().size(); li-- > 0;) {
        const auto& layer = model.layers()[li];
        const auto& p = model.params()[li];
        const Tensor& in = trace.inputs[li];
        if (const auto* conv = std::get_if<Conv2dSpec>(&layer)) {
            const std::size_t c = in.extent(0), h = in.extent(1), w = in.extent(2);
            const std::size_t f = conv->out_channels, k = conv->kernel;
            const std::size_t oh = h - k + 1, ow = w - k + 1;
            LayerParams g;
            g.weights = Tensor(p.weights.shape());
            g.bias = Tensor(p.bias.shape());
            Tensor din(in.shape());
            for (std::size_t fi = 0; fi < f; ++fi) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const double go = grad.at3(fi, oy, ox);
                        if (go == 0.0) continue;
                        g.bias[fi] += go;
                        for (std::size_t ci = 0; ci < c; ++ci) {
                            for (std::size_t ky = 0; ky < k; ++ky) {
                                const double* in_row = in.data() + (ci * h + oy + ky) * w + ox;
                                double* gw_row = g.weights.data() + ((fi * c + ci) * k + ky) * k;
                                double* di_row = din.data() + (ci * h + oy + ky) * w + ox;
                                const double* k_row =
                                    p.weights.data() + ((fi * c + ci) * k + ky) * k;
                                for (std::size_t kx = 0; kx < k; ++kx) {
                                    gw_row[kx] += go * in_row[kx];
                                    di_row[kx] += go * k_row[kx];
                                }
                            }
                        }
                    }
                }
            }
            res.param_grads[li] = std::move(g);
            grad = std::move(din);
        } else if (std::get_if<ReluSpec>(&layer)) {
            Tensor din(in.shape());
            for (std::size_t i = 0; i < in.size(); ++i) {
                din[i] = in[i] > 0.0 ? grad[i] : 0.0;
            }
            grad = std::move(din);
        } else if (std::get_if<MaxPoolSpec>(&layer)) {
            --pool_cursor;
            grad = maxpool_backward(trace.pool_argmax[pool_cursor], grad, in.shape());
        } else if (std::get_if<FlattenSpec>(&layer)) {
            grad = Tensor(in.shape(), grad.values());
        } else if (std::get_if<FcSpec>(&layer)) {
            const std::size_t out_n = p.weights.extent(0), in_n = p.weights.extent(1);
            LayerParams g;
            g.weights = Tensor(p.weights.shape());
            g.bias = grad;
            Tensor din({in_n});
            for (std::size_t o = 0; o < out_n; ++o) {
                const double go = grad[o];
                const double* row = p.weights.data() + o * in_n;
                double* gw_row = g.weights.data() + o * in_n;
                for (std::size_t i = 0; i < in_n; ++i) {
                    gw_row[i] = go * in[i];
                    din[i] += go * row[i];
                }
            }
            res.param_grads[li] = std::move(g);
            grad = std::move(din);
        }
    }
    res.input_grad = std::move(grad);
    return res;
}

void sgd_step(std::vector<LayerParams>& params, const std::vector<LayerParams>& grads,
              double lr) {
    if (params.size() != grads.size()) {
        throw ArgumentError("sgd_step: layer count mismatch");
    }
    for (std::size_t li = 0; li < params.size(); ++li) {
        auto& p = params[li];
        const auto& g = grads[li];
        if (p.empty() && g.empty()) continue;
        if (!p.weights.same_shape(g.weights) || !p.bias.same_shape(g.bias)) {
            throw ArgumentError("sgd_step: gradient shape mismatch at layer " +
                                std::to_string(li));
        }
        for (std::size_t i = 0; i < p.weights.size(); ++i) {
            p.weights[i] -= lr * g.weights[i];
        }
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
            p.bias[i] -= lr * g.bias[i];
        }
    }
}

std::vector<EpochStats> train(Model& model, const std::vector<LabeledImage>& dataset,
                              const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) {
        throw ArgumentError("train: dataset is empty");
    }
    const auto& in_shape = model.input_shape();
    const std::vector<std::size_t> expected = {in_shape.channels, in_shape.height,
                                               in_shape.width};
    for (const auto& item : dataset) {
        if (item.pixels.shape() != expected) {
            throw ArgumentError("train: image '" + item.id +
                                "' does not match the model input shape");
        }
    }

    // The seed owns both init and shuffling; the incoming parameter values
    // are irrelevant to the result.
    SeededRng rng(cfg.seed);
    model.initialize_params(rng.next_u64());

    std::vector<EpochStats> history;
    history.reserve(cfg.epochs);
    const std::size_t n = dataset.size();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(rng, n);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t pos = 0;
        while (pos < n) {
            const std::size_t batch_n = std::min(cfg.batch_size, n - pos);
            std::vector<LayerParams> batch_grads;
            for (std::size_t b = 0; b < batch_n; ++b) {
                const auto& item = dataset[order[pos + b]];
                BackwardResult r = backward(model, item.pixels, item.label);
                loss_sum += r.loss.value;
                const int pred =
                    r.loss.probabilities[1] > r.loss.probabilities[0] ? 1 : 0;
                if (pred == item.label) ++correct;
                if (batch_grads.empty()) {
                    batch_grads = std::move(r.param_grads);
                } else {
                    for (std::size_t li = 0; li < batch_grads.size(); ++li) {
                        auto& acc = batch_grads[li];
                        const auto& g = r.param_grads[li];
                        for (std::size_t i = 0; i < acc.weights.size(); ++i) {
                            acc.weights[i] += g.weights[i];
                        }
                        for (std::size_t i = 0; i < acc.bias.size(); ++i) {
                            acc.bias[i] += g.bias[i];
                        }
                    }
                }
            }
            const double scale = 1.0 / static_cast<double>(batch_n);
            for (auto& g : batch_grads) {
                for (double& v : g.weights.values()) v *= scale;
                for (double& v : g.bias.values()) v *= scale;
            }
            sgd_step(model.mutable_params(), batch_grads, cfg.learning_rate);
            pos += batch_n;
        }
        history.push_back(EpochStats{loss_sum / static_cast<double>(n),
                                     static_cast<double>(correct) / static_cast<double>(n)});
    }
    return history;
}

Prediction predict(const Model& model, const Tensor& x) {
    ForwardTrace trace = run_forward(model, x);
    const auto [loss, grad] = softmax_cross_entropy(trace.inputs.back(), 0);
    (void)grad;
    Prediction p;
    p.label = loss.probabilities[1] > loss.probabilities[0] ? 1 : 0;
    p.confidence = loss.probabilities[p.label];
    return p;
}

} // namespace fgsmbench
