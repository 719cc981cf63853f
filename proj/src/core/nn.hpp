#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "data.hpp"
#include "tensor.hpp"

namespace fgsmbench {

// Layer descriptors. Convolutions are valid (no padding), stride 1;
// pooling windows are disjoint (stride == window).
struct Conv2dSpec {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t kernel = 5;
};
struct ReluSpec {};
struct MaxPoolSpec {
    std::size_t window = 2;
};
struct FlattenSpec {};
struct FcSpec {
    std::size_t in;
    std::size_t out;
};
using LayerSpec = std::variant<Conv2dSpec, ReluSpec, MaxPoolSpec, FlattenSpec, FcSpec>;

/// Weight/bias pair for one layer; both empty for parameterless layers.
struct LayerParams {
    Tensor weights;
    Tensor bias;
    bool empty() const { return weights.size() == 0 && bias.size() == 0; }
};

struct Shape3 {
    std::size_t channels = 1;
    std::size_t height = 0;
    std::size_t width = 0;
    bool operator==(const Shape3&) const = default;
};

/// Shape knobs for the stock two-conv architecture.
struct DefaultArch {
    std::size_t conv1_filters = 6;
    std::size_t conv2_filters = 12;
    std::size_t hidden = 50;
};

/// The classifier: an ordered layer stack plus parameter tensors.
///
/// Construction validates the stack against the input shape and rejects any
/// configuration where an intermediate extent would drop below 1, a pool
/// input extent would be odd, or consecutive shapes disagree. Parameters are
/// Glorot-uniform initialized from the given seed. A constructed model is
/// immutable apart from train(); evaluating it concurrently is safe.
class Model {
public:
    Model(Shape3 input, std::vector<LayerSpec> layers, std::uint64_t init_seed);

    /// conv(5x5) -> relu -> maxpool -> conv(5x5) -> relu -> maxpool ->
    /// flatten -> fc(hidden) -> relu -> fc(2). The flatten width is derived
    /// from the input shape.
    static Model make_default(Shape3 input, const DefaultArch& arch = {},
                              std::uint64_t init_seed = 0);

    const Shape3& input_shape() const { return input_shape_; }
    const std::vector<LayerSpec>& layers() const { return layers_; }
    const std::vector<LayerParams>& params() const { return params_; }
    std::vector<LayerParams>& mutable_params() { return params_; }

    /// Re-draws all parameters (Glorot-uniform weights, zero biases).
    void initialize_params(std::uint64_t seed);
    void set_all_params_zero();

    /// Output shape of every layer for this model's input, input first.
    std::vector<std::vector<std::size_t>> shape_trace() const;

private:
    Shape3 input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<LayerParams> params_;
};

struct LossValue {
    double value = 0.0;       // -log p[label], nonnegative
    Tensor logits;            // [2]
    Tensor probabilities;     // [2], sums to 1
};

struct Prediction {
    int label = 0;            // argmax of probabilities; ties toward 0
    double confidence = 0.0;  // probability of the predicted label
};

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 30;
    std::size_t batch_size = 8;
    std::uint64_t seed = 7;

    void validate() const;
};

struct EpochStats {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

struct BackwardResult {
    std::vector<LayerParams> param_grads;  // one entry per layer
    Tensor input_grad;                     // same shape as the input
    LossValue loss;
};

/// Valid cross-correlation of input [C x H x W] with kernels [F x C x K x K]
/// plus per-filter bias, stride 1.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

struct MaxPoolResult {
    Tensor output;                    // [C x H/w x W/w]
    std::vector<std::size_t> argmax;  // flat input index feeding each output element
};

/// Disjoint-window max pooling. Ties go to the row-major-earliest position.
MaxPoolResult maxpool_forward(const Tensor& input, std::size_t window = 2);

/// Routes every output gradient back to its recorded argmax position; all
/// other positions receive zero.
Tensor maxpool_backward(const std::vector<std::size_t>& argmax, const Tensor& grad_out,
                        const std::vector<std::size_t>& input_shape);

Tensor relu_forward(const Tensor& t);

/// weights [out x in] * x [in] + bias [out].
Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);

/// Numerically stable softmax cross-entropy for two-class logits.
/// Returns the loss and d(loss)/d(logits) = softmax(logits) - onehot(label).
std::pair<LossValue, Tensor> softmax_cross_entropy(const Tensor& logits, int label);

/// Forward pass to the loss only (no gradients).
LossValue forward_loss(const Model& model, const Tensor& x, int label);

/// Reverse-mode gradients of the loss with respect to every parameter and
/// the input itself.
BackwardResult backward(const Model& model, const Tensor& x, int label);

/// p <- p - lr * g, elementwise, for every layer.
void sgd_step(std::vector<LayerParams>& params, const std::vector<LayerParams>& grads,
              double lr);

/// Mini-batch SGD. cfg.seed controls both the parameter initialization and
/// the per-epoch shuffle, so the result is a pure function of
/// (dataset, model architecture, cfg). Returns per-epoch mean loss and
/// accuracy over the training set.
std::vector<EpochStats> train(Model& model, const std::vector<LabeledImage>& dataset,
                              const TrainConfig& cfg);

Prediction predict(const Model& model, const Tensor& x);

} // namespace fgsmbench
