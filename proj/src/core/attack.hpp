#pragma once

#include <functional>
#include <vector>

#include "data.hpp"
#include "nn.hpp"

namespace fgsmbench {

/// The perturbation budget is an L-infinity bound; this is fixed, not a
/// configuration choice.
inline constexpr const char* kNormOrder = "infinity";

struct AttackConfig {
    std::vector<double> epsilons;
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    bool clip = true;   // disable for unclipped x + delta

    /// Rejects an empty epsilon list, epsilons outside [0,1], and
    /// clip_lo > clip_hi.
    void validate() const;
};

struct AdversarialSample {
    Tensor original;
    Tensor perturbed;
    double epsilon = 0.0;
    int true_label = 0;
    Prediction clean_prediction;
    Prediction adv_prediction;
    bool flipped = false;  // clean was right, adversarial is wrong
};

/// Single-step gradient-sign attack:
///   perturbed = clamp(x + eps * sign(dL/dx), clip_lo, clip_hi)
/// with the loss gradient taken at the true label. eps = 0 returns the
/// input bit for bit. The returned sample always satisfies
/// max|perturbed - original| <= eps and, when clipping is on, stays inside
/// [clip_lo, clip_hi]. Pure given an immutable model; safe to call
/// concurrently for different inputs.
AdversarialSample fgsm(const Model& model, const Tensor& x, int true_label, double eps,
                       double clip_lo = 0.0, double clip_hi = 1.0, bool clip = true);

struct SweepRecord {
    double epsilon = 0.0;
    double accuracy = 0.0;    // adversarial predictions vs true labels
    double mean_ssim = 0.0;   // mean over (original, perturbed) pairs
    std::size_t n_samples = 0;
};

/// Called once per generated sample, in (epsilon, sample) order.
using SampleSink =
    std::function<void(std::size_t epsilon_index, std::size_t sample_index,
                       const AdversarialSample&)>;

/// Runs fgsm over the whole test set for every epsilon in cfg, in input
/// order, and aggregates accuracy and mean SSIM per epsilon. Entirely
/// deterministic; an epsilon of 0 reproduces the clean evaluation.
std::vector<SweepRecord> epsilon_sweep(const Model& model,
                                       const std::vector<LabeledImage>& testset,
                                       const AttackConfig& cfg,
                                       std::size_t ssim_window = 8,
                                       const SampleSink& sink = {});

} // namespace fgsmbench
