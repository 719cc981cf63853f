#include "attack.hpp"

#include <cmath>

#include "metrics.hpp"

namespace fgsmbench {

void AttackConfig::validate() const {
    if (epsilons.empty()) {
        throw ArgumentError("attack: epsilon list must be nonempty");
    }
    for (double e : epsilons) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw ArgumentError("attack: every epsilon must lie in [0, 1]");
        }
    }
    if (clip && !(clip_lo <= clip_hi)) {
        throw ArgumentError("attack: clip_lo must be <= clip_hi");
    }
}

namespace {

void check_sample_invariants(const AdversarialSample& s, double clip_lo, double clip_hi,
                             bool clip) {
    constexpr double kTol = 1e-12;
    for (std::size_t i = 0; i < s.original.size(); ++i) {
        const double delta = std::fabs(s.perturbed[i] - s.original[i]);
        if (delta > s.epsilon + kTol) {
            throw ArgumentError("fgsm: perturbation exceeded the epsilon budget");
        }
        if (clip && (s.perturbed[i] < clip_lo || s.perturbed[i] > clip_hi)) {
            throw ArgumentError("fgsm: perturbed pixel escaped the clip range");
        }
    }
}

} // namespace

AdversarialSample fgsm(const Model& model, const Tensor& x, int true_label, double eps,
                       double clip_lo, double clip_hi, bool clip) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw ArgumentError("fgsm: eps must lie in [0, 1]");
    }
    if (clip) {
        if (!(clip_lo <= clip_hi)) {
            throw ArgumentError("fgsm: clip_lo must be <= clip_hi");
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < clip_lo || x[i] > clip_hi) {
                throw ArgumentError("fgsm: input lies outside the clip range");
            }
        }
    }

    AdversarialSample sample;
    sample.original = x;
    sample.epsilon = eps;
    sample.true_label = true_label;
    sample.clean_prediction = predict(model, x);

    if (eps == 0.0) {
        // Zero perturbation reproduces the input exactly, by identity
        // rather than by arithmetic.
        sample.perturbed = x;
        sample.adv_prediction = sample.clean_prediction;
    } else {
        BackwardResult grad = backward(model, x, true_label);
        const Tensor direction = sign(grad.input_grad);
        Tensor perturbed(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
            perturbed[i] = x[i] + eps * direction[i];
        }
        sample.perturbed = clip ? clamp(perturbed, clip_lo, clip_hi) : std::move(perturbed);
        sample.adv_prediction = predict(model, sample.perturbed);
    }
    sample.flipped = sample.adv_prediction.label != true_label &&
                     sample.clean_prediction.label == true_label;
    check_sample_invariants(sample, clip_lo, clip_hi, clip);
    return sample;
}

std::vector<SweepRecord> epsilon_sweep(const Model& model,
                                       const std::vector<LabeledImage>& testset,
                                       const AttackConfig& cfg, std::size_t ssim_window,
                                       const SampleSink& sink) {
    cfg.validate();
    if (testset.empty()) {
        throw ArgumentError("epsilon_sweep: test set is empty");
    }
    std::vector<SweepRecord> records;
    records.reserve(cfg.epsilons.size());
    for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
        const double eps = cfg.epsilons[ei];
        SweepRecord rec;
        rec.epsilon = eps;
        rec.n_samples = testset.size();
        std::size_t correct = 0;
        double ssim_total = 0.0;
        for (std::size_t si = 0; si < testset.size(); ++si) {
            const auto& item = testset[si];
            AdversarialSample sample =
                fgsm(model, item.pixels, item.label, eps, cfg.clip_lo, cfg.clip_hi, cfg.clip);
            if (sample.adv_prediction.label == item.label) ++correct;
            ssim_total += ssim(sample.original, sample.perturbed, ssim_window).mean_ssim;
            if (sink) sink(ei, si, sample);
        }
        rec.accuracy = static_cast<double>(correct) / static_cast<double>(testset.size());
        rec.mean_ssim = ssim_total / static_cast<double>(testset.size());
        records.push_back(rec);
    }
    return records;
}

} // namespace fgsmbench
