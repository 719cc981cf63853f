#include <doctest.h>

#include <cmath>

#include "core/attack.hpp"
#include "core/data.hpp"
#include "core/metrics.hpp"
#include "oracles.hpp"

using namespace fgsmbench;

namespace {

Model attack_model(std::uint64_t seed) {
    std::vector<LayerSpec> layers = {
        Conv2dSpec{1, 2, 5}, ReluSpec{}, MaxPoolSpec{2}, FlattenSpec{},
        FcSpec{2 * 4 * 4, 8}, ReluSpec{}, FcSpec{8, 2},
    };
    return Model(Shape3{1, 12, 12}, std::move(layers), seed);
}

} // namespace

TEST_CASE("fgsm with eps 0 returns the input bit-exactly") {
    const Model model = attack_model(50);
    SeededRng rng(51);
    const Tensor x = rng_uniform(rng, {1, 12, 12}, 0.0, 1.0);
    const AdversarialSample s = fgsm(model, x, 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(s.perturbed[i] == x[i]);
    }
    CHECK(s.adv_prediction.label == s.clean_prediction.label);
    CHECK_FALSE(s.flipped);
}

TEST_CASE("fgsm respects the L-infinity budget and pixel range") {
    const Model model = attack_model(52);
    SeededRng rng(53);
    for (const double eps : {0.01, 0.1, 0.3, 1.0}) {
        const Tensor x = rng_uniform(rng, {1, 12, 12}, 0.0, 1.0);
        const AdversarialSample s = fgsm(model, x, 0, eps);
        double max_delta = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            max_delta = std::max(max_delta, std::fabs(s.perturbed[i] - x[i]));
            CHECK(s.perturbed[i] >= 0.0);
            CHECK(s.perturbed[i] <= 1.0);
        }
        CHECK(max_delta <= eps + 1e-12);
    }
    CHECK_THROWS_AS(fgsm(model, Tensor::full({1, 12, 12}, 0.5), 0, 1.5), ArgumentError);
    CHECK_THROWS_AS(fgsm(model, Tensor::full({1, 12, 12}, 2.0), 0, 0.1), ArgumentError);
}

TEST_CASE("fgsm moves exactly eps where the gradient is nonzero and unclipped") {
    const Model model = attack_model(54);
    SeededRng rng(55);
    const Tensor x = rng_uniform(rng, {1, 12, 12}, 0.3, 0.7);
    const double eps = 0.05;  // cannot hit the [0,1] walls from [0.3, 0.7]
    const BackwardResult grads = backward(model, x, 1);
    const AdversarialSample s = fgsm(model, x, 1, eps);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (grads.input_grad[i] != 0.0) {
            CHECK(std::fabs(std::fabs(s.perturbed[i] - x[i]) - eps) <= 1e-12);
        } else {
            CHECK(s.perturbed[i] == x[i]);
        }
    }
}

TEST_CASE("fgsm on a single-fc model matches the hand chain rule") {
    // Two-pixel input, identity-free stack: flatten -> fc(2,2) with known
    // weights. Softmax-CE gradient wrt logits is (p - onehot), so
    // d loss / d x = W^T (p - onehot).
    std::vector<LayerSpec> layers = {FlattenSpec{}, FcSpec{2, 2}};
    Model model(Shape3{1, 1, 2}, std::move(layers), 0);
    model.set_all_params_zero();
    auto& fc = model.mutable_params()[1];
    // W = [[1.0, -2.0], [0.5, 0.25]], b = [0.1, -0.1]
    fc.weights = Tensor({2, 2}, {1.0, -2.0, 0.5, 0.25});
    fc.bias = Tensor({2}, {0.1, -0.1});

    const Tensor x({1, 1, 2}, {0.6, 0.4});
    const int label = 0;
    // Hand forward: z0 = 0.6 - 0.8 + 0.1 = -0.1; z1 = 0.3 + 0.1 - 0.1 = 0.3.
    const double z0 = -0.1, z1 = 0.3;
    const double m = std::max(z0, z1);
    const double p0 = std::exp(z0 - m) / (std::exp(z0 - m) + std::exp(z1 - m));
    const double p1 = 1.0 - p0;
    // dL/dz = (p0 - 1, p1); dL/dx = W^T dL/dz.
    const double g0 = 1.0 * (p0 - 1.0) + 0.5 * p1;
    const double g1 = -2.0 * (p0 - 1.0) + 0.25 * p1;

    const BackwardResult r = backward(model, x, label);
    CHECK(r.input_grad[0] == doctest::Approx(g0).epsilon(1e-12));
    CHECK(r.input_grad[1] == doctest::Approx(g1).epsilon(1e-12));

    const double eps = 0.125;
    const AdversarialSample s = fgsm(model, x, label, eps);
    const double want0 = 0.6 + eps * (g0 > 0 ? 1.0 : g0 < 0 ? -1.0 : 0.0);
    const double want1 = 0.4 + eps * (g1 > 0 ? 1.0 : g1 < 0 ? -1.0 : 0.0);
    CHECK(s.perturbed[0] == doctest::Approx(want0).epsilon(1e-15));
    CHECK(s.perturbed[1] == doctest::Approx(want1).epsilon(1e-15));
}

TEST_CASE("fgsm without clipping applies the raw signed step") {
    const Model model = attack_model(62);
    SeededRng rng(63);
    const Tensor x = rng_uniform(rng, {1, 12, 12}, 0.0, 1.0);
    const double eps = 0.4;
    const BackwardResult grads = backward(model, x, 1);
    const AdversarialSample s = fgsm(model, x, 1, eps, 0.0, 1.0, /*clip=*/false);
    bool escaped_unit_range = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double g = grads.input_grad[i];
        const double want = x[i] + eps * (g > 0 ? 1.0 : g < 0 ? -1.0 : 0.0);
        CHECK(s.perturbed[i] == want);
        escaped_unit_range = escaped_unit_range || s.perturbed[i] < 0.0 || s.perturbed[i] > 1.0;
    }
    // With a 0.4 step from [0,1) values, some pixel leaves the unit range,
    // which is exactly what disabling the clip permits.
    CHECK(escaped_unit_range);
}

TEST_CASE("loss does not decrease along the sign direction at first order") {
    const Model model = attack_model(56);
    SeededRng rng(57);
    for (int rep = 0; rep < 5; ++rep) {
        const Tensor x = rng_uniform(rng, {1, 12, 12}, 0.1, 0.9);
        const int label = static_cast<int>(rng.next_index(2));
        const BackwardResult grads = backward(model, x, label);
        const Tensor dir = sign(grads.input_grad);
        const double h = 1e-6;
        Tensor hi = x, lo = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            hi[i] += h * dir[i];
            lo[i] -= h * dir[i];
        }
        const double derivative =
            (forward_loss(model, hi, label).value - forward_loss(model, lo, label).value) /
            (2.0 * h);
        CHECK(derivative >= -1e-8);
        // It should also equal the sum of gradient magnitudes.
        double l1 = 0.0;
        for (std::size_t i = 0; i < grads.input_grad.size(); ++i) {
            l1 += std::fabs(grads.input_grad[i]);
        }
        CHECK(derivative == doctest::Approx(l1).epsilon(1e-4));
    }
}

TEST_CASE("epsilon sweep aggregates per epsilon in input order") {
    const Model model = attack_model(58);
    const Dataset ds = synth_dataset(12, 12, 59);
    AttackConfig cfg;
    cfg.epsilons = {0.0, 0.1, 0.1, 0.3};

    const auto records = epsilon_sweep(model, ds.items, cfg, 6);
    REQUIRE(records.size() == 4);
    CHECK(records[0].epsilon == 0.0);
    CHECK(std::fabs(records[0].mean_ssim - 1.0) <= 1e-12);
    CHECK(records[0].n_samples == ds.items.size());

    // Clean accuracy at eps 0 equals a direct evaluation.
    std::vector<Prediction> preds;
    std::vector<int> labels;
    for (const auto& item : ds.items) {
        preds.push_back(predict(model, item.pixels));
        labels.push_back(item.label);
    }
    CHECK(records[0].accuracy == accuracy(preds, labels));

    // Duplicate epsilons give identical records.
    CHECK(records[1].accuracy == records[2].accuracy);
    CHECK(records[1].mean_ssim == records[2].mean_ssim);

    SUBCASE("sample-by-sample recomputation matches the sweep") {
        for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
            std::size_t correct = 0;
            double ssim_total = 0.0;
            for (const auto& item : ds.items) {
                const AdversarialSample s =
                    fgsm(model, item.pixels, item.label, cfg.epsilons[ei]);
                if (s.adv_prediction.label == item.label) ++correct;
                ssim_total += ssim(s.original, s.perturbed, 6).mean_ssim;
            }
            const double want_acc =
                static_cast<double>(correct) / static_cast<double>(ds.items.size());
            const double want_ssim = ssim_total / static_cast<double>(ds.items.size());
            CHECK(records[ei].accuracy == want_acc);
            CHECK(records[ei].mean_ssim == doctest::Approx(want_ssim).epsilon(1e-15));
        }
    }

    SUBCASE("empty test set and empty epsilon list are rejected") {
        CHECK_THROWS_AS(epsilon_sweep(model, {}, cfg, 6), ArgumentError);
        AttackConfig none;
        none.epsilons = {};
        CHECK_THROWS_AS(epsilon_sweep(model, ds.items, none, 6), ArgumentError);
        AttackConfig bad;
        bad.epsilons = {0.5, 1.5};
        CHECK_THROWS_AS(epsilon_sweep(model, ds.items, bad, 6), ArgumentError);
    }
}

TEST_CASE("flipped flag demands a correct clean prediction") {
    const Model model = attack_model(60);
    const Dataset ds = synth_dataset(10, 12, 61);
    for (const auto& item : ds.items) {
        const AdversarialSample s = fgsm(model, item.pixels, item.label, 0.3);
        CHECK(s.flipped == (s.adv_prediction.label != item.label &&
                            s.clean_prediction.label == item.label));
    }
}
