#include <doctest.h>

#include <cmath>

#include "core/metrics.hpp"
#include "oracles.hpp"

using namespace fgsmbench;

TEST_CASE("ssim of an image with itself is 1") {
    SeededRng rng(21);
    for (int rep = 0; rep < 10; ++rep) {
        const Tensor img = rng_uniform(rng, {12, 12}, 0.0, 1.0);
        const SsimReport rep_self = ssim(img, img, 4);
        CHECK(std::fabs(rep_self.mean_ssim - 1.0) <= 1e-12);
    }
}

TEST_CASE("ssim is symmetric") {
    SeededRng rng(22);
    for (int rep = 0; rep < 10; ++rep) {
        const Tensor a = rng_uniform(rng, {10, 14}, 0.0, 1.0);
        const Tensor b = rng_uniform(rng, {10, 14}, 0.0, 1.0);
        CHECK(std::fabs(ssim(a, b, 5).mean_ssim - ssim(b, a, 5).mean_ssim) <= 1e-12);
    }
}

TEST_CASE("ssim of two constant images matches the closed form") {
    const double a = 0.3, b = 0.8;
    const Tensor ia = Tensor::full({9, 9}, a);
    const Tensor ib = Tensor::full({9, 9}, b);
    const SsimReport rep = ssim(ia, ib, 8);
    const double c1 = 0.01 * 0.01;
    // Zero variance collapses the contrast/structure factor to C2/C2 = 1.
    const double expected = (2.0 * a * b + c1) / (a * a + b * b + c1);
    CHECK(std::fabs(rep.mean_ssim - expected) <= 1e-12);
}

TEST_CASE("ssim matches the loop-nest statistics oracle") {
    SeededRng rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        const Tensor a = rng_uniform(rng, {16, 16}, 0.0, 1.0);
        const Tensor b = rng_uniform(rng, {16, 16}, 0.0, 1.0);
        const double got = ssim(a, b, 8).mean_ssim;
        const double want = oracles::ssim_naive(a, b, 8, 1.0);
        CHECK(std::fabs(got - want) <= 1e-10);
    }
}

TEST_CASE("per-window components multiply back to the ssim value") {
    SeededRng rng(24);
    const Tensor a = rng_uniform(rng, {12, 12}, 0.0, 1.0);
    const Tensor b = rng_uniform(rng, {12, 12}, 0.0, 1.0);
    const SsimReport rep = ssim(a, b, 6, 1.0, true);
    REQUIRE(rep.per_window.has_value());
    CHECK(rep.per_window->size() == 7 * 7);
    double total = 0.0;
    for (const auto& w : *rep.per_window) {
        CHECK(std::fabs(w.luminance * w.contrast * w.structure - w.ssim) <= 1e-12);
        CHECK(w.ssim >= -1.0 - 1e-12);
        CHECK(w.ssim <= 1.0 + 1e-12);
        total += w.ssim;
    }
    CHECK(std::fabs(total / static_cast<double>(rep.per_window->size()) - rep.mean_ssim) <=
          1e-12);
}

TEST_CASE("ssim argument validation") {
    const Tensor a = Tensor::full({8, 8}, 0.5);
    CHECK_THROWS_AS(ssim(a, Tensor::full({8, 9}, 0.5), 4), ArgumentError);
    CHECK_THROWS_AS(ssim(a, a, 9), ArgumentError);
    CHECK_THROWS_AS(ssim(a, a, 0), ArgumentError);
    CHECK_THROWS_AS(ssim(a, a, 4, 0.0), ArgumentError);
    // A [1 x H x W] tensor is accepted and equivalent to [H x W].
    const Tensor squeezed({1, 8, 8}, a.values());
    CHECK(std::fabs(ssim(squeezed, a, 4).mean_ssim - 1.0) <= 1e-12);
}

TEST_CASE("accuracy counts exact label matches") {
    const auto P = [](int label) { return Prediction{label, 1.0}; };
    CHECK(accuracy({P(0), P(1), P(1)}, {0, 1, 1}) == 1.0);
    CHECK(accuracy({P(0), P(0), P(1), P(0)}, {0, 1, 1, 0}) == 0.75);

    // Counting oracle on random label sets: accuracy == (TP + TN) / N.
    SeededRng rng(25);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Prediction> preds;
        std::vector<int> labels;
        std::size_t tp = 0, tn = 0;
        const std::size_t n = 10 + rng.next_index(50);
        for (std::size_t i = 0; i < n; ++i) {
            const int pred = static_cast<int>(rng.next_index(2));
            const int label = static_cast<int>(rng.next_index(2));
            preds.push_back(P(pred));
            labels.push_back(label);
            if (pred == 1 && label == 1) ++tp;
            if (pred == 0 && label == 0) ++tn;
        }
        const double want = static_cast<double>(tp + tn) / static_cast<double>(n);
        CHECK(accuracy(preds, labels) == want);
    }

    CHECK_THROWS_AS(accuracy({}, {}), ArgumentError);
    CHECK_THROWS_AS(accuracy({P(0)}, {0, 1}), ArgumentError);
}
