#include "metrics.hpp"

#include <cmath>

namespace fgsmbench {

namespace {

// Accepts [H x W] or [1 x H x W]; returns (H, W).
std::pair<std::size_t, std::size_t> image_extents(const Tensor& t, const char* which) {
    if (t.rank() == 2) {
        return {t.extent(0), t.extent(1)};
    }
    if (t.rank() == 3 && t.extent(0) == 1) {
        return {t.extent(1), t.extent(2)};
    }
    throw ArgumentError(std::string("ssim: ") + which +
                        " must be [H x W] or [1 x H x W]");
}

} // namespace

SsimReport ssim(const Tensor& x, const Tensor& y, std::size_t window,
                double dynamic_range, bool keep_windows) {
    const auto [h, w] = image_extents(x, "first image");
    const auto [h2, w2] = image_extents(y, "second image");
    if (h != h2 || w != w2) {
        throw ArgumentError("ssim: images must have the same extents");
    }
    if (window == 0 || window > h || window > w) {
        throw ArgumentError("ssim: window must be positive and fit inside the image");
    }
    if (!(dynamic_range > 0.0)) {
        throw ArgumentError("ssim: dynamic range must be positive");
    }
    ensure_finite(x, "ssim");
    ensure_finite(y, "ssim");

    SsimReport report;
    report.window_size = window;
    report.c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    report.c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const double c1 = report.c1, c2 = report.c2;
    const double c3 = c2 / 2.0;
    if (keep_windows) {
        report.per_window.emplace();
        report.per_window->reserve((h - window + 1) * (w - window + 1));
    }

    const double* xs = x.data();
    const double* ys = y.data();
    const double inv_n = 1.0 / static_cast<double>(window * window);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t wy = 0; wy + window <= h; ++wy) {
        for (std::size_t wx = 0; wx + window <= w; ++wx) {
            double sx = 0.0, sy = 0.0;
            for (std::size_t dy = 0; dy < window; ++dy) {
                const double* xr = xs + (wy + dy) * w + wx;
                const double* yr = ys + (wy + dy) * w + wx;
                for (std::size_t dx = 0; dx < window; ++dx) {
                    sx += xr[dx];
                    sy += yr[dx];
                }
            }
            const double mx = sx * inv_n;
            const double my = sy * inv_n;
            // Centered (two-pass) biased moments: a constant window yields a
            // variance of exactly zero instead of an E[x^2]-mu^2 residual.
            double vx = 0.0, vy = 0.0, cov = 0.0;
            for (std::size_t dy = 0; dy < window; ++dy) {
                const double* xr = xs + (wy + dy) * w + wx;
                const double* yr = ys + (wy + dy) * w + wx;
                for (std::size_t dx = 0; dx < window; ++dx) {
                    const double ax = xr[dx] - mx;
                    const double ay = yr[dx] - my;
                    vx += ax * ax;
                    vy += ay * ay;
                    cov += ax * ay;
                }
            }
            vx *= inv_n;
            vy *= inv_n;
            cov *= inv_n;
            const double value = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                                 ((mx * mx + my * my + c1) * (vx + vy + c2));
            total += value;
            ++count;
            if (keep_windows) {
                // Rounding can push the biased variances a hair below zero.
                const double sdx = std::sqrt(vx > 0.0 ? vx : 0.0);
                const double sdy = std::sqrt(vy > 0.0 ? vy : 0.0);
                SsimWindowStats stats;
                stats.luminance = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
                stats.contrast = (2.0 * sdx * sdy + c2) / (vx + vy + c2);
                stats.structure = (cov + c3) / (sdx * sdy + c3);
                stats.ssim = value;
                report.per_window->push_back(stats);
            }
        }
    }
    report.mean_ssim = total / static_cast<double>(count);
    return report;
}

double accuracy(const std::vector<Prediction>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) {
        throw ArgumentError("accuracy: empty prediction list");
    }
    if (predictions.size() != labels.size()) {
        throw ArgumentError("accuracy: prediction and label counts differ");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].label == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

} // namespace fgsmbench
