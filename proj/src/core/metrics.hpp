#pragma once

#include <optional>
#include <vector>

#include "nn.hpp"
#include "tensor.hpp"

namespace fgsmbench {

struct SsimWindowStats {
    double luminance;
    double contrast;
    double structure;
    double ssim;
};

struct SsimReport {
    double mean_ssim = 0.0;
    std::optional<std::vector<SsimWindowStats>> per_window;
    std::size_t window_size = 0;
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Structural similarity between two images of identical shape ([H x W] or
/// [1 x H x W]), computed over every stride-1 uniform window of the given
/// size with biased (divide-by-n) statistics:
///
///   ssim_w = (2*mu_x*mu_y + C1)(2*cov_xy + C2)
///            / ((mu_x^2 + mu_y^2 + C1)(var_x + var_y + C2))
///
/// with C1 = (0.01 * L)^2 and C2 = (0.03 * L)^2 for dynamic range L.
/// mean_ssim averages the windows in row-major order. With keep_windows the
/// luminance/contrast/structure components are reported per window, using
/// C3 = C2 / 2 for the structure term.
SsimReport ssim(const Tensor& x, const Tensor& y, std::size_t window = 8,
                double dynamic_range = 1.0, bool keep_windows = false);

/// Fraction of predictions whose label matches. Lengths must agree and be
/// nonzero.
double accuracy(const std::vector<Prediction>& predictions, const std::vector<int>& labels);

} // namespace fgsmbench
