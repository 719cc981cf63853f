// Finite-difference verification of the reverse-mode gradients, parameter
// by parameter and pixel by pixel, on small models. The acceptance suite
// runs the wider battery; this keeps a fast smoke version in the unit run.
#include <doctest.h>

#include <cmath>

#include "core/nn.hpp"
#include "oracles.hpp"

using namespace fgsmbench;

namespace {

constexpr double kStep = 1e-5;
constexpr double kRelTol = 1e-4;
constexpr double kAbsTiny = 1e-6;
constexpr double kAbsTol = 1e-7;

Model gradcheck_model(std::uint64_t seed) {
    std::vector<LayerSpec> layers = {
        Conv2dSpec{1, 2, 5}, ReluSpec{}, MaxPoolSpec{2}, FlattenSpec{},
        FcSpec{2 * 4 * 4, 8}, ReluSpec{}, FcSpec{8, 2},
    };
    return Model(Shape3{1, 12, 12}, std::move(layers), seed);
}

struct CheckCounts {
    std::size_t checked = 0;
    std::size_t failed = 0;
};

// Checks d loss / d cell for every cell in tensor `t` (a parameter tensor of
// `model` or the input image) against central differences.
void check_tensor(const Model& model, Tensor& t, const Tensor& x, int label,
                  CheckCounts& counts) {
    const auto loss_fn = [&] { return forward_loss(model, x, label).value; };
    const BackwardResult analytic = backward(model, x, label);
    // Resolve which gradient tensor corresponds to `t`.
    const Tensor* grad = nullptr;
    if (&t == &x) {
        grad = &analytic.input_grad;
    } else {
        for (std::size_t li = 0; li < model.params().size(); ++li) {
            if (&model.params()[li].weights == &t) grad = &analytic.param_grads[li].weights;
            if (&model.params()[li].bias == &t) grad = &analytic.param_grads[li].bias;
        }
    }
    REQUIRE(grad != nullptr);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double numeric = oracles::central_difference(loss_fn, t[i], kStep);
        ++counts.checked;
        if (!oracles::grads_match((*grad)[i], numeric, kRelTol, kAbsTiny, kAbsTol)) {
            ++counts.failed;
        }
    }
}

} // namespace

TEST_CASE("parameter and input gradients match central finite differences") {
    SeededRng data_rng(404);
    CheckCounts counts;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Model model = gradcheck_model(1000 + seed);
        Tensor x = rng_uniform(data_rng, {1, 12, 12}, 0.05, 0.95);
        const int label = static_cast<int>(data_rng.next_index(2));

        for (auto& p : model.mutable_params()) {
            if (p.empty()) continue;
            check_tensor(model, p.weights, x, label, counts);
            check_tensor(model, p.bias, x, label, counts);
        }
        check_tensor(model, x, x, label, counts);
    }
    CHECK(counts.failed == 0);
    CHECK(counts.checked > 1000);
}
