#include "tensor.hpp"

#include <cmath>
#include <string>

namespace fgsmbench {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& shape) {
    if (shape.empty()) {
        throw ArgumentError("tensor shape must have at least one extent");
    }
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) {
            throw ArgumentError("tensor extents must be positive");
        }
        n *= e;
    }
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (checked_element_count(shape_) != data_.size()) {
        throw ArgumentError("tensor value count does not match shape");
    }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ArgumentError("tensor axis out of range");
    }
    return shape_[axis];
}

void ensure_finite(const Tensor& t, const char* context) {
    for (double v : t.values()) {
        if (!std::isfinite(v)) {
            throw ArgumentError(std::string(context) + ": tensor contains a non-finite value");
        }
    }
}

Tensor sign(const Tensor& t) {
    ensure_finite(t, "sign");
    Tensor out(t.shape());
    const double* in = t.data();
    double* o = out.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
        o[i] = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

Tensor clamp(const Tensor& t, double lo, double hi) {
    if (!(lo <= hi)) {
        throw ArgumentError("clamp: lo must be <= hi");
    }
    Tensor out(t.shape());
    const double* in = t.data();
    double* o = out.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
        o[i] = in[i] < lo ? lo : (in[i] > hi ? hi : in[i]);
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ArgumentError("matmul: both operands must be rank-2");
    }
    const std::size_t m = a.extent(0), k = a.extent(1);
    const std::size_t k2 = b.extent(0), n = b.extent(1);
    if (k != k2) {
        throw ArgumentError("matmul: inner extents disagree");
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.at2(i, p);
            for (std::size_t j = 0; j < n; ++j) {
                out.at2(i, j) += av * b.at2(p, j);
            }
        }
    }
    ensure_finite(out, "matmul");
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw ArgumentError("next_uniform: lo must be < hi");
    }
    return lo + (hi - lo) * next_unit();
}

double SeededRng::next_normal(double mean, double stddev) {
    if (!(stddev > 0.0)) {
        throw ArgumentError("next_normal: stddev must be positive");
    }
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return mean + stddev * cached_normal_;
    }
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return mean + stddev * r * std::cos(theta);
}

std::size_t SeededRng::next_index(std::size_t n) {
    if (n == 0) {
        throw ArgumentError("next_index: n must be positive");
    }
    // Multiply-shift mapping of the full 64-bit draw onto [0, n).
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

Tensor rng_uniform(SeededRng& rng, std::vector<std::size_t> shape, double lo, double hi) {
    if (!(lo < hi)) {
        throw ArgumentError("rng_uniform: lo must be < hi");
    }
    Tensor out(std::move(shape));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rng.next_uniform(lo, hi);
    }
    return out;
}

Tensor rng_normal(SeededRng& rng, std::vector<std::size_t> shape, double mean, double stddev) {
    if (!(stddev > 0.0)) {
        throw ArgumentError("rng_normal: stddev must be positive");
    }
    Tensor out(std::move(shape));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = rng.next_normal(mean, stddev);
    }
    return out;
}

std::vector<std::size_t> shuffled_indices(SeededRng& rng, std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.next_index(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

} // namespace fgsmbench
