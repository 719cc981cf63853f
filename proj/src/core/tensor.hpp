#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "error.hpp"

namespace fgsmbench {

/// Dense n-dimensional array of doubles, row-major.
///
/// Tensors are plain values: copyable, movable, and immutable by convention
/// once returned from an operation. Sharing a tensor across threads for
/// reading is safe; nothing here mutates through const.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor. Every extent must be >= 1.
    explicit Tensor(std::vector<std::size_t> shape);

    /// Tensor over explicit values; values.size() must equal the product
    /// of the extents.
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor full(std::vector<std::size_t> shape, double value);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const;
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    // Indexed access for the common ranks.
    double& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& at3(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double at3(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double& at4(std::size_t f, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((f * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    double at4(std::size_t f, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((f * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Throws ArgumentError if any element of t is NaN or infinite.
void ensure_finite(const Tensor& t, const char* context);

/// Elementwise sign: -1, 0 or +1, with sign(0) = 0.
Tensor sign(const Tensor& t);

/// Elementwise clamp into [lo, hi]. lo > hi is an ArgumentError.
Tensor clamp(const Tensor& t, double lo, double hi);

/// Matrix product of a [m x k] and b [k x n]. Result is checked finite.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Deterministic pseudo-random generator (xoshiro256++ seeded via
/// splitmix64). The raw u64 stream and the [0,1) doubles derived from it
/// are integer arithmetic only, so identical seeds give identical
/// sequences on every platform. Single consumer: do not draw from one
/// instance on two threads.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_unit();

    /// Uniform double in [lo, hi). lo >= hi is an ArgumentError.
    double next_uniform(double lo, double hi);

    /// Normal deviate via Box-Muller. stddev <= 0 is an ArgumentError.
    double next_normal(double mean, double stddev);

    /// Uniform index in [0, n). n = 0 is an ArgumentError.
    std::size_t next_index(std::size_t n);

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

Tensor rng_uniform(SeededRng& rng, std::vector<std::size_t> shape, double lo, double hi);
Tensor rng_normal(SeededRng& rng, std::vector<std::size_t> shape, double mean, double stddev);

/// Fisher-Yates shuffle of [0, n) driven by rng.
std::vector<std::size_t> shuffled_indices(SeededRng& rng, std::size_t n);

} // namespace fgsmbench
