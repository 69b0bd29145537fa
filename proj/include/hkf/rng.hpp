#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "hkf/types.hpp"

namespace hkf {

// SplitMix64 output function. All seed derivation goes through this so the
// scheme is splittable and order-independent: per-run seeds depend only on
// (base_seed, run_index), per-stream seeds only on (run_seed, label).
std::uint64_t mix64(std::uint64_t z);

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::uint64_t run_index);
std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::string_view label);

// Deterministic Gaussian stream: mt19937_64 uniforms (53-bit mantissa draws)
// fed through the Marsaglia polar transform. One RandomStream per noise
// source, never shared across sources.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53 random bits.
  double next_uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double next_normal();
  Vec next_normal_vec(int n);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Samples N(0, cov) as sqrtm(cov) * e with e standard normal; works for
// singular PSD covariances (zero-noise runs draw and discard nothing —
// the stream always advances by dim(cov) normals per sample).
class GaussianSampler {
 public:
  GaussianSampler() = default;
  explicit GaussianSampler(const Mat& cov) : transform_(symmetric_sqrt(cov)) {}

  Vec sample(RandomStream& rs) const {
    return transform_ * rs.next_normal_vec(static_cast<int>(transform_.rows()));
  }

  const Mat& transform() const { return transform_; }

 private:
  Mat transform_;
};

}  // namespace hkf
