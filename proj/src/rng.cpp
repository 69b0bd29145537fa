#include "hkf/rng.hpp"

#include <cmath>

namespace hkf {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return mix64(base_seed ^ mix64(run_index));
}

std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::string_view label) {
  // FNV-1a over the label, then mixed with the run seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(run_seed ^ h);
}

double RandomStream::next_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_ = v * f;
  has_cached_ = true;
  return u * f;
}

Vec RandomStream::next_normal_vec(int n) {
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = next_normal();
  return out;
}

}  // namespace hkf
