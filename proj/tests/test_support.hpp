#pragma once

// Small generators for the property tests. Every generator draws from an
// RngStream so failures are reproducible from the printed seed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gaplab/rng.hpp"

namespace gaplab::testing {

inline std::vector<double> random_reals(RngStream& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> x(n);
  for (double& v : x) v = lo + (hi - lo) * rng.uniform();
  return x;
}

/// Small integers in [-k, k]; sums of these collide often, which stresses
/// the window edges.
inline std::vector<double> random_small_ints(RngStream& rng, std::size_t n, int k = 3) {
  std::vector<double> x(n);
  for (double& v : x) v = static_cast<double>(static_cast<int>(rng.below(2 * k + 1)) - k);
  return x;
}

inline std::vector<double> random_unit(RngStream& rng, std::size_t n) {
  std::vector<double> x(n);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& v : x) {
      v = rng.normal();
      norm += v * v;
    }
  }
  norm = std::sqrt(norm);
  for (double& v : x) v /= norm;
  return x;
}

/// Either reals or small integers, chosen at random.
inline std::vector<double> random_mixed(RngStream& rng, std::size_t n) {
  return rng.below(2) ? random_reals(rng, n) : random_small_ints(rng, n);
}

/// Non-empty random subset of {0, ..., n-1}, ascending.
inline std::vector<std::size_t> random_subset(RngStream& rng, std::size_t n) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.below(2)) s.push_back(i);
  if (s.empty()) s.push_back(static_cast<std::size_t>(rng.below(n)));
  return s;
}

inline std::vector<double> restrict_to(const std::vector<double>& x, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(x[i]);
  return out;
}

}  // namespace gaplab::testing
