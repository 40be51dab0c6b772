#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gaplab/ensembles.hpp"

namespace gaplab {

/// Euclidean distance from y to the nearest point of Z^n. Coordinates are
/// rounded with std::nearbyint, so exact halves go to the even integer.
double dist_to_lattice(std::span<const double> y);

/**
 * Grid scan of gamma -> dist(gamma * y, Z^n) over [gamma_min, gamma_max].
 *
 * The grid is gamma_min + k * grid_step, with gamma_max appended when the
 * step does not land on it. The distance is ||y||_2-Lipschitz in gamma, so
 * every gamma in the interval is within grid_step / 2 of a grid point and
 * interval_lower_bound = tau_certified - ||y||_2 * grid_step / 2 bounds the
 * distance on the whole interval, not just on the grid.
 */
struct LatticeScanResult {
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double grid_step = 0.0;
  double best_gamma = 0.0;
  double best_distance = 0.0;
  double tau_certified = 0.0;
  double interval_lower_bound = 0.0;
  std::size_t grid_points = 0;
};

LatticeScanResult scan_scalings(std::span<const double> y, double gamma_min, double gamma_max,
                                double grid_step);

/// Right-hand side of the lattice-distance criterion for the concentration
/// function: C exp(pi r^2) (exp(-c gamma_max^2) + exp(-c tau^2) + gamma_min).
double lattice_concentration_bound(double r, double gamma_min, double gamma_max, double tau,
                                   double C, double c);

// ---------------------------------------------------------------------------
// Block-wise near-integer approximation

struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

/// Consecutive blocks: the first of size 2 floor(beta n), the rest of size
/// floor(beta n), the last one absorbing any remainder.
std::vector<BlockRange> make_block_partition(std::size_t n, double beta);
/// Throws unless the ranges are non-empty, consecutive and cover [0, n).
void validate_partition(std::span<const BlockRange> partition, std::size_t n);

struct LatticeApprox {
  std::vector<double> dilates;
  /// Integral-valued vectors, one per block (stored as doubles).
  std::vector<std::vector<double>> integer_parts;
  std::vector<double> block_errors;
  std::vector<BlockRange> block_partition;
  std::vector<bool> success;
  double threshold = 0.0;
};

/// For each block, scans dilates D in [d_lo, d_hi] on a grid of step d_grid
/// and keeps the one minimizing dist(D * scale * v_block, Z^dim). A block
/// succeeds when its error is at most `threshold`.
LatticeApprox nearest_integer_approx(std::span<const double> v,
                                     std::span<const BlockRange> partition, double scale,
                                     double d_lo, double d_hi, double d_grid, double threshold);

// ---------------------------------------------------------------------------
// Counting over residues

bool is_odd_prime(std::uint64_t p);

/// Coordinatewise reduction into {0, ..., p - 1}.
std::vector<std::int64_t> phi_p(std::span<const std::int64_t> v, std::uint64_t p);

struct CountingInstance {
  std::size_t n = 0;
  std::uint64_t p = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  double rho_threshold = 0.0;
  /// Residues hit by canonical representatives in {-(p-1)/2, ..., (p-1)/2}^n
  /// with rho(a, 1) >= rho_threshold. A lower bound on the image of the
  /// full set of integer vectors.
  std::size_t image_size = 0;
  double bound_value = 0.0;
};

CountingInstance enumerate_S_rho(std::size_t n, std::uint64_t p, double rho_threshold,
                                 const DistributionSpec& dist);
/// One enumeration, evaluated at several thresholds.
std::vector<CountingInstance> enumerate_S_rho(std::size_t n, std::uint64_t p,
                                              std::span<const double> thresholds,
                                              const DistributionSpec& dist);

struct CountingHypotheses {
  bool l_at_least_1000K = false;
  bool l_at_most_sqrt_m = false;
  bool m_at_most_n_over_log_n = false;
  bool rho_large_enough = false;
  bool p_at_least_C_over_rho = false;
  bool p_at_most_2_pow_n_over_m = false;
  bool p_odd_prime = false;
  [[nodiscard]] bool all() const noexcept {
    return l_at_least_1000K && l_at_most_sqrt_m && m_at_most_n_over_log_n && rho_large_enough &&
           p_at_least_C_over_rho && p_at_most_2_pow_n_over_m && p_odd_prime;
  }
};

struct CountingBound {
  double value = 0.0;
  double first_term = 0.0;
  double second_term = 0.0;
  double log_value = 0.0;  // natural log, finite even when value overflows
  CountingHypotheses hypotheses;
};

/**
 * (5 n p^2 / m)^m + (C rho^-1 / sqrt(m / l))^e with e = `second_exponent`
 * (default n; the block-wise application uses the block length instead).
 * Hypotheses are evaluated and reported, not enforced.
 */
CountingBound counting_bound(std::size_t n, std::size_t m, std::size_t l, std::uint64_t p,
                             double rho, double C, double K = 1.0, double second_exponent = 0.0);

}  // namespace gaplab
