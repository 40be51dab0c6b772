#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "gaplab/ensembles.hpp"
#include "gaplab/rng.hpp"

namespace gaplab {

class CapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Levy concentration function
//
//   rho(x, eps) = sup_y P(|<x, xi> - y| <= eps)
//
// For a finite set of attainable sums the supremum is attained by a closed
// window [s, s + 2 eps] whose left edge is one of the sums, so both the exact
// and the Monte Carlo routine reduce to a sliding-window maximum over a
// sorted list. Window membership uses a relative slack of 1e-12 times the
// largest attainable |sum| to absorb rounding in the sums themselves.

enum class RhoMethod { exact, monte_carlo };

struct RhoEstimate {
  double value = 0.0;
  RhoMethod method = RhoMethod::exact;
  std::size_t trials = 0;
  double std_error = 0.0;
  double optimal_center = 0.0;
};

/// Largest n accepted by rho_exact for a law with `atom_count` atoms: 22 for
/// two atoms, 13 for three (about 4e6 outcomes).
std::size_t default_exact_cap(std::size_t atom_count);

struct ExactOptions {
  /// 0 selects default_exact_cap for the law.
  std::size_t exact_cap = 0;
};

RhoEstimate rho_exact(std::span<const double> x, double eps, const DistributionSpec& dist,
                      ExactOptions options = {});

/// Monte Carlo estimate from `trials` draws of <x, xi>. The window is chosen
/// after seeing the data, so the estimator is biased upward; the reported
/// std_error is the binomial sqrt(v (1 - v) / trials) and ignores that bias.
RhoEstimate rho_mc(std::span<const double> x, double eps, const DistributionSpec& dist,
                   std::size_t trials, RngStream& rng);

// ---------------------------------------------------------------------------
// Regularized concentration: infimum of rho over restrictions to coordinate
// windows of a fixed size.

enum class SubsetMode { exact_subsets, sampled_subsets };

struct RegularizationMode {
  SubsetMode kind = SubsetMode::exact_subsets;
  std::size_t sample_count = 2000;

  friend bool operator==(const RegularizationMode&, const RegularizationMode&) = default;
};

struct RegularizedRho {
  double value = 1.0;
  std::size_t window_size = 0;
  std::vector<std::size_t> witness_subset;  // zero-based, ascending
  RegularizationMode mode;
  /// True in sampled mode: the minimum over sampled subsets only bounds the
  /// infimum from above.
  bool upper_bound_only = false;
};

/// 2 * floor(beta * n)
std::size_t regularized_window(double beta, std::size_t n);

/// Largest number of subsets exact mode will enumerate.
inline constexpr double kMaxExactSubsets = 1e6;

double binomial_coefficient(std::size_t n, std::size_t k);

RegularizedRho rho_regularized(std::span<const double> x, double r, std::size_t window,
                               RegularizationMode mode, const DistributionSpec& dist,
                               RngStream& rng, ExactOptions options = {});

enum class RichPoor { rich, poor };

struct RichPoorLabel {
  RichPoor label = RichPoor::rich;
  RegularizedRho rho_beta;
  double threshold = 0.0;
  double scale = 0.0;
};

/// Poor iff rho_beta(x, eta) <= alpha.
RichPoorLabel classify_rich_poor(std::span<const double> x, double eta, double alpha,
                                 std::size_t window, RegularizationMode mode,
                                 const DistributionSpec& dist, RngStream& rng,
                                 ExactOptions options = {});

// ---------------------------------------------------------------------------
// Numeric probes of the auxiliary anti-concentration facts

/// Restriction: concentration of the full vector never exceeds that of a
/// subvector, rho(x, r) <= rho(x_I, r).
struct RestrictionCheck {
  double rho_full = 0.0;
  double rho_sub = 0.0;
  bool holds = false;
};

RestrictionCheck restriction_check(std::span<const double> x, std::span<const std::size_t> subset,
                                   double r, const DistributionSpec& dist);

/// Stability under perturbation of the coefficient vector:
///   rho(y, r + s) >= rho(z, r) - e * exp(-c s^2 / ||y - z||^2).
/// When y == z the exponential term is taken to be zero.
struct StabilityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

StabilityCheck levy_stability_check(std::span<const double> y, std::span<const double> z,
                                    double r, double s, double c, const DistributionSpec& dist);

/// Sanity probe for sup_{|v| = 1} rho(v, c) <= 1 - c over a candidate set:
/// the coordinate vectors, the normalized all-ones vector and `samples`
/// uniformly random unit vectors. Exact evaluation when the law has atoms and
/// n fits the cap, Monte Carlo (10^5 draws) otherwise.
struct BoundedConcentrationReport {
  std::vector<double> worst_v;
  double rho_at_c = 0.0;
  double margin = 0.0;  // (1 - c) - rho_at_c
  bool passed = false;
};

BoundedConcentrationReport bounded_concentration_check(const DistributionSpec& dist,
                                                       std::size_t n, std::size_t samples,
                                                       RngStream& rng, double c = 0.1);

/// rho for a single candidate vector; used by bounded_concentration_check.
double rho_auto(std::span<const double> x, double eps, const DistributionSpec& dist,
                RngStream& rng);

}  // namespace gaplab
