#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gaplab/anticoncentration.hpp"
#include "gaplab/ensembles.hpp"
#include "gaplab/lattice.hpp"

namespace gaplab {

/**
 * Constants used by the tail bound and the structure probes.
 * None of them is known; each defaults to 1 and every check that reads one
 * is a sanity probe, not a verification.
 */
struct ConstantsConfig {
  double C_main = 1.0;  // threshold formula for the minimum gap
  double C_op = 1.0;    // ||N_n|| <= C_op sqrt(n) with high probability
  double c_33 = 1.0;    // bounded concentration: sup rho(v, c) <= 1 - c
  double c_34 = 1.0;    // stability exponent
  double C_36 = 1.0;    // lattice-distance criterion
  double c_36 = 1.0;
  double C_37 = 1.0;    // counting theorem
  double C_41 = 1.0;    // null-vector structure
  double c_41 = 1.0;
  double c_43 = 1.0;    // dilate lower end
  double C_51 = 1.0;    // eigenvector structure
  double c_51 = 1.0;

  void validate() const;
  friend bool operator==(const ConstantsConfig&, const ConstantsConfig&) = default;
};

struct NuThreshold {
  double value = 1.0;
  double log_value = 0.0;
  /// alpha >= 1: the exponent vanishes and the threshold degenerates to 1.
  bool degenerate = false;
};

/// nu = (C ||M|| alpha^-1 n^{7/6})^{-4 ln(1/alpha) / ln n}, evaluated in log space.
NuThreshold nu_threshold(std::size_t n, double alpha, double norm_M, double C);

inline constexpr double kStructureExponent = 1.0 / 15.0;  // b

struct ScaleParameters {
  std::size_t n = 0;
  double alpha = 0.0;
  double norm_M = 0.0;
  double b = kStructureExponent;
  double n_pow_b = 1.0;
  double beta = 1.0;
  double T = 1.0;
  std::size_t J = 1;
  double nu = 1.0;
  std::size_t window = 2;
  /// T was computed with ||M|| replaced by sqrt(n) because ||M|| < C_op sqrt(n).
  bool small_norm_fallback = false;
};

struct ScaleOptions {
  bool allow_fallback = true;
  std::optional<double> beta_override;
};

/**
 * b = 1/15, beta = n^{-3b} = (n^b)^{-3},
 * T = c^-1 ||M|| alpha^-1 n^{1+b} beta^{-1/2}
 *   (or c^-1 alpha^-1 n^{3/2+b} beta^{-1/2} under the small-norm fallback),
 * J = ceil(5 b^-1 ln(1/alpha) / ln n), nu = nu_threshold(n, alpha, ||M||, C_main)
 * with ||M|| raised to C_op sqrt(n) under the fallback, window = 2 floor(beta n).
 *
 * J is rounded to the nearest integer first when it lies within 1e-9 of one,
 * so exact integer cases are not pushed up by rounding in the logarithms.
 */
ScaleParameters scale_parameters(std::size_t n, double alpha, double norm_M,
                                 const ConstantsConfig& constants, ScaleOptions options = {});

/// The unique l >= 0 with value in (2^{-l-1}, 2^{-l}].
int dyadic_level(double value);

struct FindJResult {
  std::optional<std::size_t> j;
  /// rho_beta(v, eta T^j) for j = 0, ..., J + 1.
  std::vector<double> rho_sequence;
};

/// Smallest j in {0, ..., J} with rho_beta(v, eta T^{j+1}) <= n^{b/4} rho_beta(v, eta T^j).
/// In sampled mode every scale uses the same subset sample.
FindJResult find_j(std::span<const double> v, double eta, const ScaleParameters& params,
                   const DistributionSpec& dist, RegularizationMode mode, RngStream& rng);

/// Independent re-check of the find_j inequality at index j.
bool scale_step_holds(std::span<const double> rho_sequence, std::size_t j, double n_pow_b);

struct SmallBallBlock {
  double rho = 0.0;
  bool passed = false;
};

struct SmallBallTransferReport {
  double radius = 0.0;     // 3 ||M|| n^b beta^{-1/2}
  double threshold = 0.0;  // min(1 - c_33, 2 n^{b/4} 2^{-ell})
  std::vector<SmallBallBlock> blocks;
  [[nodiscard]] bool all_passed() const;
};

/// Sanity probe: concentration of each integer block of `approx` at the
/// transfer radius, compared against min(1 - c_33, 2 n^{b/4} 2^{-ell}).
SmallBallTransferReport smallball_transfer_check(std::span<const double> v,
                                                 const LatticeApprox& approx,
                                                 const ScaleParameters& params, double norm_M,
                                                 const DistributionSpec& dist, int ell,
                                                 const ConstantsConfig& constants);

}  // namespace gaplab
