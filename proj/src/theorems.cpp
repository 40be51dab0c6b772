#include "gaplab/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gaplab {

void ConstantsConfig::validate() const {
  const double all[] = {C_main, C_op, c_33, c_34, C_36, c_36, C_37, C_41, c_41, c_43, C_51, c_51};
  for (double v : all)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("constants must be positive and finite");
}

NuThreshold nu_threshold(std::size_t n, double alpha, double norm_M, double C) {
  if (n < 2) throw std::invalid_argument("nu_threshold: n must be at least 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("nu_threshold: alpha must be positive");
  if (!(norm_M > 0.0) || !(C > 0.0)) throw std::invalid_argument("nu_threshold: norm_M and C must be positive");
  NuThreshold out;
  if (alpha >= 1.0) {
    out.degenerate = true;
    return out;
  }
  const double log_n = std::log(static_cast<double>(n));
  const double log_inv_alpha = -std::log(alpha);
  const double log_base = std::log(C) + std::log(norm_M) + log_inv_alpha + (7.0 / 6.0) * log_n;
  out.log_value = -4.0 * (log_inv_alpha / log_n) * log_base;
  out.value = std::exp(out.log_value);
  return out;
}

ScaleParameters scale_parameters(std::size_t n, double alpha, double norm_M,
                                 const ConstantsConfig& constants, ScaleOptions options) {
  if (n < 2) throw std::invalid_argument("scale_parameters: n must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scale_parameters: alpha must lie in (0, 1)");
  if (!(norm_M >= 0.0)) throw std::invalid_argument("scale_parameters: norm_M must be non-negative");
  constants.validate();

  const double nd = static_cast<double>(n);
  ScaleParameters p;
  p.n = n;
  p.alpha = alpha;
  p.norm_M = norm_M;
  p.b = kStructureExponent;
  p.n_pow_b = std::pow(nd, p.b);
  p.beta = options.beta_override ? *options.beta_override : 1.0 / (p.n_pow_b * p.n_pow_b * p.n_pow_b);
  if (!(p.beta > 0.0)) throw std::invalid_argument("scale_parameters: beta must be positive");

  const double sqrt_n = std::sqrt(nd);
  p.small_norm_fallback = options.allow_fallback && norm_M < constants.C_op * sqrt_n;
  const double effective_norm = p.small_norm_fallback ? sqrt_n : norm_M;
  p.T = effective_norm / (constants.c_33 * alpha) * nd * p.n_pow_b / std::sqrt(p.beta);
  if (!(p.T > norm_M)) {
    throw std::domain_error("scale_parameters: T = " + std::to_string(p.T) +
                            " does not exceed ||M||; inputs are outside the admissible range");
  }

  const double j_raw = 5.0 / p.b * (-std::log(alpha)) / std::log(nd);
  const double j_near = std::round(j_raw);
  const double j_val = std::abs(j_raw - j_near) <= 1e-9 * std::max(1.0, j_raw) ? j_near : std::ceil(j_raw);
  p.J = std::max<std::size_t>(1, static_cast<std::size_t>(j_val));

  const double nu_norm = p.small_norm_fallback ? constants.C_op * sqrt_n : norm_M;
  p.nu = nu_threshold(n, alpha, nu_norm, constants.C_main).value;
  p.window = 2 * static_cast<std::size_t>(std::floor(p.beta * nd));
  return p;
}

int dyadic_level(double value) {
  if (!(value > 0.0) || value > 1.0) throw std::invalid_argument("dyadic_level: value must lie in (0, 1]");
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);  // value = mantissa * 2^exponent, mantissa in [0.5, 1)
  return mantissa == 0.5 ? 1 - exponent : -exponent;
}

FindJResult find_j(std::span<const double> v, double eta, const ScaleParameters& params,
                   const DistributionSpec& dist, RegularizationMode mode, RngStream& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("find_j: eta must be positive");
  FindJResult out;
  const RngStream subset_seed = rng;
  const double log_eta = std::log(eta);
  const double log_T = std::log(params.T);
  for (std::size_t j = 0; j <= params.J + 1; ++j) {
    const double log_radius = log_eta + static_cast<double>(j) * log_T;
    if (log_radius > 600.0) {
      out.rho_sequence.push_back(1.0);
      continue;
    }
    RngStream local = subset_seed;
    out.rho_sequence.push_back(
        rho_regularized(v, std::exp(log_radius), params.window, mode, dist, local).value);
    if (j == params.J + 1) rng = local;
  }
  for (std::size_t j = 0; j <= params.J; ++j) {
    if (scale_step_holds(out.rho_sequence, j, params.n_pow_b)) {
      out.j = j;
      break;
    }
  }
  return out;
}

bool scale_step_holds(std::span<const double> rho_sequence, std::size_t j, double n_pow_b) {
  if (j + 1 >= rho_sequence.size()) return false;
  return rho_sequence[j + 1] <= std::pow(n_pow_b, 0.25) * rho_sequence[j];
}

bool SmallBallTransferReport::all_passed() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const SmallBallBlock& b) { return b.passed; });
}

SmallBallTransferReport smallball_transfer_check(std::span<const double> v,
                                                 const LatticeApprox& approx,
                                                 const ScaleParameters& params, double norm_M,
                                                 const DistributionSpec& dist, int ell,
                                                 const ConstantsConfig& constants) {
  validate_partition(approx.block_partition, v.size());
  if (ell < 0) throw std::invalid_argument("smallball_transfer_check: ell must be non-negative");
  SmallBallTransferReport report;
  report.radius = 3.0 * norm_M * params.n_pow_b / std::sqrt(params.beta);
  report.threshold = std::min(1.0 - constants.c_33,
                              2.0 * std::pow(params.n_pow_b, 0.25) * std::ldexp(1.0, -ell));
  for (const auto& block : approx.integer_parts) {
    SmallBallBlock b;
    b.rho = rho_exact(block, report.radius, dist).value;
    b.passed = b.rho <= report.threshold;
    report.blocks.push_back(b);
  }
  return report;
}

}  // namespace gaplab
