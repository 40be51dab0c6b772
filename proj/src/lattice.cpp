#include "gaplab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gaplab/anticoncentration.hpp"

namespace gaplab {

double dist_to_lattice(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) {
    const double d = v - std::nearbyint(v);
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

constexpr double kMaxGridPoints = 1e8;

double scaled_distance(std::span<const double> y, double gamma) {
  double s = 0.0;
  for (double v : y) {
    const double t = gamma * v;
    const double d = t - std::nearbyint(t);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

LatticeScanResult scan_scalings(std::span<const double> y, double gamma_min, double gamma_max,
                                double grid_step) {
  if (!(grid_step > 0.0) || !(gamma_min <= gamma_max) || !std::isfinite(gamma_max) ||
      !std::isfinite(gamma_min)) {
    throw std::invalid_argument("scan_scalings: empty grid");
  }
  const double span_steps = (gamma_max - gamma_min) / grid_step;
  if (span_steps > kMaxGridPoints) throw std::invalid_argument("scan_scalings: grid too large");
  const auto steps = static_cast<std::size_t>(std::floor(span_steps + 1e-9));

  LatticeScanResult out;
  out.gamma_min = gamma_min;
  out.gamma_max = gamma_max;
  out.grid_step = grid_step;
  out.best_distance = std::numeric_limits<double>::infinity();

  auto visit = [&](double gamma) {
    const double d = scaled_distance(y, gamma);
    if (d < out.best_distance) {
      out.best_distance = d;
      out.best_gamma = gamma;
    }
    ++out.grid_points;
  };
  for (std::size_t k = 0; k <= steps; ++k) {
    visit(std::min(gamma_min + static_cast<double>(k) * grid_step, gamma_max));
  }
  const double last = gamma_min + static_cast<double>(steps) * grid_step;
  if (last < gamma_max * (1.0 - 1e-12) - 1e-300) visit(gamma_max);

  double ynorm = 0.0;
  for (double v : y) ynorm += v * v;
  ynorm = std::sqrt(ynorm);
  out.tau_certified = out.best_distance;
  out.interval_lower_bound = out.tau_certified - ynorm * grid_step / 2.0;
  return out;
}

double lattice_concentration_bound(double r, double gamma_min, double gamma_max, double tau,
                                   double C, double c) {
  return C * std::exp(std::numbers::pi * r * r) *
         (std::exp(-c * gamma_max * gamma_max) + std::exp(-c * tau * tau) + gamma_min);
}

// ---------------------------------------------------------------------------

std::vector<BlockRange> make_block_partition(std::size_t n, double beta) {
  const auto base = static_cast<std::size_t>(std::floor(beta * static_cast<double>(n)));
  if (base == 0 || 2 * base > n) {
    throw std::invalid_argument("make_block_partition: need 1 <= floor(beta n) and 2 floor(beta n) <= n");
  }
  std::vector<BlockRange> blocks{{0, 2 * base}};
  std::size_t pos = 2 * base;
  while (n - pos >= 2 * base) {
    blocks.push_back({pos, pos + base});
    pos += base;
  }
  if (pos < n) {
    // Remainder of size in [base, 2 base) becomes one block; a shorter tail
    // (only possible when nothing follows the first block) stands alone.
    blocks.push_back({pos, n});
  }
  return blocks;
}

void validate_partition(std::span<const BlockRange> partition, std::size_t n) {
  std::size_t pos = 0;
  for (const BlockRange& b : partition) {
    if (b.begin != pos || b.end <= b.begin) throw std::invalid_argument("invalid block partition");
    pos = b.end;
  }
  if (pos != n) throw std::invalid_argument("block partition does not cover the vector");
}

LatticeApprox nearest_integer_approx(std::span<const double> v,
                                     std::span<const BlockRange> partition, double scale,
                                     double d_lo, double d_hi, double d_grid, double threshold) {
  validate_partition(partition, v.size());
  if (!(d_lo > 0.0 && d_lo < d_hi)) throw std::invalid_argument("nearest_integer_approx: need 0 < d_lo < d_hi");

  LatticeApprox out;
  out.block_partition.assign(partition.begin(), partition.end());
  out.threshold = threshold;
  std::vector<double> x;
  for (const BlockRange& b : partition) {
    x.assign(v.begin() + static_cast<std::ptrdiff_t>(b.begin),
             v.begin() + static_cast<std::ptrdiff_t>(b.end));
    for (double& xi : x) xi *= scale;
    const LatticeScanResult scan = scan_scalings(x, d_lo, d_hi, d_grid);
    std::vector<double> rounded(x.size());
    double err = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = scan.best_gamma * x[k];
      rounded[k] = std::nearbyint(t);
      err += (t - rounded[k]) * (t - rounded[k]);
    }
    err = std::sqrt(err);
    out.dilates.push_back(scan.best_gamma);
    out.integer_parts.push_back(std::move(rounded));
    out.block_errors.push_back(err);
    out.success.push_back(err <= threshold);
  }
  return out;
}

// ---------------------------------------------------------------------------

bool is_odd_prime(std::uint64_t p) {
  if (p < 3 || p % 2 == 0) return false;
  for (std::uint64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

std::vector<std::int64_t> phi_p(std::span<const std::int64_t> v, std::uint64_t p) {
  if (!is_odd_prime(p)) throw std::invalid_argument("phi_p: " + std::to_string(p) + " is not an odd prime");
  const auto mod = static_cast<std::int64_t>(p);
  std::vector<std::int64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = ((v[i] % mod) + mod) % mod;
  return out;
}

std::vector<CountingInstance> enumerate_S_rho(std::size_t n, std::uint64_t p,
                                              std::span<const double> thresholds,
                                              const DistributionSpec& dist) {
  if (!is_odd_prime(p)) throw std::invalid_argument("enumerate_S_rho: p must be an odd prime");
  if (n == 0) throw std::invalid_argument("enumerate_S_rho: n must be positive");
  if (!dist.finite_atoms()) throw std::invalid_argument("enumerate_S_rho: law needs a finite atom list");
  if (n > default_exact_cap(dist.atoms().size())) throw CapExceeded("enumerate_S_rho: n exceeds exact cap");
  const double total = std::pow(static_cast<double>(p), static_cast<double>(n));
  if (total > 1e7) throw CapExceeded("enumerate_S_rho: p^n exceeds 1e7");

  const auto half = static_cast<std::int64_t>((p - 1) / 2);
  const auto count = static_cast<std::size_t>(total);
  std::vector<std::int64_t> rep(n, -half);
  std::vector<double> coeffs(n);
  std::vector<double> rho_values;
  rho_values.reserve(count);
  std::vector<std::size_t> residue_codes;
  residue_codes.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    for (std::size_t i = 0; i < n; ++i) coeffs[i] = static_cast<double>(rep[i]);
    rho_values.push_back(rho_exact(coeffs, 1.0, dist).value);
    const std::vector<std::int64_t> residue = phi_p(rep, p);
    std::size_t code = 0;
    for (std::int64_t r : residue) code = code * p + static_cast<std::size_t>(r);
    residue_codes.push_back(code);
    // Odometer over {-half, ..., half}^n.
    for (std::size_t i = n; i-- > 0;) {
      if (rep[i] < half) {
        ++rep[i];
        break;
      }
      rep[i] = -half;
    }
  }

  std::vector<CountingInstance> out;
  std::vector<char> seen(count);
  for (double threshold : thresholds) {
    std::fill(seen.begin(), seen.end(), 0);
    CountingInstance inst;
    inst.n = n;
    inst.p = p;
    inst.rho_threshold = threshold;
    for (std::size_t idx = 0; idx < count; ++idx) {
      if (rho_values[idx] >= threshold && !seen[residue_codes[idx]]) {
        seen[residue_codes[idx]] = 1;
        ++inst.image_size;
      }
    }
    out.push_back(inst);
  }
  return out;
}

CountingInstance enumerate_S_rho(std::size_t n, std::uint64_t p, double rho_threshold,
                                 const DistributionSpec& dist) {
  const double t[] = {rho_threshold};
  return enumerate_S_rho(n, p, t, dist).front();
}

CountingBound counting_bound(std::size_t n, std::size_t m, std::size_t l, std::uint64_t p,
                             double rho, double C, double K, double second_exponent) {
  if (n == 0 || m == 0 || l == 0 || p == 0 || !(rho > 0.0) || !(C > 0.0)) {
    throw std::invalid_argument("counting_bound: arguments must be positive");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double ld = static_cast<double>(l);
  const double pd = static_cast<double>(p);
  const double exponent = second_exponent > 0.0 ? second_exponent : nd;

  CountingBound out;
  const double log_first = md * std::log(5.0 * nd * pd * pd / md);
  const double log_second = exponent * std::log(C / rho / std::sqrt(md / ld));
  out.first_term = std::pow(5.0 * nd * pd * pd / md, md);
  out.second_term = std::pow(C / rho / std::sqrt(md / ld), exponent);
  out.value = out.first_term + out.second_term;
  const double hi = std::max(log_first, log_second);
  out.log_value = hi + std::log(std::exp(log_first - hi) + std::exp(log_second - hi));

  CountingHypotheses& h = out.hypotheses;
  h.l_at_least_1000K = 1000.0 * K <= ld;
  h.l_at_most_sqrt_m = ld <= std::sqrt(md);
  h.m_at_most_n_over_log_n = n > 1 && md <= nd / std::log(nd);
  h.rho_large_enough = rho >= C * std::max(std::exp(-md / ld), std::pow(md, -ld / 4.0));
  h.p_at_least_C_over_rho = C / rho <= pd;
  h.p_at_most_2_pow_n_over_m = std::log2(pd) <= nd / md;
  h.p_odd_prime = is_odd_prime(p);
  return out;
}

}  // namespace gaplab
