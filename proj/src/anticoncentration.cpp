#include "gaplab/anticoncentration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

namespace gaplab {

namespace {

struct WindowResult {
  double mass = 0.0;
  double center = 0.0;
};

// Maximum mass of a closed window of width 2 eps over sorted (value, mass)
// pairs. `slack` widens the window to absorb rounding in the values.
WindowResult sliding_window_max(const std::vector<std::pair<double, double>>& sorted, double eps,
                                double slack) {
  WindowResult best{0.0, sorted.empty() ? 0.0 : sorted.front().first + eps};
  double mass = 0.0;
  std::size_t right = 0;
  for (std::size_t left = 0; left < sorted.size(); ++left) {
    // right >= left: every window contains its own left edge.
    const double edge = sorted[left].first + 2.0 * eps + slack;
    while (right < sorted.size() && sorted[right].first <= edge) {
      mass += sorted[right].second;
      ++right;
    }
    if (mass > best.mass) best = {mass, sorted[left].first + eps};
    mass -= sorted[left].second;
  }
  return best;
}

void check_vector(std::span<const double> x, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("rho: eps must be finite and >= 0");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("rho: non-finite coefficient");
}

std::size_t resolve_cap(const std::vector<Atom>& atoms, ExactOptions options) {
  return options.exact_cap != 0 ? options.exact_cap : default_exact_cap(atoms.size());
}

// Enumerates every atom combination; `outcomes` is reused scratch space.
double exact_with_atoms(std::span<const double> x, double eps, const std::vector<Atom>& atoms,
                        std::vector<std::pair<double, double>>& outcomes,
                        std::vector<std::pair<double, double>>& scratch, double* center) {
  outcomes.assign(1, {0.0, 1.0});
  double atom_max = 0.0;
  for (const Atom& a : atoms) atom_max = std::max(atom_max, std::abs(a.value));
  double reach = 0.0;
  for (double xi : x) {
    reach += std::abs(xi) * atom_max;
    scratch.clear();
    scratch.reserve(outcomes.size() * atoms.size());
    for (const auto& [sum, prob] : outcomes)
      for (const Atom& a : atoms) scratch.emplace_back(sum + xi * a.value, prob * a.probability);
    outcomes.swap(scratch);
  }
  std::sort(outcomes.begin(), outcomes.end());
  const WindowResult best = sliding_window_max(outcomes, eps, 1e-12 * (reach + 2.0 * eps));
  if (center != nullptr) *center = best.center;
  return std::min(best.mass, 1.0);
}

}  // namespace

std::size_t default_exact_cap(std::size_t atom_count) {
  if (atom_count <= 1) return 64;
  // 2^22 outcomes; gives 22 for two atoms and 13 for three.
  return static_cast<std::size_t>(std::floor(22.0 * std::log(2.0) / std::log(double(atom_count)) + 1e-9));
}

RhoEstimate rho_exact(std::span<const double> x, double eps, const DistributionSpec& dist,
                      ExactOptions options) {
  check_vector(x, eps);
  if (!dist.finite_atoms()) {
    throw std::invalid_argument("rho_exact: law '" + to_string(dist.kind) +
                                "' has no finite atom list");
  }
  const std::vector<Atom> atoms = dist.atoms();
  const std::size_t cap = resolve_cap(atoms, options);
  if (x.size() > cap) {
    throw CapExceeded("rho_exact: n = " + std::to_string(x.size()) + " exceeds exact cap " +
                      std::to_string(cap));
  }
  std::vector<std::pair<double, double>> outcomes;
  std::vector<std::pair<double, double>> scratch;
  RhoEstimate est;
  est.method = RhoMethod::exact;
  est.value = exact_with_atoms(x, eps, atoms, outcomes, scratch, &est.optimal_center);
  return est;
}

RhoEstimate rho_mc(std::span<const double> x, double eps, const DistributionSpec& dist,
                   std::size_t trials, RngStream& rng) {
  check_vector(x, eps);
  if (trials < 1000) throw std::invalid_argument("rho_mc: need at least 1000 trials");
  std::vector<std::pair<double, double>> sums(trials);
  double reach = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    double s = 0.0;
    for (double xi : x) s += xi * sample_entry(dist, rng);
    sums[t] = {s, 1.0};
    reach = std::max(reach, std::abs(s));
  }
  std::sort(sums.begin(), sums.end());
  const WindowResult best = sliding_window_max(sums, eps, 1e-12 * (reach + 2.0 * eps));
  RhoEstimate est;
  est.method = RhoMethod::monte_carlo;
  est.trials = trials;
  est.value = best.mass / static_cast<double>(trials);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(trials));
  est.optimal_center = best.center;
  return est;
}

// ---------------------------------------------------------------------------

std::size_t regularized_window(double beta, std::size_t n) {
  if (!(beta > 0.0)) throw std::invalid_argument("regularized_window: beta must be positive");
  return 2 * static_cast<std::size_t>(std::floor(beta * static_cast<double>(n)));
}

double binomial_coefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

RegularizedRho rho_regularized(std::span<const double> x, double r, std::size_t window,
                               RegularizationMode mode, const DistributionSpec& dist,
                               RngStream& rng, ExactOptions options) {
  const std::size_t n = x.size();
  check_vector(x, r);
  if (window > n) {
    throw std::invalid_argument("rho_regularized: window size " + std::to_string(window) +
                                " exceeds n = " + std::to_string(n));
  }
  if (window < 2 || window % 2 != 0) {
    throw std::invalid_argument("rho_regularized: window size must be even and at least 2");
  }
  if (!dist.finite_atoms()) throw std::invalid_argument("rho_regularized: law needs a finite atom list");
  const std::vector<Atom> atoms = dist.atoms();
  const std::size_t cap = resolve_cap(atoms, options);
  if (window > cap) {
    throw CapExceeded("rho_regularized: window " + std::to_string(window) + " exceeds exact cap " +
                      std::to_string(cap));
  }

  RegularizedRho out;
  out.window_size = window;
  out.mode = mode;
  out.value = 2.0;  // above any probability; replaced by the first subset

  std::vector<std::pair<double, double>> outcomes;
  std::vector<std::pair<double, double>> scratch;
  std::vector<double> sub(window);
  std::vector<std::size_t> idx(window);

  auto evaluate = [&]() {
    for (std::size_t k = 0; k < window; ++k) sub[k] = x[idx[k]];
    const double v = exact_with_atoms(sub, r, atoms, outcomes, scratch, nullptr);
    if (v < out.value) {
      out.value = v;
      out.witness_subset = idx;
    }
  };

  if (mode.kind == SubsetMode::exact_subsets) {
    const double count = binomial_coefficient(n, window);
    if (count > kMaxExactSubsets) {
      throw CapExceeded("rho_regularized: C(" + std::to_string(n) + ", " + std::to_string(window) +
                        ") subsets exceed the exact-mode limit of 1e6");
    }
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      evaluate();
      // Next combination in lexicographic order.
      std::size_t pos = window;
      while (pos > 0 && idx[pos - 1] == n - window + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t k = pos; k < window; ++k) idx[k] = idx[k - 1] + 1;
    }
  } else {
    if (mode.sample_count == 0) throw std::invalid_argument("rho_regularized: sample_count must be positive");
    out.upper_bound_only = true;
    std::vector<std::size_t> perm(n);
    for (std::size_t s = 0; s < mode.sample_count; ++s) {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t k = 0; k < window; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(perm[k], perm[pick]);
      }
      std::copy_n(perm.begin(), window, idx.begin());
      std::sort(idx.begin(), idx.end());
      evaluate();
    }
  }
  return out;
}

RichPoorLabel classify_rich_poor(std::span<const double> x, double eta, double alpha,
                                 std::size_t window, RegularizationMode mode,
                                 const DistributionSpec& dist, RngStream& rng,
                                 ExactOptions options) {
  RichPoorLabel label;
  label.rho_beta = rho_regularized(x, eta, window, mode, dist, rng, options);
  label.threshold = alpha;
  label.scale = eta;
  label.label = label.rho_beta.value <= alpha ? RichPoor::poor : RichPoor::rich;
  return label;
}

// ---------------------------------------------------------------------------

RestrictionCheck restriction_check(std::span<const double> x, std::span<const std::size_t> subset,
                                   double r, const DistributionSpec& dist) {
  std::vector<double> sub;
  sub.reserve(subset.size());
  for (std::size_t i : subset) {
    if (i >= x.size()) throw std::out_of_range("restriction_check: subset index out of range");
    sub.push_back(x[i]);
  }
  RestrictionCheck out;
  out.rho_full = rho_exact(x, r, dist).value;
  out.rho_sub = rho_exact(sub, r, dist).value;
  out.holds = out.rho_full <= out.rho_sub + 1e-12;
  return out;
}

StabilityCheck levy_stability_check(std::span<const double> y, std::span<const double> z,
                                    double r, double s, double c, const DistributionSpec& dist) {
  if (y.size() != z.size()) throw DimensionMismatch("levy_stability_check: y and z differ in length");
  if (!(c > 0.0)) throw std::invalid_argument("levy_stability_check: c must be positive");
  if (!(s >= 0.0)) throw std::invalid_argument("levy_stability_check: s must be non-negative");
  double dist2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dist2 += (y[i] - z[i]) * (y[i] - z[i]);
  const double penalty = dist2 == 0.0 ? 0.0 : std::numbers::e * std::exp(-c * s * s / dist2);
  StabilityCheck out;
  out.lhs = rho_exact(y, r + s, dist).value;
  out.rhs = rho_exact(z, r, dist).value - penalty;
  out.holds = out.lhs >= out.rhs - 1e-12;
  return out;
}

double rho_auto(std::span<const double> x, double eps, const DistributionSpec& dist,
                RngStream& rng) {
  if (dist.finite_atoms() && x.size() <= default_exact_cap(dist.atoms().size())) {
    return rho_exact(x, eps, dist).value;
  }
  return rho_mc(x, eps, dist, 100000, rng).value;
}

BoundedConcentrationReport bounded_concentration_check(const DistributionSpec& dist,
                                                       std::size_t n, std::size_t samples,
                                                       RngStream& rng, double c) {
  if (n == 0) throw std::invalid_argument("bounded_concentration_check: n must be positive");
  std::vector<std::vector<double>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    candidates.push_back(std::move(e));
  }
  candidates.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> v(n);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& vi : v) {
        vi = rng.normal();
        norm += vi * vi;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& vi : v) vi /= norm;
    candidates.push_back(std::move(v));
  }

  BoundedConcentrationReport report;
  report.rho_at_c = -1.0;
  for (const auto& v : candidates) {
    const double rho = rho_auto(v, c, dist, rng);
    if (rho > report.rho_at_c) {
      report.rho_at_c = rho;
      report.worst_v = v;
    }
  }
  report.margin = (1.0 - c) - report.rho_at_c;
  report.passed = report.margin >= 0.0;
  return report;
}

}  // namespace gaplab
