#include "gaplab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

#include "gaplab/parallel.hpp"

namespace gaplab {

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': " + why);
  };
  if (n < 2) fail("n", "must be at least 2");
  if (trials < 1) fail("trials", "must be at least 1");
  if (!std::isfinite(alpha) || alpha < 0.0) fail("alpha", "must be finite and non-negative");
  if (eta && !(*eta >= 0.0)) fail("eta", "must be non-negative");
  if (nu && !(*nu > 0.0)) fail("nu", "must be positive");
  if (beta_override && !(*beta_override > 0.0 && *beta_override <= 0.5)) fail("beta", "must lie in (0, 0.5]");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) fail("thresholds", "must be sorted ascending");
  if (lambda_grid_cap < 2) fail("lambda_grid_cap", "must be at least 2");
  if (rho_mode.sample_count < 1) fail("rho_mode.sample_count", "must be positive");
  try {
    dist.validate();
  } catch (const std::invalid_argument& e) {
    fail("dist", e.what());
  }
  try {
    constants.validate();
  } catch (const std::invalid_argument& e) {
    fail("constants", e.what());
  }
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GAPLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ProportionInterval wilson_interval(std::size_t successes, std::size_t total) {
  if (total == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double nt = static_cast<double>(total);
  const double p = static_cast<double>(successes) / nt;
  const double denom = 1.0 + z * z / nt;
  const double centre = (p + z * z / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nt + z * z / (4.0 * nt * nt)) / denom;
  // The endpoints are exact at p = 0 and p = 1; cancellation would leave ~1e-18.
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == total ? 1.0 : std::min(1.0, centre + half)};
}

TrialResult analyze_matrix(const SymmetricMatrix& A, std::size_t trial_index) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult r;
  r.trial_index = trial_index;
  const Spectrum spectrum = eigendecompose(A);
  const auto& values = spectrum.eigenvalues();
  r.operator_norm = std::max(std::abs(values.front()), std::abs(values.back()));
  const double tol = 1e-8 * std::max(1.0, r.operator_norm);

  const GapReport gap = gaps(spectrum);
  r.delta_min = gap.delta_min;
  r.argmin = gap.argmin_index;
  r.residual_bound = spectrum.residual_bound();
  r.simple_spectrum = classify_simple_spectrum(gap, r.residual_bound);
  r.gram_deviation = spectrum.gram_deviation();
  r.trace_error = trace_identity_error(A, spectrum);

  const MinorDecomposition parts = minor_decompose(A, A.n() - 1);
  const Spectrum minor = eigendecompose(parts.head);
  r.interlacing_violations = interlacing_check(spectrum, minor, tol).violations.size();
  r.max_witness_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < minor.n(); ++i) {
    const GapWitness w = gap_reduction_witness(spectrum, minor, parts, i, tol);
    ++r.witnesses_checked;
    if (!w.holds) ++r.witness_failures;
    r.max_witness_excess = std::max(r.max_witness_excess, w.lhs - w.rhs);
  }
  r.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<TailRow> tail_table(std::span<const TrialResult> trials, std::span<const double> thresholds) {
  std::vector<TailRow> rows;
  std::size_t total = 0;
  for (const TrialResult& t : trials)
    if (t.status == TrialStatus::ok) ++total;
  for (double threshold : thresholds) {
    TailRow row;
    row.threshold = threshold;
    row.total = total;
    for (const TrialResult& t : trials)
      if (t.status == TrialStatus::ok && t.delta_min <= threshold) ++row.count;
    row.fraction = total == 0 ? 0.0 : static_cast<double>(row.count) / static_cast<double>(total);
    row.wilson = wilson_interval(row.count, total);
    rows.push_back(row);
  }
  return rows;
}

namespace {

SymmetricMatrix sample_trial_matrix(const ExperimentConfig& cfg, const SymmetricMatrix& M,
                                    RngStream& rng) {
  return compose(M, sample_wigner(cfg.n, cfg.dist, rng));
}

double structure_scale(const ExperimentConfig& cfg, double norm_M) {
  if (cfg.nu) return *cfg.nu;
  if (cfg.alpha == 0.0) return 0.0;  // limit of the threshold as alpha -> 0
  return nu_threshold(cfg.n, cfg.alpha, effective_norm(cfg, norm_M), cfg.constants.C_main).value;
}

}  // namespace

TailReport tail_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SymmetricMatrix M = make_perturbation(cfg.perturbation, cfg.n);
  TailReport report;
  report.norm_M = operator_norm(M);
  report.trials.resize(cfg.trials);
  parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t t) {
    try {
      RngStream rng = derive_trial_stream(cfg.master_seed, t);
      report.trials[t] = analyze_matrix(sample_trial_matrix(cfg, M, rng), t);
    } catch (const std::exception& e) {
      TrialResult failed;
      failed.trial_index = t;
      failed.status = TrialStatus::failed;
      failed.error = e.what();
      report.trials[t] = failed;
    }
  });
  for (const TrialResult& t : report.trials) {
    if (t.status == TrialStatus::failed) {
      ++report.failed;
    } else if (t.simple_spectrum == SimpleSpectrum::yes) {
      ++report.simple_yes;
    } else {
      ++report.indeterminate;
    }
  }
  report.rows = tail_table(report.trials, cfg.thresholds);
  return report;
}

// ---------------------------------------------------------------------------

std::size_t experiment_window(const ExperimentConfig& cfg) {
  const double beta = cfg.beta_override
                          ? *cfg.beta_override
                          : std::pow(static_cast<double>(cfg.n), -3.0 * kStructureExponent);
  return regularized_window(beta, cfg.n);
}

void check_structure_feasible(const ExperimentConfig& cfg) {
  const std::size_t window = experiment_window(cfg);
  const std::string key = cfg.beta_override ? "beta" : "n";
  if (window < 2 || window > cfg.n) {
    throw std::invalid_argument("config key '" + key + "': regularization window " +
                                std::to_string(window) + " must lie in [2, n = " +
                                std::to_string(cfg.n) + "]");
  }
  if (!cfg.dist.finite_atoms()) {
    throw std::invalid_argument("config key 'dist.kind': rich/poor classification needs a law with finite atoms");
  }
  const std::size_t cap = default_exact_cap(cfg.dist.atoms().size());
  if (window > cap) {
    throw std::invalid_argument("config key '" + key + "': regularization window " +
                                std::to_string(window) + " exceeds the exact cap " +
                                std::to_string(cap));
  }
  if (cfg.rho_mode.kind == SubsetMode::exact_subsets &&
      binomial_coefficient(cfg.n, window) > kMaxExactSubsets) {
    throw std::invalid_argument("config key 'rho_mode.kind': exact mode would enumerate C(" +
                                std::to_string(cfg.n) + ", " + std::to_string(window) +
                                ") subsets; lower beta or switch to sampled mode");
  }
}

double effective_norm(const ExperimentConfig& cfg, double norm_M) {
  return std::max(norm_M, cfg.constants.C_op * std::sqrt(static_cast<double>(cfg.n)));
}

std::vector<double> lambda_grid(double half_width, double step, std::size_t cap) {
  if (!(half_width >= 0.0) || !(step > 0.0) || cap < 2) throw std::invalid_argument("lambda_grid: bad arguments");
  const double width = 2.0 * half_width;
  double points = std::floor(width / step + 1e-9) + 1.0;
  if (points > static_cast<double>(cap)) {
    points = static_cast<double>(cap);
    step = width / (points - 1.0);
  }
  const auto count = static_cast<std::size_t>(points);
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = -half_width + static_cast<double>(k) * step;
  return grid;
}

std::vector<NearNullEvent> near_null_vectors(const SymmetricMatrix& A,
                                             std::span<const double> grid, double eta,
                                             double alpha, std::size_t window,
                                             RegularizationMode mode, const DistributionSpec& dist,
                                             RngStream& rng) {
  const Spectrum spectrum = eigendecompose(A);
  const auto& values = spectrum.eigenvalues();
  std::map<std::size_t, RichPoorLabel> labels;
  std::vector<NearNullEvent> events;
  for (double lambda : grid) {
    // Eigenvalue nearest to lambda; ties go to the lower index.
    const auto it = std::lower_bound(values.begin(), values.end(), lambda);
    std::size_t idx = static_cast<std::size_t>(it - values.begin());
    if (idx == values.size() ||
        (idx > 0 && std::abs(values[idx - 1] - lambda) <= std::abs(values[idx] - lambda))) {
      --idx;
    }
    const double residual = std::abs(values[idx] - lambda);
    if (residual > eta) continue;
    auto found = labels.find(idx);
    if (found == labels.end()) {
      found = labels
                  .emplace(idx, classify_rich_poor(spectrum.eigenvector(idx), eta, alpha, window,
                                                   mode, dist, rng))
                  .first;
    }
    events.push_back({lambda, idx, residual, found->second.label, found->second.rho_beta.value});
  }
  return events;
}

NullVectorReport null_vector_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SymmetricMatrix M = make_perturbation(cfg.perturbation, cfg.n);
  const double norm_M = operator_norm(M);
  check_structure_feasible(cfg);
  NullVectorReport report;
  report.alpha = cfg.alpha;
  report.window = experiment_window(cfg);
  const double step = structure_scale(cfg, norm_M);
  report.eta = cfg.eta ? *cfg.eta : step;
  report.trials.resize(cfg.trials);

  parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t t) {
    NullVectorTrial& out = report.trials[t];
    out.trial_index = t;
    try {
      RngStream rng = derive_trial_stream(cfg.master_seed, t);
      const SymmetricMatrix A = sample_trial_matrix(cfg, M, rng);
      const double half_width =
          operator_norm(A) + cfg.constants.C_op * std::sqrt(static_cast<double>(cfg.n));
      const std::vector<double> grid = lambda_grid(half_width, step, cfg.lambda_grid_cap);
      out.grid_points = grid.size();
      const auto events = near_null_vectors(A, grid, report.eta, cfg.alpha, report.window,
                                            cfg.rho_mode, cfg.dist, rng);
      out.events = events.size();
      out.rich_events = static_cast<std::size_t>(std::count_if(
          events.begin(), events.end(), [](const NearNullEvent& e) { return e.label == RichPoor::rich; }));
    } catch (const std::exception& e) {
      out.status = TrialStatus::failed;
      out.error = e.what();
    }
  });
  for (const NullVectorTrial& t : report.trials) {
    if (t.status == TrialStatus::failed) {
      ++report.failed;
      continue;
    }
    report.total_events += t.events;
    report.rich_events += t.rich_events;
  }
  report.rich_frequency = report.total_events == 0
                              ? 0.0
                              : static_cast<double>(report.rich_events) /
                                    static_cast<double>(report.total_events);
  report.wilson = wilson_interval(report.rich_events, report.total_events);
  return report;
}

EigenvectorReport eigenvector_structure_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SymmetricMatrix M = make_perturbation(cfg.perturbation, cfg.n);
  const double norm_M = operator_norm(M);
  check_structure_feasible(cfg);
  EigenvectorReport report;
  report.alpha = cfg.alpha;
  report.window = experiment_window(cfg);
  report.scale = structure_scale(cfg, norm_M);
  report.trials.resize(cfg.trials);

  parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t t) {
    TrialResult& out = report.trials[t];
    out.trial_index = t;
    try {
      const auto start = std::chrono::steady_clock::now();
      RngStream rng = derive_trial_stream(cfg.master_seed, t);
      const SymmetricMatrix A = sample_trial_matrix(cfg, M, rng);
      const Spectrum spectrum = eigendecompose(A);
      const GapReport gap = gaps(spectrum);
      out.delta_min = gap.delta_min;
      out.argmin = gap.argmin_index;
      out.residual_bound = spectrum.residual_bound();
      out.simple_spectrum = classify_simple_spectrum(gap, out.residual_bound);
      for (std::size_t i = 0; i < spectrum.n(); ++i) {
        const RichPoorLabel label = classify_rich_poor(spectrum.eigenvector(i), report.scale,
                                                       cfg.alpha, report.window, cfg.rho_mode,
                                                       cfg.dist, rng);
        if (label.label == RichPoor::rich) {
          ++out.rich_count;
        } else {
          ++out.poor_count;
        }
      }
      out.elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    } catch (const std::exception& e) {
      out.status = TrialStatus::failed;
      out.error = e.what();
    }
  });
  report.rich_histogram.assign(cfg.n + 1, 0);
  for (const TrialResult& t : report.trials) {
    if (t.status == TrialStatus::failed) {
      ++report.failed;
      continue;
    }
    ++report.rich_histogram[t.rich_count];
    report.total_rich += t.rich_count;
    report.total_vectors += cfg.n;
  }
  report.rich_frequency = report.total_vectors == 0
                              ? 0.0
                              : static_cast<double>(report.total_rich) /
                                    static_cast<double>(report.total_vectors);
  return report;
}

}  // namespace gaplab
