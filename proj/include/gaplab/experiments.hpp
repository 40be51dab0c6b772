#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaplab/anticoncentration.hpp"
#include "gaplab/ensembles.hpp"
#include "gaplab/spectral.hpp"
#include "gaplab/theorems.hpp"

namespace gaplab {

struct ExperimentConfig {
  std::size_t n = 50;
  std::size_t trials = 100;
  DistributionSpec dist;
  PerturbationSpec perturbation;
  double alpha = 0.5;
  std::optional<double> eta;
  std::optional<double> nu;
  std::optional<double> beta_override;
  std::uint64_t master_seed = 7;
  std::vector<double> thresholds{1e-4, 1e-3, 1e-2, 1e-1};
  ConstantsConfig constants;
  RegularizationMode rho_mode;
  /// Worker threads; 0 picks GAPLAB_THREADS or the hardware concurrency.
  std::size_t threads = 0;
  std::size_t lambda_grid_cap = 10000;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Resolves a requested worker count (0 = automatic) to at least one thread.
std::size_t resolve_threads(std::size_t requested);

enum class TrialStatus { ok, failed };

struct TrialResult {
  std::size_t trial_index = 0;
  TrialStatus status = TrialStatus::ok;
  std::string error;
  double delta_min = 0.0;
  std::size_t argmin = 0;
  SimpleSpectrum simple_spectrum = SimpleSpectrum::indeterminate;
  double operator_norm = 0.0;
  double residual_bound = 0.0;
  double gram_deviation = 0.0;
  double trace_error = 0.0;
  std::size_t interlacing_violations = 0;
  std::size_t witnesses_checked = 0;
  std::size_t witness_failures = 0;
  double max_witness_excess = 0.0;  // max over i of lhs - rhs
  std::size_t rich_count = 0;
  std::size_t poor_count = 0;
  double elapsed_ms = 0.0;  // wall clock; excluded from every output file
};

struct ProportionInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at 95% confidence.
ProportionInterval wilson_interval(std::size_t successes, std::size_t total);

struct TailRow {
  double threshold = 0.0;
  std::size_t count = 0;
  std::size_t total = 0;
  double fraction = 0.0;
  ProportionInterval wilson;
};

struct TailReport {
  std::vector<TailRow> rows;
  std::vector<TrialResult> trials;
  std::size_t simple_yes = 0;
  std::size_t indeterminate = 0;
  std::size_t failed = 0;
  double norm_M = 0.0;
};

/// Samples M_n = M + N_n per trial and records the gap statistics together
/// with the interlacing and gap-reduction certificates at k = n - 1.
TailReport tail_experiment(const ExperimentConfig& cfg);

/// Per-trial analysis used by tail_experiment; exposed for tests.
TrialResult analyze_matrix(const SymmetricMatrix& A, std::size_t trial_index);

/// Empirical CDF of delta_min over the ok trials.
std::vector<TailRow> tail_table(std::span<const TrialResult> trials, std::span<const double> thresholds);

// ---------------------------------------------------------------------------

struct NearNullEvent {
  double lambda = 0.0;
  std::size_t eigen_index = 0;
  double residual = 0.0;  // ||(A - lambda) v||_2
  RichPoor label = RichPoor::poor;
  double rho_beta = 0.0;
};

/**
 * For each shift lambda on the grid, the least singular direction of
 * A - lambda is the eigenvector of A whose eigenvalue is nearest to lambda,
 * and its residual is that distance. Shifts with residual <= eta are
 * classified rich/poor at scale eta.
 */
std::vector<NearNullEvent> near_null_vectors(const SymmetricMatrix& A,
                                             std::span<const double> lambda_grid, double eta,
                                             double alpha, std::size_t window,
                                             RegularizationMode mode, const DistributionSpec& dist,
                                             RngStream& rng);

/// Grid of step `step` over [-half_width, half_width], coarsened to `cap`
/// points when needed.
std::vector<double> lambda_grid(double half_width, double step, std::size_t cap);

struct NullVectorTrial {
  std::size_t trial_index = 0;
  TrialStatus status = TrialStatus::ok;
  std::string error;
  std::size_t grid_points = 0;
  std::size_t events = 0;
  std::size_t rich_events = 0;
};

struct NullVectorReport {
  double eta = 0.0;
  double alpha = 0.0;
  std::size_t window = 0;
  std::vector<NullVectorTrial> trials;
  std::size_t total_events = 0;
  std::size_t rich_events = 0;
  double rich_frequency = 0.0;
  ProportionInterval wilson;
  std::size_t failed = 0;
};

NullVectorReport null_vector_experiment(const ExperimentConfig& cfg);

struct EigenvectorReport {
  double scale = 0.0;
  double alpha = 0.0;
  std::size_t window = 0;
  std::vector<TrialResult> trials;
  /// histogram[k] = number of trials with exactly k rich eigenvectors.
  std::vector<std::size_t> rich_histogram;
  std::size_t total_rich = 0;
  std::size_t total_vectors = 0;
  double rich_frequency = 0.0;
  std::size_t failed = 0;
};

EigenvectorReport eigenvector_structure_experiment(const ExperimentConfig& cfg);

/// Regularization window used by the structure experiments: from
/// beta_override when set, otherwise from n^{-1/5}.
std::size_t experiment_window(const ExperimentConfig& cfg);

/// Throws std::invalid_argument (naming the config key) when the rich/poor
/// classification cannot run for this configuration, before any trial starts.
void check_structure_feasible(const ExperimentConfig& cfg);

/// max(||M||, C_op sqrt(n)): the norm fed to the threshold formula.
double effective_norm(const ExperimentConfig& cfg, double norm_M);

}  // namespace gaplab
