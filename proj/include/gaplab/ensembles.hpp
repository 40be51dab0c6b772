#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaplab/rng.hpp"

namespace gaplab {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Entry laws

enum class DistributionKind { rademacher, gaussian, uniform_pm, lazy_rademacher };

struct Atom {
  double value;
  double probability;
};

/**
 * Mean-zero, variance-one entry law.
 *
 * `lazy_probability` is the mass at zero for lazy_rademacher; the remaining
 * atoms sit at +-1/sqrt(1 - q) so the variance stays one. `K` is a
 * subgaussian constant in the sense P(|X| >= t) <= 2 exp(-t^2 / K^2). It is
 * recorded, never enforced.
 */
struct DistributionSpec {
  DistributionKind kind = DistributionKind::rademacher;
  double lazy_probability = 0.5;
  double K = 0.0;  // 0 means "use default_subgaussian_constant"

  static DistributionSpec rademacher() { return {}; }
  static DistributionSpec gaussian() { return {DistributionKind::gaussian, 0.5, 0.0}; }
  static DistributionSpec uniform_pm() { return {DistributionKind::uniform_pm, 0.5, 0.0}; }
  static DistributionSpec lazy_rademacher(double q) {
    return {DistributionKind::lazy_rademacher, q, 0.0};
  }

  [[nodiscard]] bool finite_atoms() const noexcept {
    return kind == DistributionKind::rademacher ||
           kind == DistributionKind::lazy_rademacher;
  }
  /// Atom list with probabilities; empty for continuous laws.
  [[nodiscard]] std::vector<Atom> atoms() const;
  /// K if set, otherwise a valid constant for the kind.
  [[nodiscard]] double subgaussian_constant() const;
  /// Throws std::invalid_argument if parameters are out of range.
  void validate() const;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

std::string to_string(DistributionKind kind);
DistributionKind parse_distribution_kind(const std::string& name);

double sample_entry(const DistributionSpec& dist, RngStream& rng);

// ---------------------------------------------------------------------------
// Matrices

/// Dense real symmetric matrix. Every write goes through set(), which stores
/// both (i, j) and (j, i), so symmetry is exact.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(std::size_t n);

  static SymmetricMatrix zero(std::size_t n) { return SymmetricMatrix(n); }
  static SymmetricMatrix identity(std::size_t n, double scale = 1.0);
  /// Builds from a full row list; rejects non-square or non-symmetric input.
  static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * n_ + j];
  }
  void set(std::size_t i, std::size_t j, double value) noexcept {
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = value;
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  [[nodiscard]] double trace() const noexcept;
  [[nodiscard]] double frobenius_norm() const noexcept;
  [[nodiscard]] bool is_symmetric() const noexcept;
  void scale(double factor) noexcept;
  /// y = A x
  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Entries on and above the diagonal are i.i.d. draws in row-major order.
SymmetricMatrix sample_wigner(std::size_t n, const DistributionSpec& dist, RngStream& rng);

SymmetricMatrix compose(const SymmetricMatrix& M, const SymmetricMatrix& N);

// ---------------------------------------------------------------------------
// Deterministic perturbations

enum class PerturbationKind { zero, scaled_identity, diagonal_ramp, rank_one, custom };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::zero;
  double scale = 0.0;
  /// Unit direction for rank_one; empty means e_1.
  std::vector<double> direction;
  std::filesystem::path file;
  std::optional<double> target_norm;

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

std::string to_string(PerturbationKind kind);
PerturbationKind parse_perturbation_kind(const std::string& name);

SymmetricMatrix make_perturbation(const PerturbationSpec& spec, std::size_t n);

/// Custom perturbation format: "n" followed by the n(n+1)/2 upper-triangle
/// entries in row-major order, whitespace separated.
SymmetricMatrix read_perturbation_file(const std::filesystem::path& path);
SymmetricMatrix parse_perturbation_text(const std::string& text);
void write_perturbation_file(const SymmetricMatrix& M, const std::filesystem::path& path);

}  // namespace gaplab
