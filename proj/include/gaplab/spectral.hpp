#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "gaplab/ensembles.hpp"

namespace gaplab {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::size_t n, std::size_t cap, std::size_t index);
  std::size_t n;
  std::size_t cap;
  std::size_t index;
};

/**
 * Eigen-decomposition of a symmetric matrix: eigenvalues ascending, eigenvector
 * i paired with eigenvalue i and normalized so that its first coordinate of
 * magnitude above 1e-10 is positive.
 *
 * Indices throughout this header are zero-based: eigenvalue 0 is the
 * smallest, and gap i is eigenvalue(i + 1) - eigenvalue(i).
 */
class Spectrum {
 public:
  Spectrum(std::vector<double> eigenvalues, std::vector<double> vectors_rowwise,
           double residual_bound);

  [[nodiscard]] std::size_t n() const noexcept { return eigenvalues_.size(); }
  [[nodiscard]] const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] double eigenvalue(std::size_t i) const { return eigenvalues_.at(i); }
  [[nodiscard]] std::span<const double> eigenvector(std::size_t i) const;
  [[nodiscard]] bool has_eigenvectors() const noexcept { return !vectors_.empty(); }
  /// max_i ||A v_i - lambda_i v_i||_2 for the matrix that produced this spectrum.
  [[nodiscard]] double residual_bound() const noexcept { return residual_bound_; }
  /// max_{i,j} |<v_i, v_j> - delta_ij|.
  [[nodiscard]] double gram_deviation() const;

 private:
  std::vector<double> eigenvalues_;
  std::vector<double> vectors_;  // row i holds eigenvector i
  double residual_bound_;
};

struct EigenOptions {
  /// QL sweeps allowed per eigenvalue before giving up.
  std::size_t max_sweeps = 30;
};

/// Householder tridiagonalization followed by implicit-shift QL.
Spectrum eigendecompose(const SymmetricMatrix& A, EigenOptions options = {});
/// Same algorithm without accumulating eigenvectors; returns sorted eigenvalues.
std::vector<double> eigenvalues_only(const SymmetricMatrix& A, EigenOptions options = {});

/// max_i |lambda_i(A)|
double operator_norm(const SymmetricMatrix& A);

struct GapReport {
  std::vector<double> gaps;
  double delta_min = 0.0;
  std::size_t argmin_index = 0;
};

GapReport gaps(const Spectrum& spectrum);
GapReport gaps(std::span<const double> sorted_eigenvalues);

/// |trace(A) - sum(lambda)| / max(1, |trace(A)|, sum |lambda|)
double trace_identity_error(const SymmetricMatrix& A, const Spectrum& spectrum);

enum class SimpleSpectrum { yes, indeterminate };

/// "yes" when delta_min exceeds ten times the residual bound.
SimpleSpectrum classify_simple_spectrum(const GapReport& report, double residual_bound);

// ---------------------------------------------------------------------------
// Principal minor decomposition

struct MinorDecomposition {
  SymmetricMatrix head;          // A with row/column k removed
  std::vector<double> column;    // column k of A without entry k
  double corner = 0.0;           // a(k, k)
  std::size_t removed_index = 0;
};

MinorDecomposition minor_decompose(const SymmetricMatrix& A, std::size_t k);
SymmetricMatrix reassemble(const MinorDecomposition& parts);

struct InterlacingReport {
  /// Minor indices i where lambda_i(full) - tol <= mu_i <= lambda_{i+1}(full) + tol fails.
  std::vector<std::size_t> violations;
  [[nodiscard]] bool passed() const noexcept { return violations.empty(); }
};

InterlacingReport interlacing_check(std::span<const double> full, std::span<const double> minor,
                                    double tol);
InterlacingReport interlacing_check(const Spectrum& full, const Spectrum& minor, double tol);

/**
 * Exact identity behind the gap reduction: with v the unit eigenvector of
 * lambda_i(A), w the unit eigenvector of mu_i(minor) and x the deleted column,
 *   |v_k <w, x>| = |mu_i - lambda_i| |<w, v'>| <= |mu_i - lambda_i|.
 */
struct GapWitness {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

GapWitness gap_reduction_witness(const SymmetricMatrix& A, std::size_t i, std::size_t k,
                                 double tol);
/// Same check against precomputed spectra of A and of minor_decompose(A, k).head.
GapWitness gap_reduction_witness(const Spectrum& full, const Spectrum& minor,
                                 const MinorDecomposition& parts, std::size_t i, double tol);

}  // namespace gaplab
