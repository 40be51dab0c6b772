#include "gaplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gaplab {

ConvergenceError::ConvergenceError(std::size_t n_, std::size_t cap_, std::size_t index_)
    : std::runtime_error("eigendecompose: QL iteration did not converge for eigenvalue " +
                         std::to_string(index_) + " of a " + std::to_string(n_) + "x" +
                         std::to_string(n_) + " matrix within " + std::to_string(cap_) +
                         " sweeps"),
      n(n_),
      cap(cap_),
      index(index_) {}

Spectrum::Spectrum(std::vector<double> eigenvalues, std::vector<double> vectors_rowwise,
                   double residual_bound)
    : eigenvalues_(std::move(eigenvalues)),
      vectors_(std::move(vectors_rowwise)),
      residual_bound_(residual_bound) {}

std::span<const double> Spectrum::eigenvector(std::size_t i) const {
  if (i >= n()) throw std::out_of_range("Spectrum::eigenvector: index out of range");
  if (vectors_.empty()) throw std::logic_error("Spectrum: eigenvectors were not computed");
  return {vectors_.data() + i * n(), n()};
}

double Spectrum::gram_deviation() const {
  const std::size_t n_ = n();
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const auto vi = eigenvector(i);
    for (std::size_t j = i; j < n_; ++j) {
      const auto vj = eigenvector(j);
      double dot = std::inner_product(vi.begin(), vi.end(), vj.begin(), 0.0);
      if (i == j) dot -= 1.0;
      worst = std::max(worst, std::abs(dot));
    }
  }
  return worst;
}

namespace {

// Householder reduction to tridiagonal form (Martin, Reinsch, Wilkinson tred2).
// On exit V (row-major) holds the orthogonal transform, d the diagonal and
// e[1..n-1] the subdiagonal.
void tridiagonalize(std::size_t n, std::vector<double>& V, std::vector<double>& d,
                    std::vector<double>& e) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return V[i * n + j]; };

  for (std::size_t j = 0; j < n; ++j) d[j] = at(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = at(i - 1, j);
        at(i, j) = 0.0;
        at(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        at(j, i) = f;
        g = e[j] + at(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += at(k, j) * d[k];
          e[k] += at(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) at(k, j) -= (f * e[k] + g * d[k]);
        d[j] = at(i - 1, j);
        at(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    at(n - 1, i) = at(i, i);
    at(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = at(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += at(k, i + 1) * at(k, j);
        for (std::size_t k = 0; k <= i; ++k) at(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) at(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = at(n - 1, j);
    at(n - 1, j) = 0.0;
  }
  at(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e) with the shift taken from the leading
// 2x2 block (Wilkinson). Q holds eigenvector candidates as rows; rotations act
// on adjacent rows, so the inner loop is contiguous. Q may be empty.
void tridiagonal_ql(std::size_t n, std::vector<double>& d, std::vector<double>& e,
                    std::vector<double>& Q, std::size_t max_sweeps) {
  const bool vectors = !Q.empty();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      std::size_t sweeps = 0;
      do {
        if (++sweeps > max_sweeps) throw ConvergenceError(n, max_sweeps, l);

        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (vectors) {
            double* row_i = Q.data() + ii * n;
            double* row_next = Q.data() + (ii + 1) * n;
            for (std::size_t k = 0; k < n; ++k) {
              const double t = row_next[k];
              row_next[k] = s * row_i[k] + c * t;
              row_i[k] = c * row_i[k] - s * t;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

std::vector<double> to_rows(const SymmetricMatrix& A) {
  return {A.data().begin(), A.data().end()};
}

}  // namespace

Spectrum eigendecompose(const SymmetricMatrix& A, EigenOptions options) {
  const std::size_t n = A.n();
  for (double v : A.data())
    if (!std::isfinite(v)) throw std::invalid_argument("eigendecompose: non-finite entry");

  std::vector<double> V = to_rows(A);
  std::vector<double> d(n);
  std::vector<double> e(n);
  tridiagonalize(n, V, d, e);

  // Column j of V is a basis vector; store it as row j of Q.
  std::vector<double> Q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) Q[j * n + i] = V[i * n + j];
  tridiagonal_ql(n, d, e, Q, options.max_sweeps);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  std::vector<double> values(n);
  std::vector<double> vectors(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    values[r] = d[order[r]];
    const double* src = Q.data() + order[r] * n;
    double* dst = vectors.data() + r * n;
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += src[k] * src[k];
    norm = std::sqrt(norm);
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(src[k]) > 1e-10 * norm) {
        sign = src[k] < 0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) dst[k] = sign * src[k] / norm;
  }

  double residual = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::span<const double> v(vectors.data() + r * n, n);
    const std::vector<double> Av = A.multiply(v);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double diff = Av[k] - values[r] * v[k];
      s += diff * diff;
    }
    residual = std::max(residual, std::sqrt(s));
  }
  return Spectrum(std::move(values), std::move(vectors), residual);
}

std::vector<double> eigenvalues_only(const SymmetricMatrix& A, EigenOptions options) {
  const std::size_t n = A.n();
  for (double v : A.data())
    if (!std::isfinite(v)) throw std::invalid_argument("eigenvalues_only: non-finite entry");
  std::vector<double> V = to_rows(A);
  std::vector<double> d(n);
  std::vector<double> e(n);
  tridiagonalize(n, V, d, e);
  std::vector<double> none;
  tridiagonal_ql(n, d, e, none, options.max_sweeps);
  std::sort(d.begin(), d.end());
  return d;
}

double operator_norm(const SymmetricMatrix& A) {
  const std::vector<double> values = eigenvalues_only(A);
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

GapReport gaps(std::span<const double> sorted) {
  if (sorted.size() < 2) throw std::invalid_argument("gaps: need at least two eigenvalues");
  GapReport report;
  report.gaps.resize(sorted.size() - 1);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) report.gaps[i] = sorted[i + 1] - sorted[i];
  const auto it = std::min_element(report.gaps.begin(), report.gaps.end());
  report.delta_min = *it;
  report.argmin_index = static_cast<std::size_t>(it - report.gaps.begin());
  return report;
}

GapReport gaps(const Spectrum& spectrum) { return gaps(std::span(spectrum.eigenvalues())); }

double trace_identity_error(const SymmetricMatrix& A, const Spectrum& spectrum) {
  const double tr = A.trace();
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double l : spectrum.eigenvalues()) {
    sum += l;
    abs_sum += std::abs(l);
  }
  return std::abs(tr - sum) / std::max({1.0, std::abs(tr), abs_sum});
}

SimpleSpectrum classify_simple_spectrum(const GapReport& report, double residual_bound) {
  return report.delta_min > 10.0 * residual_bound ? SimpleSpectrum::yes
                                                  : SimpleSpectrum::indeterminate;
}

// ---------------------------------------------------------------------------

MinorDecomposition minor_decompose(const SymmetricMatrix& A, std::size_t k) {
  const std::size_t n = A.n();
  if (n < 2) throw std::invalid_argument("minor_decompose: need n >= 2");
  if (k >= n) {
    throw std::out_of_range("minor_decompose: index " + std::to_string(k) +
                            " out of range for n = " + std::to_string(n));
  }
  MinorDecomposition parts{SymmetricMatrix(n - 1), std::vector<double>(n - 1), A(k, k), k};
  auto skip = [k](std::size_t i) { return i < k ? i : i + 1; };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    parts.column[i] = A(skip(i), k);
    for (std::size_t j = i; j + 1 < n; ++j) parts.head.set(i, j, A(skip(i), skip(j)));
  }
  return parts;
}

SymmetricMatrix reassemble(const MinorDecomposition& parts) {
  const std::size_t n = parts.head.n() + 1;
  const std::size_t k = parts.removed_index;
  if (parts.column.size() != n - 1 || k >= n) throw DimensionMismatch("reassemble: inconsistent parts");
  SymmetricMatrix A(n);
  auto skip = [k](std::size_t i) { return i < k ? i : i + 1; };
  A.set(k, k, parts.corner);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    A.set(skip(i), k, parts.column[i]);
    for (std::size_t j = i; j + 1 < n; ++j) A.set(skip(i), skip(j), parts.head(i, j));
  }
  return A;
}

InterlacingReport interlacing_check(std::span<const double> full, std::span<const double> minor,
                                    double tol) {
  if (minor.size() + 1 != full.size()) {
    throw DimensionMismatch("interlacing_check: minor must have dimension n - 1");
  }
  InterlacingReport report;
  for (std::size_t i = 0; i < minor.size(); ++i) {
    if (!(full[i] - tol <= minor[i] && minor[i] <= full[i + 1] + tol)) {
      report.violations.push_back(i);
    }
  }
  return report;
}

InterlacingReport interlacing_check(const Spectrum& full, const Spectrum& minor, double tol) {
  return interlacing_check(std::span(full.eigenvalues()), std::span(minor.eigenvalues()), tol);
}

GapWitness gap_reduction_witness(const Spectrum& full, const Spectrum& minor,
                                 const MinorDecomposition& parts, std::size_t i, double tol) {
  if (minor.n() + 1 != full.n() || parts.column.size() != minor.n()) {
    throw DimensionMismatch("gap_reduction_witness: inconsistent dimensions");
  }
  if (i >= minor.n()) {
    throw std::out_of_range("gap_reduction_witness: eigenvalue index " + std::to_string(i) +
                            " must be below n - 1 = " + std::to_string(minor.n()));
  }
  const auto v = full.eigenvector(i);
  const auto w = minor.eigenvector(i);
  const double wx = std::inner_product(w.begin(), w.end(), parts.column.begin(), 0.0);
  GapWitness out;
  out.lhs = std::abs(v[parts.removed_index] * wx);
  out.rhs = std::abs(minor.eigenvalue(i) - full.eigenvalue(i));
  out.holds = out.lhs <= out.rhs + tol;
  return out;
}

GapWitness gap_reduction_witness(const SymmetricMatrix& A, std::size_t i, std::size_t k,
                                 double tol) {
  const MinorDecomposition parts = minor_decompose(A, k);
  if (i + 1 >= A.n()) {
    throw std::out_of_range("gap_reduction_witness: eigenvalue index " + std::to_string(i) +
                            " must be below n - 1");
  }
  const Spectrum full = eigendecompose(A);
  const Spectrum minor = eigendecompose(parts.head);
  return gap_reduction_witness(full, minor, parts, i, tol);
}

}  // namespace gaplab
