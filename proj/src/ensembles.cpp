#include "gaplab/ensembles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gaplab/spectral.hpp"

namespace gaplab {

namespace {
// For a law bounded by B, K = B / sqrt(ln 2) satisfies the subgaussian tail
// definition: 2 exp(-t^2/K^2) >= 1 for t <= B and the tail is empty beyond B.
double bounded_constant(double bound) { return bound / std::sqrt(std::log(2.0)); }
}  // namespace

std::vector<Atom> DistributionSpec::atoms() const {
  switch (kind) {
    case DistributionKind::rademacher:
      return {{-1.0, 0.5}, {1.0, 0.5}};
    case DistributionKind::lazy_rademacher: {
      const double q = lazy_probability;
      const double a = 1.0 / std::sqrt(1.0 - q);
      const double side = 0.5 * (1.0 - q);
      // side + q + side == 1 exactly would need q dyadic; put the rounding
      // residue on the centre atom so the list sums to 1 in floating point.
      return {{-a, side}, {0.0, 1.0 - 2.0 * side}, {a, side}};
    }
    case DistributionKind::gaussian:
    case DistributionKind::uniform_pm:
      return {};
  }
  return {};
}

double DistributionSpec::subgaussian_constant() const {
  if (K > 0.0) return K;
  switch (kind) {
    case DistributionKind::rademacher:
      return bounded_constant(1.0);
    case DistributionKind::lazy_rademacher:
      return bounded_constant(1.0 / std::sqrt(1.0 - lazy_probability));
    case DistributionKind::uniform_pm:
      return bounded_constant(std::sqrt(3.0));
    case DistributionKind::gaussian:
      return std::sqrt(8.0 / 3.0);
  }
  return 1.0;
}

void DistributionSpec::validate() const {
  if (kind == DistributionKind::lazy_rademacher &&
      !(lazy_probability >= 0.0 && lazy_probability < 1.0)) {
    throw std::invalid_argument("lazy_rademacher: probability of zero must lie in [0, 1)");
  }
  if (K < 0.0 || !std::isfinite(K)) {
    throw std::invalid_argument("subgaussian constant K must be finite and non-negative");
  }
}

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::rademacher: return "rademacher";
    case DistributionKind::gaussian: return "gaussian";
    case DistributionKind::uniform_pm: return "uniform_pm";
    case DistributionKind::lazy_rademacher: return "lazy_rademacher";
  }
  return "unknown";
}

DistributionKind parse_distribution_kind(const std::string& name) {
  if (name == "rademacher") return DistributionKind::rademacher;
  if (name == "gaussian") return DistributionKind::gaussian;
  if (name == "uniform_pm") return DistributionKind::uniform_pm;
  if (name == "lazy_rademacher") return DistributionKind::lazy_rademacher;
  throw std::invalid_argument("unknown distribution kind '" + name + "'");
}

double sample_entry(const DistributionSpec& dist, RngStream& rng) {
  switch (dist.kind) {
    case DistributionKind::rademacher:
      return (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
    case DistributionKind::gaussian:
      return rng.normal();
    case DistributionKind::uniform_pm:
      return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case DistributionKind::lazy_rademacher: {
      const double u = rng.uniform();
      const double q = dist.lazy_probability;
      if (u < q) return 0.0;
      const double a = 1.0 / std::sqrt(1.0 - q);
      return u < q + 0.5 * (1.0 - q) ? -a : a;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

SymmetricMatrix::SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw std::invalid_argument("SymmetricMatrix: dimension must be at least 1");
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n, double scale) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, scale);
  return m;
}

SymmetricMatrix SymmetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("SymmetricMatrix: empty row list");
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw DimensionMismatch("SymmetricMatrix: row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " +
                              std::to_string(n));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (rows[i][j] != rows[j][i]) {
        throw std::invalid_argument("SymmetricMatrix: input not symmetric at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      m.set(i, j, rows[i][j]);
    }
  }
  return m;
}

double SymmetricMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
  return t;
}

double SymmetricMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool SymmetricMatrix::is_symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (data_[i * n_ + j] != data_[j * n_ + i]) return false;
  return true;
}

void SymmetricMatrix::scale(double factor) noexcept {
  for (double& v : data_) v *= factor;
}

std::vector<double> SymmetricMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw DimensionMismatch("SymmetricMatrix::multiply: size mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    const double* r = data_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

SymmetricMatrix sample_wigner(std::size_t n, const DistributionSpec& dist, RngStream& rng) {
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m.set(i, j, sample_entry(dist, rng));
  return m;
}

SymmetricMatrix compose(const SymmetricMatrix& M, const SymmetricMatrix& N) {
  if (M.n() != N.n()) {
    throw DimensionMismatch("compose: dimensions " + std::to_string(M.n()) + " and " +
                            std::to_string(N.n()) + " differ");
  }
  SymmetricMatrix out(M.n());
  for (std::size_t i = 0; i < M.n(); ++i)
    for (std::size_t j = i; j < M.n(); ++j) out.set(i, j, M(i, j) + N(i, j));
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::zero: return "zero";
    case PerturbationKind::scaled_identity: return "scaled_identity";
    case PerturbationKind::diagonal_ramp: return "diagonal_ramp";
    case PerturbationKind::rank_one: return "rank_one";
    case PerturbationKind::custom: return "custom";
  }
  return "unknown";
}

PerturbationKind parse_perturbation_kind(const std::string& name) {
  if (name == "zero") return PerturbationKind::zero;
  if (name == "scaled_identity") return PerturbationKind::scaled_identity;
  if (name == "diagonal_ramp") return PerturbationKind::diagonal_ramp;
  if (name == "rank_one") return PerturbationKind::rank_one;
  if (name == "custom") return PerturbationKind::custom;
  throw std::invalid_argument("unknown perturbation kind '" + name + "'");
}

SymmetricMatrix make_perturbation(const PerturbationSpec& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("make_perturbation: n must be at least 1");
  SymmetricMatrix m(n);
  switch (spec.kind) {
    case PerturbationKind::zero:
      break;
    case PerturbationKind::scaled_identity:
      m = SymmetricMatrix::identity(n, spec.scale);
      break;
    case PerturbationKind::diagonal_ramp:
      for (std::size_t i = 0; i < n; ++i)
        m.set(i, i, spec.scale * static_cast<double>(i + 1) / static_cast<double>(n));
      break;
    case PerturbationKind::rank_one: {
      std::vector<double> u = spec.direction;
      if (u.empty()) {
        u.assign(n, 0.0);
        u[0] = 1.0;
      }
      if (u.size() != n) throw DimensionMismatch("rank_one: direction has wrong length");
      double norm = 0.0;
      for (double v : u) norm += v * v;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw std::invalid_argument("rank_one: zero direction");
      for (double& v : u) v /= norm;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m.set(i, j, spec.scale * u[i] * u[j]);
      break;
    }
    case PerturbationKind::custom: {
      m = read_perturbation_file(spec.file);
      if (m.n() != n) {
        throw DimensionMismatch("custom perturbation " + spec.file.string() + " has n = " +
                                std::to_string(m.n()) + ", expected " + std::to_string(n));
      }
      break;
    }
  }
  if (spec.target_norm) {
    const double target = *spec.target_norm;
    if (!(target > 0.0)) throw std::invalid_argument("target_norm must be positive");
    const double current = operator_norm(m);
    if (current == 0.0) throw std::invalid_argument("cannot rescale a zero perturbation to a target norm");
    m.scale(target / current);
  }
  return m;
}

SymmetricMatrix parse_perturbation_text(const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  long long header = 0;
  if (!(in >> header) || header < 1) throw ParseError("perturbation file: missing or invalid dimension header");
  const auto n = static_cast<std::size_t>(header);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ParseError("perturbation file: non-numeric token after " +
                                  std::to_string(values.size()) + " entries");
  for (double x : values)
    if (!std::isfinite(x)) throw ParseError("perturbation file: non-finite entry");

  SymmetricMatrix m(n);
  const std::size_t upper = n * (n + 1) / 2;
  if (values.size() == upper) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m.set(i, j, values[k++]);
    return m;
  }
  if (values.size() == n * n && n > 1) {
    // A full square listing is accepted only if it is symmetric.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        if (values[i * n + j] != values[j * n + i]) {
          throw ParseError("perturbation file: matrix not symmetric at (" + std::to_string(i) +
                           ", " + std::to_string(j) + ")");
        }
        m.set(i, j, values[i * n + j]);
      }
    }
    return m;
  }
  throw ParseError("perturbation file: expected " + std::to_string(upper) +
                   " upper-triangle entries for n = " + std::to_string(n) + ", found " +
                   std::to_string(values.size()));
}

SymmetricMatrix read_perturbation_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open perturbation file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_perturbation_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_perturbation_file(const SymmetricMatrix& M, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.imbue(std::locale::classic());
  out.precision(17);
  out << M.n() << '\n';
  for (std::size_t i = 0; i < M.n(); ++i) {
    for (std::size_t j = i; j < M.n(); ++j) out << (j == i ? "" : " ") << M(i, j);
    out << '\n';
  }
}

}  // namespace gaplab
