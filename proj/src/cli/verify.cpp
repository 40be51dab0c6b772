#include "cli/verify.hpp"

#include <cmath>
#include <functional>

#include "cli/output.hpp"
#include "gaplab/anticoncentration.hpp"
#include "gaplab/experiments.hpp"
#include "gaplab/lattice.hpp"
#include "gaplab/spectral.hpp"
#include "gaplab/theorems.hpp"

namespace gaplab::cli {

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

VerifyCheck check(const std::string& name, const std::function<std::string(bool&)>& body) {
  VerifyCheck c;
  c.name = name;
  try {
    c.detail = body(c.passed);
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(const RunConfig& cfg) {
  const auto rad = DistributionSpec::rademacher();
  std::vector<VerifyCheck> out;

  out.push_back(check("rho_exact_pair", [&](bool& ok) {
    const std::vector<double> x{1.0, 1.0};
    const double v = rho_exact(x, 0.5, rad).value;
    ok = close(v, 0.5, 1e-12);
    return "rho=" + format_double(v);
  }));
  out.push_back(check("rho_exact_four_ones", [&](bool& ok) {
    const std::vector<double> x{1.0, 1.0, 1.0, 1.0};
    const double v = rho_exact(x, 1.0, rad).value;
    ok = close(v, 0.625, 1e-12);
    return "rho=" + format_double(v);
  }));
  out.push_back(check("rho_exact_zero_vector", [&](bool& ok) {
    const std::vector<double> x(5, 0.0);
    const double v = rho_exact(x, 0.1, rad).value;
    ok = close(v, 1.0, 1e-12);
    return "rho=" + format_double(v);
  }));
  out.push_back(check("restriction_random", [&](bool& ok) {
    RngStream rng(cfg.experiment.master_seed, 101);
    std::size_t bad = 0;
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 2 + rng.below(9);
      std::vector<double> x(n);
      for (double& e : x) e = rng.normal();
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.below(2)) subset.push_back(i);
      if (subset.empty()) subset.push_back(0);
      if (!restriction_check(x, subset, 0.1 + rng.uniform(), rad).holds) ++bad;
    }
    ok = bad == 0;
    return "violations=" + std::to_string(bad);
  }));
  out.push_back(check("nu_threshold_n16", [&](bool& ok) {
    const double v = nu_threshold(16, 0.5, 1.0, 1.0).value;
    ok = close(v, 0.019686, 1e-6);
    return "nu=" + format_double(v);
  }));
  out.push_back(check("scale_parameters_n32768", [&](bool& ok) {
    const ScaleParameters p = scale_parameters(32768, 0.5, 1.0, ConstantsConfig{});
    ok = p.n_pow_b == 2.0 && p.beta == 0.125 && p.J == 5;
    return "n^b=" + format_double(p.n_pow_b) + " beta=" + format_double(p.beta) +
           " J=" + std::to_string(p.J);
  }));
  out.push_back(check("dyadic_level_boundaries", [&](bool& ok) {
    ok = dyadic_level(1.0) == 0 && dyadic_level(0.5) == 1 && dyadic_level(0.75) == 0 &&
         dyadic_level(0.25) == 2 && dyadic_level(0.3) == 1;
    return std::string("levels of 1, 0.5, 0.75, 0.25, 0.3");
  }));
  out.push_back(check("dist_to_lattice_closed_form", [&](bool& ok) {
    const std::vector<double> a{0.5, 0.5};
    const std::vector<double> b{0.3, 1.2};
    const std::vector<double> c{3.0, -2.0};
    const double da = dist_to_lattice(a);
    const double db = dist_to_lattice(b);
    ok = close(da, std::sqrt(0.5), 1e-15) && close(db, std::sqrt(0.13), 1e-12) && dist_to_lattice(c) == 0.0;
    return "d(0.5,0.5)=" + format_double(da);
  }));
  out.push_back(check("scan_scalings_half", [&](bool& ok) {
    const std::vector<double> y{0.5, 0.5};
    const LatticeScanResult r = scan_scalings(y, 1.0, 3.0, 0.01);
    ok = close(r.best_gamma, 2.0, 1e-12) && r.best_distance == 0.0;
    return "gamma=" + format_double(r.best_gamma) + " dist=" + format_double(r.best_distance);
  }));
  out.push_back(check("counting_image_n2_p3", [&](bool& ok) {
    const CountingInstance c = enumerate_S_rho(2, 3, 0.75, rad);
    ok = c.image_size == 9;
    return "image_size=" + std::to_string(c.image_size);
  }));
  out.push_back(check("phi_p_residues", [&](bool& ok) {
    const std::vector<std::int64_t> v{-1, 4, -6, 0};
    const auto r = phi_p(v, 3);
    ok = r == std::vector<std::int64_t>{2, 1, 0, 0};
    return std::string("phi_3(-1,4,-6,0)");
  }));
  out.push_back(check("eigen_2x2_closed_form", [&](bool& ok) {
    const auto A = SymmetricMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
    const Spectrum s = eigendecompose(A);
    ok = close(s.eigenvalue(0), 1.0, 1e-14) && close(s.eigenvalue(1), 3.0, 1e-14) &&
         s.residual_bound() < 1e-14;
    return "eigenvalues=" + format_double(s.eigenvalue(0)) + "," + format_double(s.eigenvalue(1));
  }));
  out.push_back(check("gaps_example", [&](bool& ok) {
    const std::vector<double> ev{1.0, 2.0, 4.0};
    const GapReport g = gaps(ev);
    ok = g.delta_min == 1.0 && g.argmin_index == 0;
    return "delta_min=" + format_double(g.delta_min);
  }));
  out.push_back(check("certificates_random_matrix", [&](bool& ok) {
    RngStream rng(cfg.experiment.master_seed, 202);
    const SymmetricMatrix A = sample_wigner(20, rad, rng);
    const TrialResult r = analyze_matrix(A, 0);
    const double scale = std::max(1.0, r.operator_norm);
    ok = r.residual_bound <= 1e-8 * scale && r.gram_deviation <= 1e-8 && r.trace_error <= 1e-8 &&
         r.interlacing_violations == 0 && r.witness_failures == 0;
    return "residual=" + format_double(r.residual_bound) +
           " interlacing_violations=" + std::to_string(r.interlacing_violations);
  }));
  out.push_back(check("config_round_trip", [&](bool& ok) {
    const RunConfig back = from_json(nlohmann::json::parse(to_json(cfg).dump()));
    ok = back == cfg;
    return std::string(ok ? "equal" : "differs");
  }));
  return out;
}

}  // namespace gaplab::cli
