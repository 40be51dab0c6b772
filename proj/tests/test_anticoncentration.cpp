#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gaplab/anticoncentration.hpp"
#include "test_support.hpp"

using namespace gaplab;
namespace gt = gaplab::testing;

namespace {

const DistributionSpec kRad = DistributionSpec::rademacher();

// Independent oracle: enumerate every outcome, then try every attainable sum
// s as the left edge of the window [s, s + 2 eps]. Quadratic in the number
// of outcomes, so only for small n.
double brute_force_rho(const std::vector<double>& x, double eps, const DistributionSpec& dist) {
  const auto atoms = dist.atoms();
  std::vector<std::pair<double, double>> outcomes{{0.0, 1.0}};
  for (double xi : x) {
    std::vector<std::pair<double, double>> next;
    for (const auto& [s, p] : outcomes)
      for (const Atom& a : atoms) next.emplace_back(s + xi * a.value, p * a.probability);
    outcomes = std::move(next);
  }
  double scale = 2.0 * eps;
  for (double xi : x) scale += std::abs(xi) * 2.0;
  const double slack = 1e-9 * std::max(1.0, scale);
  double best = 0.0;
  for (const auto& [left, unused] : outcomes) {
    double mass = 0.0;
    for (const auto& [s, p] : outcomes)
      if (s >= left - slack && s <= left + 2.0 * eps + slack) mass += p;
    best = std::max(best, mass);
  }
  return best;
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("rho_exact hand-enumerated values") {
  CHECK(rho_exact(std::vector<double>{1, 1}, 0.5, kRad).value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rho_exact(std::vector<double>{1, 1, 1, 1}, 1.0, kRad).value == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(rho_exact(std::vector<double>{0, 0, 0}, 0.3, kRad).value == 1.0);
  CHECK(rho_exact(std::vector<double>{}, 0.0, kRad).value == 1.0);
  CHECK(rho_exact(std::vector<double>{1, 1}, 1.0, kRad).value == doctest::Approx(0.75));
  const RhoEstimate e = rho_exact(std::vector<double>{1, 1}, 0.5, kRad);
  CHECK(e.method == RhoMethod::exact);
  CHECK(e.trials == 0);
  CHECK(e.std_error == 0.0);
  CHECK(std::abs(e.optimal_center) <= 0.5);  // window must contain the sum 0
}

TEST_CASE("rho_exact with the lazy law at radius 0 is the largest atom mass of the sum") {
  const auto lazy = DistributionSpec::lazy_rademacher(0.5);
  CHECK(rho_exact(std::vector<double>{1.0}, 0.0, lazy).value == doctest::Approx(0.5));
  // Two coordinates: P(sum = 0) = 1/4 + 2 * (1/4)(1/4) = 3/8.
  CHECK(rho_exact(std::vector<double>{1.0, 1.0}, 0.0, lazy).value == doctest::Approx(0.375));
}

TEST_CASE("rho_exact matches the brute-force oracle") {
  RngStream rng(30, 0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const auto x = gt::random_mixed(rng, n);
    const double eps = rng.below(4) == 0 ? 0.0 : 3.0 * rng.uniform();
    const auto& dist = t % 3 == 0 ? DistributionSpec::lazy_rademacher(0.3) : kRad;
    CAPTURE(t);
    REQUIRE(rho_exact(x, eps, dist).value == doctest::Approx(brute_force_rho(x, eps, dist)).epsilon(1e-12));
  }
}

TEST_CASE("rho_exact caps and errors") {
  CHECK(default_exact_cap(2) == 22);
  CHECK(default_exact_cap(3) == 13);
  CHECK_THROWS_AS(rho_exact(std::vector<double>(23, 1.0), 0.5, kRad), CapExceeded);
  CHECK_THROWS_AS(rho_exact(std::vector<double>(14, 1.0), 0.5, DistributionSpec::lazy_rademacher(0.5)), CapExceeded);
  CHECK_NOTHROW(rho_exact(std::vector<double>(13, 1.0), 0.5, DistributionSpec::lazy_rademacher(0.5)));
  CHECK_THROWS_AS(rho_exact(std::vector<double>{1}, 0.5, DistributionSpec::gaussian()), std::invalid_argument);
  CHECK_THROWS_AS(rho_exact(std::vector<double>{1}, -0.1, kRad), std::invalid_argument);
  CHECK_THROWS_AS(rho_exact(std::vector<double>(5, 1.0), 0.5, kRad, ExactOptions{4}), CapExceeded);
}

TEST_CASE("rho_exact at n = 22 runs and equals the binomial central mass") {
  const std::vector<double> x(22, 1.0);
  // Sums are even integers; a radius-0.5 window catches one of them.
  CHECK(rho_exact(x, 0.5, kRad).value == doctest::Approx(705432.0 / 4194304.0).epsilon(1e-12));
}

TEST_CASE("rho_mc agrees with exact and closed-form values") {
  RngStream rng(31, 0);
  const RhoEstimate pair = rho_mc(std::vector<double>{1, 1}, 0.5, kRad, 100000, rng);
  CHECK(pair.method == RhoMethod::monte_carlo);
  CHECK(pair.trials == 100000);
  CHECK(std::abs(pair.value - 0.5) <= 3 * pair.std_error);

  const RhoEstimate e1 = rho_mc(std::vector<double>{1, 0, 0}, 0.25, kRad, 100000, rng);
  CHECK(std::abs(e1.value - 0.5) <= 3 * e1.std_error + 0.01);

  const auto v = gt::random_unit(rng, 6);
  const RhoEstimate g = rho_mc(v, 0.5, DistributionSpec::gaussian(), 100000, rng);
  const double oracle = normal_cdf(0.5) - normal_cdf(-0.5);
  CHECK(oracle == doctest::Approx(0.3829249225480262).epsilon(1e-12));
  CHECK(std::abs(g.value - oracle) <= 3 * g.std_error + 0.01);

  CHECK_THROWS_AS(rho_mc(std::vector<double>{1}, 0.5, kRad, 999, rng), std::invalid_argument);
}

TEST_CASE("rho_mc is within 3 std_error + 0.01 of exact on random instances") {
  RngStream rng(32, 0);
  int agree = 0;
  const int instances = 60;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.below(16);
    const auto x = gt::random_mixed(rng, n);
    const double eps = 0.1 + 2.0 * rng.uniform();
    const double exact = rho_exact(x, eps, kRad).value;
    const RhoEstimate mc = rho_mc(x, eps, kRad, 20000, rng);
    if (std::abs(mc.value - exact) <= 3 * mc.std_error + 0.01) ++agree;
  }
  CHECK(agree >= instances - 2);
}

TEST_CASE("property: monotone in the radius") {
  RngStream rng(33, 0);
  for (int t = 0; t < 200; ++t) {
    const auto x = gt::random_mixed(rng, 1 + rng.below(10));
    const double r1 = 2.0 * rng.uniform();
    const double r2 = r1 + 2.0 * rng.uniform();
    REQUIRE(rho_exact(x, r1, kRad).value <= rho_exact(x, r2, kRad).value);
  }
}

TEST_CASE("property: scaling covariance rho(t x, t eps) = rho(x, eps)") {
  RngStream rng(34, 0);
  for (int t = 0; t < 200; ++t) {
    auto x = gt::random_mixed(rng, 1 + rng.below(10));
    const double eps = 2.0 * rng.uniform();
    const double s = 0.01 + 10.0 * rng.uniform();
    const double base = rho_exact(x, eps, kRad).value;
    for (double& v : x) v *= s;
    CAPTURE(s);
    REQUIRE(rho_exact(x, s * eps, kRad).value == base);
  }
}

TEST_CASE("property: permutation and sign invariance for rademacher") {
  RngStream rng(35, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(10);
    auto x = gt::random_mixed(rng, n);
    const double eps = 2.0 * rng.uniform();
    const double base = rho_exact(x, eps, kRad).value;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(x[i], x[rng.below(i + 1)]);
    for (double& v : x)
      if (rng.below(2)) v = -v;
    REQUIRE(rho_exact(x, eps, kRad).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("restriction check examples") {
  auto r = restriction_check(std::vector<double>{1, 1}, std::vector<std::size_t>{0}, 0.5, kRad);
  CHECK(r.rho_full == doctest::Approx(0.5));
  CHECK(r.rho_sub == doctest::Approx(0.5));
  CHECK(r.holds);
  r = restriction_check(std::vector<double>{1, 1, 1, 1}, std::vector<std::size_t>{0, 1}, 1.0, kRad);
  CHECK(r.rho_full == doctest::Approx(0.625));
  CHECK(r.rho_sub == doctest::Approx(0.75));
  CHECK(r.holds);
  r = restriction_check(std::vector<double>{1, 0}, std::vector<std::size_t>{1}, 0.5, kRad);
  CHECK(r.rho_full == doctest::Approx(0.5));
  CHECK(r.rho_sub == 1.0);
  CHECK(r.holds);
  CHECK_THROWS_AS(restriction_check(std::vector<double>{1, 0}, std::vector<std::size_t>{2}, 0.5, kRad),
                  std::out_of_range);
}

TEST_CASE("property: restriction never increases concentration (n <= 12)") {
  RngStream rng(36, 0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const auto x = gt::random_mixed(rng, n);
    const auto subset = gt::random_subset(rng, n);
    for (double r : {0.0, 0.25, 0.5, 1.0, 2.0}) REQUIRE(restriction_check(x, subset, r, kRad).holds);
  }
}

TEST_CASE("regularized rho examples") {
  RngStream rng(37, 0);
  const RegularizationMode exact{};
  auto reg = rho_regularized(std::vector<double>{1, 1, 1, 1}, 0.5, 2, exact, kRad, rng);
  CHECK(reg.value == doctest::Approx(0.5));
  CHECK(reg.window_size == 2);
  CHECK_FALSE(reg.upper_bound_only);

  reg = rho_regularized(std::vector<double>{1, 1, 0, 0}, 0.5, 2, exact, kRad, rng);
  CHECK(reg.value == doctest::Approx(0.5));
  CHECK(reg.witness_subset == std::vector<std::size_t>{0, 1});

  reg = rho_regularized(std::vector<double>{0, 0, 0, 0}, 0.5, 2, exact, kRad, rng);
  CHECK(reg.value == 1.0);

  // An all-zero window exists, but the infimum is still over every window.
  reg = rho_regularized(std::vector<double>{0, 0, 1, 2}, 0.5, 2, exact, kRad, rng);
  CHECK(reg.value == doctest::Approx(0.25));
  CHECK(reg.witness_subset == std::vector<std::size_t>{2, 3});
}

TEST_CASE("regularized rho validation") {
  RngStream rng(38, 0);
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(regularized_window(0.25, 8) == 4);
  CHECK(regularized_window(0.1, 9) == 0);
  CHECK_THROWS_AS(rho_regularized(x, 0.5, 6, {}, kRad, rng), std::invalid_argument);
  CHECK_THROWS_AS(rho_regularized(x, 0.5, 3, {}, kRad, rng), std::invalid_argument);
  CHECK_THROWS_AS(rho_regularized(x, 0.5, 0, {}, kRad, rng), std::invalid_argument);
  CHECK_THROWS_AS(rho_regularized(x, 0.5, 2, {}, DistributionSpec::gaussian(), rng), std::invalid_argument);
  const std::vector<double> big(40, 1.0);
  CHECK(binomial_coefficient(40, 20) > kMaxExactSubsets);
  CHECK_THROWS_AS(rho_regularized(big, 0.5, 20, {}, kRad, rng), CapExceeded);
  CHECK(binomial_coefficient(12, 6) == 924.0);
}

TEST_CASE("property: rho_beta dominates rho in exact mode; sampled mode bounds exact from above") {
  RngStream rng(39, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(9);
    const auto x = gt::random_mixed(rng, n);
    const double r = 1.5 * rng.uniform();
    const std::size_t window = 2 + 2 * rng.below(n / 2);
    const auto exact = rho_regularized(x, r, window, {}, kRad, rng);
    REQUIRE(exact.witness_subset.size() == window);
    REQUIRE(std::adjacent_find(exact.witness_subset.begin(), exact.witness_subset.end(),
                               std::greater_equal<>()) == exact.witness_subset.end());
    REQUIRE(exact.value >= rho_exact(x, r, kRad).value - 1e-12);
    REQUIRE(exact.value == doctest::Approx(rho_exact(gt::restrict_to(x, exact.witness_subset), r, kRad).value));

    const auto sampled = rho_regularized(x, r, window, {SubsetMode::sampled_subsets, 50}, kRad, rng);
    REQUIRE(sampled.upper_bound_only);
    REQUIRE(sampled.value >= exact.value - 1e-12);
  }
}

TEST_CASE("classify rich/poor") {
  RngStream rng(40, 0);
  const std::vector<double> x{1, 1, 0, 0};
  const auto poor = classify_rich_poor(x, 0.5, 0.6, 2, {}, kRad, rng);
  CHECK(poor.label == RichPoor::poor);
  CHECK(poor.rho_beta.value == doctest::Approx(0.5));
  CHECK(poor.threshold == 0.6);
  CHECK(poor.scale == 0.5);
  CHECK(classify_rich_poor(x, 0.5, 0.4, 2, {}, kRad, rng).label == RichPoor::rich);
  CHECK(classify_rich_poor(std::vector<double>(4, 0.0), 0.5, 0.99, 2, {}, kRad, rng).label == RichPoor::rich);
  // Boundary: rho_beta equal to alpha is poor.
  CHECK(classify_rich_poor(x, 0.5, 0.5, 2, {}, kRad, rng).label == RichPoor::poor);
}

TEST_CASE("levy stability examples") {
  const std::vector<double> y{1, 1}, z{1, 1.1};
  auto s = levy_stability_check(y, y, 0.5, 1.0, 1.0, kRad);
  CHECK(s.lhs == doctest::Approx(rho_exact(y, 1.5, kRad).value));
  CHECK(s.rhs == doctest::Approx(rho_exact(y, 0.5, kRad).value));
  CHECK(s.holds);
  s = levy_stability_check(y, z, 0.5, 1.0, 1.0, kRad);
  CHECK(s.holds);
  s = levy_stability_check(y, z, 0.5, 0.0, 1.0, kRad);
  CHECK(s.rhs == doctest::Approx(rho_exact(z, 0.5, kRad).value - std::exp(1.0)));
  CHECK(s.rhs < 0.0);
  CHECK(s.holds);
  CHECK_THROWS_AS(levy_stability_check(y, std::vector<double>{1}, 0.5, 1.0, 1.0, kRad), DimensionMismatch);
}

TEST_CASE("property: stability holds for random nearby pairs") {
  RngStream rng(41, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const auto y = gt::random_reals(rng, n);
    auto z = y;
    for (double& v : z) v += 0.2 * (rng.uniform() - 0.5);
    REQUIRE(levy_stability_check(y, z, rng.uniform(), rng.uniform(), 1.0, kRad).holds);
  }
}

TEST_CASE("bounded concentration probe") {
  RngStream rng(42, 0);
  CHECK(rho_auto(std::vector<double>{1.0}, 0.1, kRad, rng) == doctest::Approx(0.5));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(rho_auto(std::vector<double>{h, h}, 0.1, kRad, rng) == doctest::Approx(0.5));

  const auto one = bounded_concentration_check(kRad, 1, 10, rng);
  CHECK(one.rho_at_c == doctest::Approx(0.5));
  CHECK(one.passed);
  const auto two = bounded_concentration_check(kRad, 2, 50, rng);
  CHECK(two.rho_at_c == doctest::Approx(0.5));
  CHECK(two.margin == doctest::Approx(0.4));
  CHECK(two.passed);
  CHECK(two.worst_v.size() == 2);
}
