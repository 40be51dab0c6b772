#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "gaplab/ensembles.hpp"
#include "gaplab/parallel.hpp"
#include "gaplab/spectral.hpp"
#include "test_support.hpp"

using namespace gaplab;

namespace {

const std::vector<DistributionSpec> kAllLaws{DistributionSpec::rademacher(), DistributionSpec::gaussian(),
                                              DistributionSpec::uniform_pm(),
                                              DistributionSpec::lazy_rademacher(0.5)};

// Upper-tail critical values of chi-square at probability 1 - 1e-6.
constexpr double kChi2Df1 = 23.928;
constexpr double kChi2Df2 = 27.631;

double chi_square(const std::vector<double>& values, const std::vector<Atom>& atoms) {
  std::map<double, double> counts;
  for (const Atom& a : atoms) counts[a.value] = 0.0;
  for (double v : values) {
    REQUIRE(counts.count(v) == 1);
    counts[v] += 1.0;
  }
  double stat = 0.0;
  for (const Atom& a : atoms) {
    const double expected = a.probability * static_cast<double>(values.size());
    stat += (counts[a.value] - expected) * (counts[a.value] - expected) / expected;
  }
  return stat;
}

std::vector<double> upper_triangle(const SymmetricMatrix& A) {
  std::vector<double> out;
  for (std::size_t i = 0; i < A.n(); ++i)
    for (std::size_t j = i; j < A.n(); ++j) out.push_back(A(i, j));
  return out;
}

}  // namespace

TEST_CASE("rademacher draws are +-1 with balanced frequency") {
  RngStream rng(1, 0);
  const int draws = 100000;
  int plus = 0;
  for (int k = 0; k < draws; ++k) {
    const double v = sample_entry(DistributionSpec::rademacher(), rng);
    REQUIRE((v == 1.0 || v == -1.0));
    if (v > 0) ++plus;
  }
  const double sigma = std::sqrt(0.25 / draws);
  CHECK(std::abs(plus / double(draws) - 0.5) <= 3 * sigma);
}

TEST_CASE("lazy rademacher with q = 0.5 has atoms -sqrt2, 0, sqrt2") {
  const auto dist = DistributionSpec::lazy_rademacher(0.5);
  const auto atoms = dist.atoms();
  REQUIRE(atoms.size() == 3);
  CHECK(atoms[0].value == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-15));
  CHECK(atoms[1].value == 0.0);
  CHECK(atoms[2].value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  RngStream rng(2, 0);
  for (int k = 0; k < 1000; ++k) {
    const double v = sample_entry(dist, rng);
    CHECK((v == atoms[0].value || v == 0.0 || v == atoms[2].value));
  }
}

TEST_CASE("atom probabilities sum to one exactly") {
  for (double q : {0.0, 0.1, 0.25, 0.3, 0.5, 0.7, 0.9}) {
    const auto atoms = DistributionSpec::lazy_rademacher(q).atoms();
    double total = 0.0;
    double second = 0.0;
    for (const Atom& a : atoms) {
      total += a.probability;
      second += a.probability * a.value * a.value;
    }
    CHECK(total == 1.0);
    CHECK(second == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(DistributionSpec::gaussian().atoms().empty());
}

TEST_CASE("gaussian sample variance over 1e5 draws lies in [0.97, 1.03]") {
  RngStream rng(3, 0);
  const int draws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double v = sample_entry(DistributionSpec::gaussian(), rng);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(var >= 0.97);
  CHECK(var <= 1.03);
}

TEST_CASE("every law has mean 0 and variance 1 within the sampling tolerance") {
  const int draws = 100000;
  const double root = std::sqrt(static_cast<double>(draws));
  for (const auto& dist : kAllLaws) {
    CAPTURE(to_string(dist.kind));
    RngStream rng(4, static_cast<std::uint64_t>(dist.kind));
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double v = sample_entry(dist, rng);
      if (dist.kind == DistributionKind::uniform_pm) REQUIRE(std::abs(v) <= std::sqrt(3.0));
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / root);
    CHECK(var >= 1.0 - 10.0 / root);
    CHECK(var <= 1.0 + 10.0 / root);
  }
}

TEST_CASE("weighted sums obey the subgaussian tail with slack 4") {
  const int draws = 100000;
  for (const auto& dist : kAllLaws) {
    CAPTURE(to_string(dist.kind));
    RngStream rng(5, static_cast<std::uint64_t>(dist.kind));
    const auto a = testing::random_unit(rng, 10);
    const double K = dist.subgaussian_constant();
    std::vector<int> exceed(4, 0);
    for (int k = 0; k < draws; ++k) {
      double s = 0.0;
      for (double ai : a) s += ai * sample_entry(dist, rng);
      for (int t = 1; t <= 3; ++t)
        if (std::abs(s) >= t) ++exceed[t];
    }
    for (int t = 1; t <= 3; ++t) {
      CAPTURE(t);
      CHECK(exceed[t] / double(draws) <= 2.0 * std::exp(-t * t / (4.0 * K * K)));
    }
  }
}

TEST_CASE("sample_wigner: n = 1 is a single draw and n = 3 fills the upper triangle in order") {
  RngStream a(6, 0), b(6, 0);
  const auto one = sample_wigner(1, DistributionSpec::gaussian(), a);
  CHECK(one.n() == 1);
  CHECK(one(0, 0) == sample_entry(DistributionSpec::gaussian(), b));

  RngStream c(6, 1), d(6, 1);
  const auto three = sample_wigner(3, DistributionSpec::rademacher(), c);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i; j < 3; ++j) {
      CHECK(three(i, j) == sample_entry(DistributionSpec::rademacher(), d));
      CHECK(three(i, j) == three(j, i));
    }
  CHECK(c == d);  // exactly six draws consumed
}

TEST_CASE("sample_wigner is exactly symmetric for every law") {
  for (const auto& dist : kAllLaws) {
    RngStream rng(7, static_cast<std::uint64_t>(dist.kind));
    const auto A = sample_wigner(40, dist, rng);
    CHECK(A.is_symmetric());
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = 0; j < 40; ++j) REQUIRE(A(i, j) == A(j, i));
  }
}

TEST_CASE("wigner entries pass chi-square goodness of fit at significance 1e-6") {
  RngStream r1(8, 0);
  const auto rad = sample_wigner(200, DistributionSpec::rademacher(), r1);
  CHECK(chi_square(upper_triangle(rad), DistributionSpec::rademacher().atoms()) < kChi2Df1);

  for (double q : {0.5, 0.2}) {
    RngStream r2(8, 1);
    const auto lazy = DistributionSpec::lazy_rademacher(q);
    const auto A = sample_wigner(200, lazy, r2);
    CHECK(chi_square(upper_triangle(A), lazy.atoms()) < kChi2Df2);
  }
}

TEST_CASE("operator norm of a 400 x 400 rademacher matrix is near 2 sqrt(n)") {
  double total = 0.0;
  const int trials = 5;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = derive_trial_stream(9, t);
    total += operator_norm(sample_wigner(400, DistributionSpec::rademacher(), rng)) / 20.0;
  }
  const double mean = total / trials;
  CHECK(mean >= 1.8);
  CHECK(mean <= 2.2);
}

TEST_CASE("make_perturbation closed forms") {
  PerturbationSpec spec;
  CHECK(make_perturbation(spec, 5) == SymmetricMatrix::zero(5));

  spec.kind = PerturbationKind::scaled_identity;
  spec.scale = 3.0;
  const auto I3 = make_perturbation(spec, 4);
  CHECK(I3 == SymmetricMatrix::identity(4, 3.0));
  CHECK(operator_norm(I3) == doctest::Approx(3.0).epsilon(1e-14));

  spec.kind = PerturbationKind::rank_one;
  spec.scale = 10.0;
  const auto R = make_perturbation(spec, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(R(i, j) == (i == 0 && j == 0 ? 10.0 : 0.0));
  CHECK(operator_norm(R) == doctest::Approx(10.0).epsilon(1e-14));

  spec.kind = PerturbationKind::diagonal_ramp;
  spec.scale = 5.0;
  const auto D = make_perturbation(spec, 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(D(i, i) == doctest::Approx(5.0 * (i + 1) / 4.0));
  CHECK(D(0, 1) == 0.0);
}

TEST_CASE("target_norm rescales to within 1e-10 relative") {
  for (auto kind : {PerturbationKind::scaled_identity, PerturbationKind::diagonal_ramp, PerturbationKind::rank_one}) {
    PerturbationSpec spec;
    spec.kind = kind;
    spec.scale = 2.5;
    spec.target_norm = 7.25;
    const auto M = make_perturbation(spec, 6);
    CHECK(M.is_symmetric());
    CHECK(std::abs(operator_norm(M) - 7.25) <= 1e-10 * 7.25);
  }
  PerturbationSpec zero;
  zero.target_norm = 1.0;
  CHECK_THROWS_AS(make_perturbation(zero, 3), std::invalid_argument);
}

TEST_CASE("rank_one accepts a direction and normalizes it") {
  PerturbationSpec spec;
  spec.kind = PerturbationKind::rank_one;
  spec.scale = 2.0;
  spec.direction = {3.0, 4.0};
  const auto M = make_perturbation(spec, 2);
  CHECK(M(0, 0) == doctest::Approx(2.0 * 9.0 / 25.0));
  CHECK(M(0, 1) == doctest::Approx(2.0 * 12.0 / 25.0));
  spec.direction = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(make_perturbation(spec, 2), DimensionMismatch);
}

TEST_CASE("custom perturbation files") {
  const auto dir = std::filesystem::temp_directory_path() / "gaplab_test_ensembles";
  std::filesystem::create_directories(dir);

  SUBCASE("round trip") {
    RngStream rng(10, 0);
    const auto A = sample_wigner(5, DistributionSpec::gaussian(), rng);
    const auto path = dir / "m.txt";
    write_perturbation_file(A, path);
    CHECK(read_perturbation_file(path) == A);
    PerturbationSpec spec;
    spec.kind = PerturbationKind::custom;
    spec.file = path;
    CHECK(make_perturbation(spec, 5) == A);
    CHECK_THROWS_AS(make_perturbation(spec, 4), DimensionMismatch);
  }
  SUBCASE("upper triangle text") {
    const auto A = parse_perturbation_text("2\n1 2\n3\n");
    CHECK(A == SymmetricMatrix::from_rows({{1, 2}, {2, 3}}));
  }
  SUBCASE("full symmetric listing accepted, non-symmetric rejected") {
    CHECK(parse_perturbation_text("2  1 2 2 3") == SymmetricMatrix::from_rows({{1, 2}, {2, 3}}));
    CHECK_THROWS_AS(parse_perturbation_text("2  1 2 5 3"), ParseError);
  }
  SUBCASE("malformed") {
    CHECK_THROWS_AS(parse_perturbation_text(""), ParseError);
    CHECK_THROWS_AS(parse_perturbation_text("2 1 2"), ParseError);
    CHECK_THROWS_AS(parse_perturbation_text("2 1 x 3"), ParseError);
    CHECK_THROWS_AS(read_perturbation_file(dir / "missing.txt"), ParseError);
  }
}

TEST_CASE("compose") {
  RngStream rng(11, 0);
  const auto N = sample_wigner(4, DistributionSpec::rademacher(), rng);
  CHECK(compose(SymmetricMatrix::zero(4), N) == N);
  const auto sum = compose(SymmetricMatrix::identity(2), SymmetricMatrix::from_rows({{0, 1}, {1, 0}}));
  CHECK(sum == SymmetricMatrix::from_rows({{1, 1}, {1, 1}}));
  CHECK_THROWS_AS(compose(SymmetricMatrix::zero(3), SymmetricMatrix::zero(4)), DimensionMismatch);
}

TEST_CASE("from_rows rejects bad input") {
  CHECK_THROWS_AS(SymmetricMatrix::from_rows({{1, 2}, {3, 4}}), std::invalid_argument);
  CHECK_THROWS_AS(SymmetricMatrix::from_rows({{1, 2, 3}, {2, 4, 5}}), DimensionMismatch);
  CHECK_THROWS(SymmetricMatrix(0));
}

TEST_CASE("derived streams: distinct, deterministic and injective") {
  RngStream s0 = derive_trial_stream(7, 0), s1 = derive_trial_stream(7, 1);
  bool differ = false;
  for (int k = 0; k < 100; ++k) differ |= s0.next_u64() != s1.next_u64();
  CHECK(differ);

  RngStream a = derive_trial_stream(7, 5), b = derive_trial_stream(7, 5);
  for (int k = 0; k < 1000; ++k) REQUIRE(a.next_u64() == b.next_u64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t t = 0; t < 10000; ++t) firsts.insert(derive_trial_stream(7, t).next_u64());
  CHECK(firsts.size() == 10000);
}

TEST_CASE("sampling is schedule independent") {
  const std::size_t trials = 16;
  auto run = [&](std::size_t threads) {
    std::vector<SymmetricMatrix> out(trials, SymmetricMatrix(1));
    parallel_for(trials, threads, [&](std::size_t t) {
      RngStream rng = derive_trial_stream(7, t);
      out[t] = sample_wigner(12, DistributionSpec::gaussian(), rng);
    });
    return out;
  };
  CHECK(run(1) == run(8));
}

TEST_CASE("rng primitives") {
  RngStream rng(12, 0);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(rng.below(7) < 7);
  }
  CHECK(rng.below(1) == 0);
}

TEST_CASE("distribution parsing and validation") {
  for (const auto& dist : kAllLaws) CHECK(parse_distribution_kind(to_string(dist.kind)) == dist.kind);
  CHECK_THROWS_AS(parse_distribution_kind("cauchy"), std::invalid_argument);
  CHECK_THROWS_AS(DistributionSpec::lazy_rademacher(1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_perturbation_kind("random"), std::invalid_argument);
}
