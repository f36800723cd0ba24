#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "twlab/random.hpp"
#include "twlab/signavg.hpp"

using namespace twlab;

namespace {

double half_sqrt_n_log_n(std::size_t n) {
  const double d = static_cast<double>(n);
  return 0.5 * std::sqrt(d) * std::log(d);
}

std::vector<oracle::Dense> dense_basis(const BlockBasis& b) {
  std::vector<oracle::Dense> out;
  for (const auto& v : b) {
    oracle::Dense d(v.max_index(), 0.0);
    for (const auto& [i, c] : v) d[i - 1] = c;
    out.push_back(d);
  }
  return out;
}

QuasiMap random_variant(std::int64_t seed, std::size_t t, std::size_t n) {
  auto eng = rng::engine_for(seed, rng::stream_signs, t);
  const auto p = rng::random_signed_permutation(eng, n);
  const double scale = std::uniform_real_distribution<double>(-3.0, 3.0)(eng);
  const QuasiMap k = kalton_peck_map();
  auto op = [p](const SparseVector& x) { return p(x); };
  return (t % 2 == 0) ? scale * k.after(op, "P") : scale * k.then(op, "P");
}

}  // namespace

TEST(NablaExact, CanonicalExamples) {
  const QuasiMap k = kalton_peck_map();
  const auto r2 = nabla_exact(k, canonical_basis(2));
  EXPECT_NEAR(r2.value, std::sqrt(2.0) * std::log(2.0) / 2, 1e-15);
  EXPECT_NEAR(r2.value, 0.49013, 1e-5);
  EXPECT_EQ(r2.method, Method::exact);
  EXPECT_EQ(r2.std_error, 0.0);
  EXPECT_FALSE(r2.seed.has_value());
  const auto r4 = nabla_exact(k, canonical_basis(4));
  EXPECT_NEAR(r4.value, std::log(4.0), 1e-15);
  EXPECT_EQ(r4.count, 8U);
}

TEST(NablaExact, AgreesWithBruteForceOracle) {
  const QuasiMap k = kalton_peck_map();
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const BlockBasis& b : {canonical_basis(n), walsh_block(n)}) {
      auto eng = rng::engine_for(40, rng::stream_lambda, n);
      const auto lambda = rng::gaussian_values(eng, n);
      const double expected = oracle::nabla(oracle::kalton_peck, dense_basis(b), lambda);
      EXPECT_NEAR(nabla_exact(k, b, lambda).value, expected, 1e-12) << b.label();
      const std::vector<double> ones(n, 1.0);
      EXPECT_NEAR(nabla_exact(k, b, ones).value,
                  oracle::nabla(oracle::kalton_peck, dense_basis(b), ones), 1e-12)
          << b.label();
    }
  }
}

TEST(NablaExact, LinearMapGivesZero) {
  const QuasiMap lin = linear_map("triple", [](const SparseVector& x) { return 3.0 * x; });
  EXPECT_NEAR(nabla_exact(lin, walsh_block(5)).value, 0.0, 1e-12);
  EXPECT_EQ(nabla_exact(zero_map(), canonical_basis(7)).value, 0.0);
}

TEST(NablaExact, SymmetryReductionMatchesFullEnumeration) {
  const QuasiMap k = kalton_peck_map();
  for (std::size_t n = 1; n <= 10; ++n) {
    auto eng = rng::engine_for(41, rng::stream_lambda, n);
    const auto lambda = rng::gaussian_values(eng, n);
    for (const BlockBasis& b : {canonical_basis(n), walsh_block(n)}) {
      const auto half = nabla_exact(k, b, lambda, false);
      const auto full = nabla_exact(k, b, lambda, true);
      EXPECT_NEAR(half.value, full.value, 1e-12);
      EXPECT_EQ(full.count, 2 * half.count);
    }
  }
}

TEST(NablaExact, EveryCanonicalPatternHasTheSameNorm) {
  const QuasiMap k = kalton_peck_map();
  for (std::size_t n : {2, 5, 8, 11}) {
    const std::vector<double> ones(n, 1.0);
    const detail::SignedSums sums(k, canonical_basis(n), ones);
    const double first = sums.norm_for(std::uint64_t{0});
    EXPECT_NEAR(first, half_sqrt_n_log_n(n), 1e-12);
    for (std::uint64_t p = 1; p < (std::uint64_t{1} << n); ++p) {
      EXPECT_EQ(sums.norm_for(p), first) << "n=" << n << " pattern " << p;
    }
  }
}

TEST(NablaExact, ZeroCoefficientsAreDropped) {
  const QuasiMap k = kalton_peck_map();
  const auto r = nabla_exact(k, canonical_basis(3), std::vector<double>{1.0, 0.0, 1.0});
  EXPECT_EQ(r.count, 2U);
  EXPECT_EQ(r.value, nabla_exact(k, canonical_basis(2)).value);
  EXPECT_EQ(nabla_exact(k, canonical_basis(3), std::vector<double>{0.0, 0.0, 0.0}).value, 0.0);
}

TEST(NablaExact, Homogeneity) {
  const QuasiMap k = kalton_peck_map();
  const BlockBasis b = walsh_block(5);
  auto eng = rng::engine_for(42, rng::stream_lambda, 0);
  const auto lambda = rng::gaussian_values(eng, 5);
  const double base = nabla_exact(k, b, lambda).value;
  for (double t : {-3.5, -1.0, 0.25, 7.0}) {
    std::vector<double> scaled = lambda;
    for (auto& v : scaled) v *= t;
    EXPECT_NEAR(nabla_exact(k, b, scaled).value, std::abs(t) * base, 1e-9);
  }
}

TEST(NablaExact, TriangleInequality) {
  const BlockBasis b = canonical_basis(6);
  for (std::size_t t = 0; t < 40; ++t) {
    const QuasiMap omega = random_variant(43, 2 * t, 6);
    const QuasiMap psi = random_variant(43, 2 * t + 1, 6);
    auto eng = rng::engine_for(43, rng::stream_lambda, t);
    const auto lambda = rng::gaussian_values(eng, 6);
    const double lhs = nabla_exact(omega + psi, b, lambda).value;
    const double rhs = nabla_exact(omega, b, lambda).value + nabla_exact(psi, b, lambda).value;
    EXPECT_LE(lhs, rhs + 1e-9);
  }
}

TEST(NablaExact, BudgetAndInputErrors) {
  const QuasiMap k = kalton_peck_map();
  try {
    nabla_exact(k, canonical_basis(21));
    FAIL() << "expected budget_exceeded";
  } catch (const budget_exceeded& e) {
    EXPECT_NE(std::string(e.what()).find("--mode mc"), std::string::npos);
  }
  EXPECT_NO_THROW(nabla_exact(k, canonical_basis(max_exact_terms)));
  EXPECT_THROW(nabla_exact(k, canonical_basis(3), std::vector<double>{1.0, 1.0}), invalid_input);
}

TEST(NablaMc, AgreesWithExactWithinStandardErrors) {
  const QuasiMap k = kalton_peck_map();
  const BlockBasis b = canonical_basis(10);
  const std::vector<double> ones(10, 1.0);
  const auto exact = nabla_exact(k, b, ones);
  EXPECT_NEAR(exact.value, 0.5 * std::sqrt(10.0) * std::log(10.0), 1e-9);
  const auto mc = nabla_mc(k, b, ones, 5000, 0);
  EXPECT_EQ(mc.method, Method::monte_carlo);
  EXPECT_EQ(mc.count, 5000U);
  EXPECT_EQ(mc.seed, 0);
  EXPECT_LE(std::abs(mc.value - exact.value), 4.0 * mc.std_error);

  // For K a sign flip on canonical or Walsh coefficients only permutes
  // coordinates, so every pattern has the same norm. A generic basis does not.
  auto eng = rng::engine_for(44, rng::stream_lambda, 0);
  const auto lambda = rng::gaussian_values(eng, 10);
  const BlockBasis w = fixture::generic_basis(10, 44);
  const auto ex = nabla_exact(k, w, lambda);
  const auto est = nabla_mc(k, w, lambda, 5000, 0);
  EXPECT_GT(est.std_error, 0.0);
  EXPECT_LE(std::abs(est.value - ex.value), 4.0 * est.std_error);
}

TEST(NablaMc, LinearMapGivesExactZero) {
  const auto r = nabla_mc(zero_map(), canonical_basis(30), std::vector<double>(30, 1.0), 100, 5);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(NablaMc, DeterministicAcrossRunsAndWorkers) {
  const QuasiMap k = kalton_peck_map();
  auto eng = rng::engine_for(45, rng::stream_lambda, 0);
  const auto lambda = rng::gaussian_values(eng, 12);
  const BlockBasis b = fixture::generic_basis(12, 45);
  const auto a = nabla_mc(k, b, lambda, 500, 17, 1);
  const auto c = nabla_mc(k, b, lambda, 500, 17, 1);
  const auto d = nabla_mc(k, b, lambda, 500, 17, 3);
  EXPECT_EQ(a.value, c.value);
  EXPECT_EQ(a.std_error, c.std_error);
  EXPECT_EQ(a.value, d.value);
  EXPECT_NE(a.value, nabla_mc(k, b, lambda, 500, 18, 1).value);
}

TEST(NablaMc, RejectsTooFewSamples) {
  EXPECT_THROW(nabla_mc(kalton_peck_map(), canonical_basis(3), std::vector<double>(3, 1.0), 1, 0),
               invalid_input);
}

TEST(NablaAuto, SwitchesOnBudget) {
  const QuasiMap k = kalton_peck_map();
  EXPECT_EQ(nabla_auto(k, walsh_block(12), std::vector<double>(12, 1.0), 64, 0).method,
            Method::exact);
  const auto mc = nabla_auto(k, walsh_block(13), std::vector<double>(13, 1.0), 16, 0);
  EXPECT_EQ(mc.method, Method::monte_carlo);
  EXPECT_EQ(nabla_auto(k, canonical_basis(64), std::vector<double>(64, 1.0), 16, 0).method,
            Method::monte_carlo);
}

TEST(NablaScan, CanonicalLaw) {
  ScanOptions opt;
  opt.first = 1;
  opt.last = 14;
  opt.mode = ScanMode::exact;
  const auto rows = nabla_scan(kalton_peck_map(), opt);
  ASSERT_EQ(rows.size(), 14U);
  EXPECT_TRUE(std::isnan(rows[0].per_sqrt_n_log_n));
  EXPECT_EQ(rows[0].result.value, 0.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& r = rows[k];
    EXPECT_NEAR(r.per_sqrt_n_log_n, 0.5, 1e-9) << r.n;
    EXPECT_NEAR(r.per_sqrt_n, 0.5 * std::log(static_cast<double>(r.n)), 1e-9);
    EXPECT_GT(r.per_sqrt_n, rows[k - 1].per_sqrt_n);
  }
}

TEST(NablaScan, WalshStaysBoundedPerSqrtN) {
  ScanOptions opt;
  opt.family = Family::walsh;
  opt.first = 4;
  opt.last = 12;
  opt.mode = ScanMode::exact;
  opt.even_only = true;
  const auto rows = nabla_scan(kalton_peck_map(), opt);
  ASSERT_EQ(rows.size(), 5U);
  EXPECT_EQ(rows.front().n, 4U);
  EXPECT_EQ(rows.back().n, 12U);
  EXPECT_LE(rows.back().per_sqrt_n, rows.front().per_sqrt_n + 0.5);
  for (const auto& r : rows) EXPECT_EQ(r.result.method, Method::exact);
}

TEST(NablaScan, RangeErrors) {
  ScanOptions opt;
  opt.first = 5;
  opt.last = 4;
  EXPECT_THROW(nabla_scan(kalton_peck_map(), opt), invalid_input);
  opt.first = 0;
  EXPECT_THROW(nabla_scan(kalton_peck_map(), opt), invalid_input);
  opt.first = 22;
  opt.last = 22;
  opt.mode = ScanMode::exact;
  EXPECT_THROW(nabla_scan(kalton_peck_map(), opt), budget_exceeded);
}
