#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "twlab/cstruct.hpp"
#include "twlab/random.hpp"

using namespace twlab;
using C = std::complex<double>;

namespace {

const double ln2 = std::log(2.0);

SparseVector sample(std::int64_t seed, std::size_t t, std::size_t dim, Index first = 1) {
  auto eng = rng::engine_for(seed, rng::stream_vectors, t);
  return rng::gaussian_vector(eng, dim, first);
}

void expect_near(const SparseVector& a, const SparseVector& b, double tol) {
  const Index hi = std::max(a.max_index(), b.max_index());
  for (Index i = 1; i <= hi; ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

}  // namespace

TEST(CheckStructure, Omega) {
  const auto r = check_structure(ComplexStructure::omega(), 500, 0);
  EXPECT_EQ(r.max_defect, 0.0);
  EXPECT_TRUE(r.passes);
  EXPECT_EQ(r.structure, "omega");
  EXPECT_EQ(r.dim, 64U);
}

TEST(CheckStructure, IdentityFails) {
  const auto r = check_structure(ComplexStructure::identity(), 20, 0);
  EXPECT_EQ(r.max_defect, 2.0);
  EXPECT_FALSE(r.passes);
}

TEST(CheckStructure, SignedPermutationTable) {
  const auto u = ComplexStructure::from_signed_permutation(SignedPermutation::omega_table(8), "w8");
  EXPECT_TRUE(check_structure(u, 100, 1).passes);
  const auto bad = ComplexStructure::from_signed_permutation(
      SignedPermutation({2, 1}, {1, 1}), "swap");
  EXPECT_FALSE(check_structure(bad, 10, 1).passes);
}

TEST(BlockStructure, WalshAgainstCanonical) {
  const BlockBasis a = walsh_block(3);
  const BlockBasis b = canonical_basis(3);
  const auto u = ComplexStructure::from_blocks(a, b);
  const auto r = check_structure(u, 300, 0);
  EXPECT_LE(r.max_defect, 1e-12);
  EXPECT_TRUE(r.passes);
  for (std::size_t k = 0; k < 3; ++k) {
    expect_near(u(a[k]), b[k], 1e-12);
    expect_near(u(b[k]), -a[k], 1e-12);
  }
  for (std::size_t t = 0; t < 100; ++t) {
    const SparseVector x = sample(50, t, 30);
    EXPECT_NEAR(l2_norm(u(x)), l2_norm(x), 1e-12 * l2_norm(x));
  }
}

TEST(BlockStructure, CustomOrthonormalBlocks) {
  const double r = 1.0 / std::sqrt(2.0);
  const BlockBasis a({SparseVector{{1, r}, {2, r}}, SparseVector{{1, r}, {2, -r}}}, "custom");
  const BlockBasis b({SparseVector::unit(5), SparseVector::unit(9)}, "custom");
  const auto u = ComplexStructure::from_blocks(a, b);
  EXPECT_LE(check_structure(u, 200, 3).max_defect, 1e-12);
  expect_near(u(a[1]), b[1], 1e-12);
}

TEST(BlockStructure, Errors) {
  EXPECT_THROW(ComplexStructure::from_blocks(canonical_basis(2), canonical_basis(2)), invalid_input);
  EXPECT_THROW(ComplexStructure::from_blocks(walsh_block(3), canonical_basis(2)), invalid_input);
  EXPECT_THROW(ComplexStructure::from_blocks(walsh_block(9), canonical_basis(9)), budget_exceeded);
}

TEST(Commutator, OmegaAndKaltonPeckCommuteExactly) {
  const auto r = commutator_defect(ComplexStructure::omega(), kalton_peck_map(), 1000, 64, 0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.quantity, "commutator");
}

TEST(Commutator, HandExample) {
  const auto w = ComplexStructure::omega();
  const QuasiMap k = kalton_peck_map();
  const SparseVector x{{1, 1.0}, {2, 2.0}};
  const double s5 = std::sqrt(5.0);
  const SparseVector expected{{1, -2.0 * std::log(2.0 / s5)}, {2, std::log(1.0 / s5)}};
  expect_near(w(k(x)), expected, 1e-15);
  expect_near(k(w(x)), expected, 1e-15);
  EXPECT_EQ(commutator_ratio(w, k, x), 0.0);
}

TEST(Commutator, CommutingLinearMap) {
  const QuasiMap lin = linear_map("double", [](const SparseVector& x) { return 2.0 * x; });
  EXPECT_EQ(commutator_defect(ComplexStructure::omega(), lin, 200, 32, 0).value, 0.0);
}

TEST(Commutator, BlockStructureIsBoundedButNonzero) {
  const auto u = ComplexStructure::from_blocks(walsh_block(3), canonical_basis(3));
  const auto r = commutator_defect(u, kalton_peck_map(), 200, u.sample_dim(), 0);
  EXPECT_GT(r.value, 0.0);
  EXPECT_LT(r.value, 10.0);
}

TEST(ComplexifyA, Examples) {
  EXPECT_EQ(complexify_A(SparseVector::unit(1)), (ComplexVector{{1, C(1.0, 0.0)}}));
  EXPECT_EQ(complexify_A(SparseVector{{1, 1.0}, {2, 1.0}}), (ComplexVector{{1, C(1.0, 1.0)}}));
  EXPECT_EQ(complexify_A(SparseVector::unit(4, 3.0)), (ComplexVector{{2, C(0.0, 3.0)}}));
}

TEST(ComplexifyA, IsometryInverseAndOmegaIntertwining) {
  const auto w = SignedPermutation::omega();
  for (std::size_t t = 0; t < 300; ++t) {
    const SparseVector x = sample(51, t, 1 + t % 40);
    const ComplexVector ax = complexify_A(x);
    EXPECT_NEAR(l2_norm(ax), l2_norm(x), 1e-15 * l2_norm(x));
    EXPECT_EQ(realify(ax), x);
    EXPECT_EQ(complexify_A(w(x)), C(0.0, 1.0) * ax);
  }
}

TEST(ComplexificationDefect, Examples) {
  const SparseVector x{{1, 1.0}, {2, 1.0}};
  EXPECT_NEAR(complexification_defect(x) / l2_norm(x), ln2 / 2, 1e-15);
  EXPECT_EQ(complexification_defect(SparseVector{{2, 1.0}, {4, -2.0}, {6, 0.5}}), 0.0);
  EXPECT_EQ(complexification_defect(SparseVector{{1, 1.0}, {3, -2.0}}), 0.0);
}

TEST(ComplexificationDefect, SquaredBoundOnSamples) {
  for (std::size_t t = 0; t < 500; ++t) {
    const SparseVector x = sample(52, t, 2 + t % 60);
    const double d = complexification_defect(x);
    EXPECT_LE(d * d, 2.0 * l2_norm(x) * l2_norm(x) + 1e-12);
  }
}

TEST(ComplexificationBatch, BoundHoldsAndIsDeterministic) {
  const auto a = complexification_batch(3000, 0, 2, 128, 1);
  const auto b = complexification_batch(3000, 0, 2, 128, 3);
  EXPECT_LE(a.value, complexification_bound + 1e-9);
  EXPECT_GT(a.value, 0.0);
  EXPECT_EQ(a.value, b.value);
  ASSERT_EQ(a.argmax_witness.size(), 1U);
  const SparseVector& x = a.argmax_witness[0];
  EXPECT_EQ(complexification_defect(x) / l2_norm(x), a.value);
  EXPECT_THROW(complexification_batch(0, 0), invalid_input);
  EXPECT_THROW(complexification_batch(10, 0, 5, 4), invalid_input);
}

TEST(ComplexifyT, Examples) {
  const auto [p1, p2] = complexify_T({SparseVector{}, SparseVector::unit(1)});
  EXPECT_EQ(p1.w, SparseVector{});
  EXPECT_EQ(p1.x, SparseVector::unit(1));
  EXPECT_TRUE(p2.w.empty() && p2.x.empty());
  EXPECT_EQ(split_norm_ratio({SparseVector{}, SparseVector::unit(1)}), 1.0);

  const auto [q1, q2] = complexify_T({SparseVector::unit(2), SparseVector{}});
  EXPECT_TRUE(q1.w.empty() && q1.x.empty());
  EXPECT_EQ(q2.w, SparseVector::unit(1));
  EXPECT_TRUE(q2.x.empty());
  EXPECT_EQ(split_norm_ratio({SparseVector::unit(2), SparseVector{}}), 1.0);
}

TEST(ComplexifyT, SplitRatioIsScaleInvariant) {
  for (std::size_t t = 0; t < 100; ++t) {
    const SparseVector x = sample(53, t, 2 + t % 30);
    const SparseVector w = sample(54, t, 2 + t % 30);
    const double r = split_norm_ratio({w, x});
    EXPECT_NEAR(split_norm_ratio({3.7 * w, 3.7 * x}), r, 1e-12);
    EXPECT_LE(r, t_split_bound);
  }
}

TEST(TBoundBatch, BoundHolds) {
  const auto r = t_bound_batch(3000, 0);
  EXPECT_LE(r.value, t_split_bound + 1e-6);
  EXPECT_GE(r.value, 1.0);
  EXPECT_NEAR(r.bound, 5.3466, 1e-4);
  EXPECT_EQ(r.value, t_bound_batch(3000, 0, 2, 128, 2).value);
}

TEST(DiagonalCommutator, RemainderWithinLogBound) {
  for (std::size_t t = 0; t < 200; ++t) {
    auto eng = rng::engine_for(55, rng::stream_multipliers, t);
    const std::size_t dim = 2 + t % 20;
    std::vector<double> d(dim);
    std::uniform_real_distribution<double> u(0.1, 4.0);
    for (auto& v : d) v = u(eng);
    const SparseVector x = sample(55, t, dim);
    const double rem = diagonal_commutator_remainder(d, x);
    EXPECT_LE(rem, diagonal_commutator_bound(d, x) + 1e-12);

    // The remainder is exactly the rescaling term ln(||x|| / ||Tx||) T x.
    double tx2 = 0.0;
    for (const auto& [i, v] : x) tx2 += d[i - 1] * d[i - 1] * v * v;
    EXPECT_NEAR(rem, std::abs(std::log(l2_norm(x) / std::sqrt(tx2))) * std::sqrt(tx2), 1e-10);
  }
  EXPECT_THROW(diagonal_commutator_remainder(std::vector<double>{1.0}, SparseVector::unit(2)),
               invalid_input);
  EXPECT_THROW(diagonal_commutator_remainder(std::vector<double>{-1.0}, SparseVector::unit(1)),
               invalid_input);
}

TEST(Obstruction, PairExample) {
  const QuasiMap k = kalton_peck_map();
  const BlockBasis a = walsh_block(2);
  const BlockBasis b = canonical_basis(2);
  const std::vector<double> ones{1.0, 1.0};
  const auto terms = obstruction_ratio(k, a, b, ones);
  std::vector<oracle::Dense> da{oracle::walsh(2, 1), oracle::walsh(2, 2)};
  const double nabla_a = oracle::nabla(oracle::kalton_peck, da, ones);
  EXPECT_NEAR(terms.numerator.value, 0.49013, 1e-5);
  EXPECT_NEAR(terms.ratio, std::sqrt(2.0) * ln2 / 2 / (std::sqrt(2.0) + nabla_a), 1e-12);
}

TEST(Obstruction, LinearMapAndOverlap) {
  const QuasiMap lin = linear_map("id", [](const SparseVector& x) { return x; });
  const std::vector<double> ones(3, 1.0);
  EXPECT_EQ(obstruction_ratio(lin, walsh_block(3), canonical_basis(3), ones).ratio, 0.0);
  EXPECT_THROW(obstruction_ratio(lin, canonical_basis(3), canonical_basis(3), ones), invalid_input);
  EXPECT_THROW(obstruction_ratio(lin, walsh_block(2), canonical_basis(3), ones), invalid_input);
}

TEST(Obstruction, ScanIncreases) {
  const auto rows = obstruction_scan(kalton_peck_map(), 2, 10, 64, 0);
  ASSERT_EQ(rows.size(), 9U);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GT(rows[k].terms.ratio, rows[k - 1].terms.ratio) << rows[k].n;
    EXPECT_EQ(rows[k].method, Method::exact);
  }
  EXPECT_NEAR(rows[0].terms.ratio, 0.25737, 1e-5);
  EXPECT_THROW(obstruction_scan(kalton_peck_map(), 3, 2, 8, 0), invalid_input);
}
