#pragma once

// Complex structures (operators u with u^2 = -id), their commutators with
// quasi-linear maps, the complexification maps A and T between the real and
// complex Kalton-Peck spaces, and the two-basis obstruction ratio.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twlab/errors.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"
#include "twlab/signavg.hpp"

namespace twlab {

/// A linear operator on finitely supported sequences that is claimed to be a
/// complex structure. `check_structure` verifies the claim by sampling.
class ComplexStructure {
 public:
  using Rule = std::function<SparseVector(const SparseVector&)>;

  /// `sample_dim` is the index range the default checks sample on.
  ComplexStructure(std::string label, Rule rule, std::size_t sample_dim)
      : label_(std::move(label)), rule_(std::move(rule)), sample_dim_(sample_dim) {}

  SparseVector operator()(const SparseVector& x) const { return rule_(x); }
  const std::string& label() const noexcept { return label_; }
  std::size_t sample_dim() const noexcept { return sample_dim_; }

  static ComplexStructure omega() {
    return from_signed_permutation(SignedPermutation::omega(), "omega");
  }

  static ComplexStructure from_signed_permutation(SignedPermutation p, std::string label) {
    const std::size_t dim = p.is_omega() ? 64 : p.range();
    return ComplexStructure(std::move(label),
                            [p = std::move(p)](const SparseVector& x) { return p(x); }, dim);
  }

  /// Not a complex structure; used to exercise the failing path.
  static ComplexStructure identity() {
    return ComplexStructure("identity", [](const SparseVector& x) { return x; }, 64);
  }

  static ComplexStructure from_blocks(const BlockBasis& a, const BlockBasis& b);

 private:
  std::string label_;
  Rule rule_;
  std::size_t sample_dim_;
};

namespace detail {

/// u(a_k) = b_k, u(b_k) = -a_k, and on the orthogonal complement the omega
/// pairing applied to the ordered orthonormal basis
///   w_1, ..., w_m, e_{j_1}, e_{j_2}, ...
/// where w_i complete a, b inside the union S of their supports and
/// j_1 < j_2 < ... enumerate the indices outside S.
class BlockStructure {
 public:
  static constexpr std::size_t max_block_support = 512;

  BlockStructure(const BlockBasis& a, const BlockBasis& b) : a_(a.vectors()), b_(b.vectors()) {
    if (a.size() != b.size()) throw invalid_input("block structure needs bases of equal length");
    const auto sa = a.support();
    const auto sb = b.support();
    std::vector<Index> both;
    std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
    if (std::adjacent_find(both.begin(), both.end()) != both.end()) {
      throw invalid_input("bases a and b must be disjointly supported");
    }
    if (both.size() > max_block_support) {
      throw budget_exceeded("block structure support " + std::to_string(both.size()) +
                            " exceeds " + std::to_string(max_block_support));
    }
    support_ = std::move(both);
    complete_basis();
  }

  SparseVector apply(const SparseVector& x) const {
    const std::size_t s = support_.size();
    std::vector<double> inside(s, 0.0);  // x restricted to S, dense
    std::vector<std::pair<std::size_t, double>> outside;  // (rank, value)
    for (const auto& [j, v] : x) {
      auto it = std::lower_bound(support_.begin(), support_.end(), j);
      if (it != support_.end() && *it == j) {
        inside[static_cast<std::size_t>(it - support_.begin())] = v;
      } else {
        outside.emplace_back(j - static_cast<std::size_t>(it - support_.begin()), v);
      }
    }

    std::vector<double> out_inside(s, 0.0);
    std::vector<SparseVector::Entry> out_outside;
    auto add_dense = [&](const std::vector<double>& vec, double c) {
      for (std::size_t r = 0; r < s; ++r) out_inside[r] += c * vec[r];
    };

    for (std::size_t k = 0; k < a_dense_.size(); ++k) {
      const double alpha = dot(inside, a_dense_[k]);
      const double beta = dot(inside, b_dense_[k]);
      add_dense(b_dense_[k], alpha);
      add_dense(a_dense_[k], -beta);
    }
    // Complement coordinates: position q (1-based) in the ordered basis.
    auto emit = [&](std::size_t q, double c) {
      if (q <= w_.size()) {
        add_dense(w_[q - 1], c);
      } else {
        out_outside.emplace_back(index_of_rank(q - w_.size()), c);
      }
    };
    auto pair_move = [&](std::size_t q, double c) {
      if (q % 2 == 1) {
        emit(q + 1, c);
      } else {
        emit(q - 1, -c);
      }
    };
    for (std::size_t q = 1; q <= w_.size(); ++q) pair_move(q, dot(inside, w_[q - 1]));
    for (const auto& [rank, v] : outside) pair_move(w_.size() + rank, v);

    for (std::size_t r = 0; r < s; ++r) {
      if (out_inside[r] != 0.0) out_outside.emplace_back(support_[r], out_inside[r]);
    }
    return SparseVector(std::move(out_outside));
  }

  std::size_t complement_rank() const noexcept { return w_.size(); }
  Index max_support_index() const noexcept { return support_.empty() ? 0 : support_.back(); }

 private:
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) acc += a[r] * b[r];
    return acc;
  }

  std::vector<double> densify(const SparseVector& v) const {
    std::vector<double> out(support_.size(), 0.0);
    for (const auto& [i, c] : v) {
      out[static_cast<std::size_t>(std::lower_bound(support_.begin(), support_.end(), i) -
                                   support_.begin())] = c;
    }
    return out;
  }

  /// Modified Gram-Schmidt, two passes, over the coordinate vectors of S.
  void complete_basis() {
    for (const auto& v : a_) a_dense_.push_back(densify(v));
    for (const auto& v : b_) b_dense_.push_back(densify(v));
    std::vector<const std::vector<double>*> q;
    for (const auto& v : a_dense_) q.push_back(&v);
    for (const auto& v : b_dense_) q.push_back(&v);
    const std::size_t target = support_.size() - 2 * a_.size();
    for (std::size_t r = 0; r < support_.size() && w_.size() < target; ++r) {
      std::vector<double> e(support_.size(), 0.0);
      e[r] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto* v : q) {
          const double c = dot(e, *v);
          for (std::size_t j = 0; j < e.size(); ++j) e[j] -= c * (*v)[j];
        }
        for (const auto& v : w_) {
          const double c = dot(e, v);
          for (std::size_t j = 0; j < e.size(); ++j) e[j] -= c * v[j];
        }
      }
      const double norm = std::sqrt(dot(e, e));
      if (norm < 1e-8) continue;
      for (auto& c : e) c /= norm;
      w_.push_back(std::move(e));
    }
  }

  /// The rank-th index (1-based) not in S.
  Index index_of_rank(std::size_t rank) const {
    Index j = rank;
    for (Index s : support_) {
      if (s <= j) {
        ++j;
      } else {
        break;
      }
    }
    return j;
  }

  std::vector<SparseVector> a_, b_;
  std::vector<Index> support_;
  std::vector<std::vector<double>> a_dense_, b_dense_, w_;
};

}  // namespace detail

/// Complex structure swapping a into b: u(a_k) = b_k, u(b_k) = -a_k, with the
/// omega pairing re-indexed on the orthogonal complement.
inline ComplexStructure ComplexStructure::from_blocks(const BlockBasis& a, const BlockBasis& b) {
  auto impl = std::make_shared<const detail::BlockStructure>(a, b);
  const std::size_t dim = impl->max_support_index() + 8;
  return ComplexStructure("blocks(" + a.label() + "," + b.label() + ")",
                          [impl](const SparseVector& x) { return impl->apply(x); }, dim);
}

inline constexpr double structure_tolerance = 1e-9;

struct StructureReport {
  std::string structure;
  std::uint64_t trials = 0;
  std::size_t dim = 0;
  std::int64_t seed = 0;
  double max_defect = 0.0;
  bool passes = false;
  SparseVector witness;
};

/// max over Gaussian x on 1..dim of ||u(u(x)) + x|| / ||x||; passes when the
/// maximum is at most `tolerance`. dim = 0 uses the structure's sample range.
inline StructureReport check_structure(const ComplexStructure& u, std::uint64_t trials,
                                       std::int64_t seed, std::size_t dim = 0,
                                       double tolerance = structure_tolerance,
                                       unsigned workers = 1) {
  if (trials == 0) throw invalid_input("trials must be >= 1");
  if (dim == 0) dim = u.sample_dim();
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_vectors, t);
    return rng::gaussian_vector(eng, dim);
  };
  const auto defects = map_indexed(trials, workers, [&](std::size_t t) {
    const SparseVector x = sample(t);
    return l2_norm(u(u(x)) + x) / l2_norm(x);
  });
  const std::size_t best = argmax_first(defects);
  return {u.label(), trials, dim, seed, defects[best], defects[best] <= tolerance, sample(best)};
}

/// ||u(Omega x) - Omega(u x)|| / ||x||.
inline double commutator_ratio(const ComplexStructure& u, const QuasiMap& omega,
                               const SparseVector& x) {
  const double n = l2_norm(x);
  if (n == 0.0) return 0.0;
  return l2_norm(u(omega(x)) - omega(u(x))) / n;
}

/// Sampled lower estimate of the commutator norm ||[u, Omega]||.
inline EstimatorReport commutator_defect(const ComplexStructure& u, const QuasiMap& omega,
                                         std::uint64_t trials, std::size_t dim,
                                         std::int64_t seed, unsigned workers = 1) {
  if (trials == 0) throw invalid_input("trials must be >= 1");
  if (dim == 0) throw invalid_input("dim must be >= 1");
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_vectors, t);
    return rng::gaussian_vector(eng, dim);
  };
  const auto ratios = map_indexed(trials, workers, [&](std::size_t t) {
    return commutator_ratio(u, omega, sample(t));
  });
  const std::size_t best = argmax_first(ratios);
  return {omega.label() + " vs " + u.label(), "commutator", trials, dim, seed, ratios[best],
          {sample(best)}};
}

/// A(x)_n = x_{2n-1} + i x_{2n}.
inline ComplexVector complexify_A(const SparseVector& x) {
  std::vector<ComplexVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [j, v] : x) {
    const Index n = (j + 1) / 2;
    if (!out.empty() && out.back().first == n) {
      out.back().second += std::complex<double>(0.0, v);  // j even follows j - 1
    } else if (j % 2 == 1) {
      out.emplace_back(n, std::complex<double>(v, 0.0));
    } else {
      out.emplace_back(n, std::complex<double>(0.0, v));
    }
  }
  return ComplexVector::from_sorted(std::move(out));
}

/// Inverse of A.
inline SparseVector realify(const ComplexVector& z) {
  std::vector<SparseVector::Entry> out;
  out.reserve(2 * z.size());
  for (const auto& [n, v] : z) {
    if (v.real() != 0.0) out.emplace_back(2 * n - 1, v.real());
    if (v.imag() != 0.0) out.emplace_back(2 * n, v.imag());
  }
  return SparseVector::from_sorted(std::move(out));
}

/// ||A K(x) - K^C A(x)||.
inline double complexification_defect(const SparseVector& x) {
  return l2_norm(complexify_A(kalton_peck(x)) - kalton_peck_complex(complexify_A(x)));
}

/// Max ratio over a seeded batch, with the bound it is checked against.
struct BatchBound {
  std::string quantity;
  std::uint64_t samples = 0;
  std::int64_t seed = 0;
  std::size_t min_dim = 0;
  std::size_t max_dim = 0;
  double value = 0.0;
  double bound = 0.0;
  std::vector<SparseVector> argmax_witness;
};

inline const double complexification_bound = std::sqrt(2.0);
inline const double t_split_bound = 5.0 + std::log(std::sqrt(2.0));

namespace detail {

inline std::size_t sample_dim(std::int64_t seed, std::size_t t, std::size_t lo, std::size_t hi) {
  auto eng = rng::engine_for(seed, rng::stream_dims, t);
  return std::uniform_int_distribution<std::size_t>(lo, hi)(eng);
}

}  // namespace detail

/// max over Gaussian x (dimension uniform in [min_dim, max_dim]) of
/// complexification_defect(x) / ||x||.
inline BatchBound complexification_batch(std::uint64_t samples, std::int64_t seed,
                                         std::size_t min_dim = 2, std::size_t max_dim = 128,
                                         unsigned workers = 1) {
  if (samples == 0) throw invalid_input("samples must be >= 1");
  if (min_dim == 0 || min_dim > max_dim) throw invalid_input("need 1 <= min_dim <= max_dim");
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_vectors, t);
    return rng::gaussian_vector(eng, detail::sample_dim(seed, t, min_dim, max_dim));
  };
  const auto ratios = map_indexed(samples, workers, [&](std::size_t t) {
    const SparseVector x = sample(t);
    return complexification_defect(x) / l2_norm(x);
  });
  const std::size_t best = argmax_first(ratios);
  return {"complexification-defect", samples, seed, min_dim, max_dim, ratios[best],
          complexification_bound, {sample(best)}};
}

/// (sum v_{2n-1} e_n, sum v_{2n} e_n).
inline std::pair<SparseVector, SparseVector> split_parity(const SparseVector& v) {
  std::vector<SparseVector::Entry> odd, even;
  for (const auto& [j, c] : v) {
    if (j % 2 == 1) {
      odd.emplace_back((j + 1) / 2, c);
    } else {
      even.emplace_back(j / 2, c);
    }
  }
  return {SparseVector::from_sorted(std::move(odd)), SparseVector::from_sorted(std::move(even))};
}

/// T(x, y) = ((x_odd, y_odd), (x_even, y_even)). Points are written with the
/// quotient coordinate second: (x, y) here is TwistedPoint{w = x, x = y}.
inline std::pair<TwistedPoint, TwistedPoint> complexify_T(const TwistedPoint& p) {
  auto [w_odd, w_even] = split_parity(p.w);
  auto [x_odd, x_even] = split_parity(p.x);
  return {TwistedPoint{std::move(w_odd), std::move(x_odd), p.map},
          TwistedPoint{std::move(w_even), std::move(x_even), p.map}};
}

/// (||T(p)_odd|| + ||T(p)_even||) / ||p||, after scaling p so that the
/// larger of the two quotient halves has unit norm. The ratio itself is
/// scale invariant; the scaling reproduces the normalization of the bound.
inline double split_norm_ratio(const TwistedPoint& p) {
  auto [x_odd, x_even] = split_parity(p.x);
  const double m = std::max(l2_norm(x_odd), l2_norm(x_even));
  TwistedPoint q = p;
  if (m > 0.0) {
    q.w = (1.0 / m) * p.w;
    q.x = (1.0 / m) * p.x;
  }
  const double denom = twisted_quasinorm(q);
  if (denom == 0.0) return 0.0;
  const auto [odd, even] = complexify_T(q);
  return (twisted_quasinorm(odd) + twisted_quasinorm(even)) / denom;
}

/// max split_norm_ratio over a seeded batch. Even-numbered samples draw both
/// coordinates Gaussian; odd-numbered ones put w = K(x) + 0.1 g so the
/// twisted part of the quasi-norm is small.
inline BatchBound t_bound_batch(std::uint64_t samples, std::int64_t seed,
                                std::size_t min_dim = 2, std::size_t max_dim = 128,
                                unsigned workers = 1) {
  if (samples == 0) throw invalid_input("samples must be >= 1");
  if (min_dim == 0 || min_dim > max_dim) throw invalid_input("need 1 <= min_dim <= max_dim");
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_vectors, t);
    const std::size_t dim = detail::sample_dim(seed, t, min_dim, max_dim);
    SparseVector x = rng::gaussian_vector(eng, dim);
    SparseVector w = rng::gaussian_vector(eng, dim);
    if (t % 2 == 1) w = kalton_peck(x) + 0.1 * w;
    return TwistedPoint{std::move(w), std::move(x), kalton_peck_map()};
  };
  const auto ratios = map_indexed(samples, workers, [&](std::size_t t) {
    return split_norm_ratio(sample(t));
  });
  const std::size_t best = argmax_first(ratios);
  const TwistedPoint p = sample(best);
  return {"t-split-ratio", samples, seed, min_dim, max_dim, ratios[best], t_split_bound,
          {p.w, p.x}};
}

/// For T = diag(t), t_n > 0:
///   K(Tx) - T K(x) = diag(t ln t) x + ln(||x|| / ||Tx||) T x.
/// Returns the norm of the nonlinear part, which is at most
/// ||T|| ln(c) ||x|| with c = max(max t, 1 / min t).
inline double diagonal_commutator_remainder(std::span<const double> t, const SparseVector& x) {
  if (!x.empty() && x.max_index() > t.size()) throw invalid_input("x outside diagonal range");
  std::vector<SparseVector::Entry> tx, linear;
  for (const auto& [i, v] : x) {
    const double ti = t[i - 1];
    if (ti <= 0.0) throw invalid_input("diagonal entries must be positive");
    tx.emplace_back(i, ti * v);
    linear.emplace_back(i, ti * std::log(ti) * v);
  }
  const SparseVector txv = SparseVector::from_sorted(std::move(tx));
  std::vector<SparseVector::Entry> tkx;
  for (const auto& [i, v] : kalton_peck(x)) tkx.emplace_back(i, t[i - 1] * v);
  return l2_norm(kalton_peck(txv) - SparseVector::from_sorted(std::move(tkx)) -
                 SparseVector::from_sorted(std::move(linear)));
}

inline double diagonal_commutator_bound(std::span<const double> t, const SparseVector& x) {
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (double v : t) {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  const double c = std::max({1.0, hi, 1.0 / lo});
  return hi * std::log(c) * l2_norm(x);
}

struct ObstructionTerms {
  SignAverageResult numerator;  // nabla over lambda b
  SignAverageResult trivial_part;  // nabla over lambda a
  double denominator = 0.0;  // ||lambda|| + nabla over lambda a
  double ratio = 0.0;
};

namespace detail {

inline void require_disjoint(const BlockBasis& a, const BlockBasis& b) {
  if (a.size() != b.size()) throw invalid_input("bases a and b must have equal length");
  const auto sa = a.support();
  const auto sb = b.support();
  std::vector<Index> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw invalid_input("bases a and b overlap at index " + std::to_string(common.front()));
  }
}

inline ObstructionTerms assemble(SignAverageResult num, SignAverageResult den,
                                 std::span<const double> lambda) {
  double norm_sq = 0.0;
  for (double l : lambda) norm_sq += l * l;
  const double denominator = std::sqrt(norm_sq) + den.value;
  return {num, den, denominator, denominator == 0.0 ? 0.0 : num.value / denominator};
}

}  // namespace detail

/// nabla_[lambda b] Omega / (||lambda|| + nabla_[lambda a] Omega), both sign
/// averages exact.
inline ObstructionTerms obstruction_ratio(const QuasiMap& omega, const BlockBasis& a,
                                          const BlockBasis& b, std::span<const double> lambda) {
  detail::require_disjoint(a, b);
  return detail::assemble(nabla_exact(omega, b, lambda), nabla_exact(omega, a, lambda), lambda);
}

struct ObstructionRow {
  std::size_t n = 0;
  ObstructionTerms terms;
  Method method = Method::exact;
};

/// Ratio for n in [first, last] with a = walsh_block(n), b = canonical_basis(n)
/// and all-ones coefficients. Each sign average is exact within the work
/// budget and sampled beyond it.
inline std::vector<ObstructionRow> obstruction_scan(const QuasiMap& omega, std::size_t first,
                                                    std::size_t last, std::uint64_t samples,
                                                    std::int64_t seed,
                                                    std::uint64_t work_budget = default_work_budget,
                                                    unsigned workers = 1) {
  if (first == 0 || first > last) throw invalid_input("scan range must satisfy 1 <= from <= to");
  std::vector<ObstructionRow> rows;
  for (std::size_t n = first; n <= last; ++n) {
    const BlockBasis a = walsh_block(n);
    const BlockBasis b = canonical_basis(n);
    detail::require_disjoint(a, b);
    const std::vector<double> ones(n, 1.0);
    auto num = nabla_auto(omega, b, ones, samples, seed, work_budget, workers);
    auto den = nabla_auto(omega, a, ones, samples, seed, work_budget, workers);
    const Method m = (num.method == Method::exact && den.method == Method::exact)
                         ? Method::exact
                         : Method::monte_carlo;
    rows.push_back({n, detail::assemble(num, den, ones), m});
  }
  return rows;
}

}  // namespace twlab
