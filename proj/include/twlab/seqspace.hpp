#pragma once

// Finitely supported sequences over the 1-based index set {1, 2, ...}, the
// signed permutation operators acting on them, and the disjoint block bases
// used by the estimators.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twlab/errors.hpp"

namespace twlab {

using Index = std::size_t;

namespace detail {

template <class Scalar>
double squared_modulus(Scalar v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return v * v;
  } else {
    return std::norm(v);
  }
}

}  // namespace detail

/// Finitely supported sequence with coefficients in `Scalar`.
///
/// Entries are kept sorted by index and never hold an exact zero, so two
/// vectors are equal iff their entry lists are equal. Index 0 is invalid.
template <class Scalar>
class BasicSparseVector {
 public:
  using scalar_type = Scalar;
  using Entry = std::pair<Index, Scalar>;

  BasicSparseVector() = default;

  /// Builds from unordered entries. Zero coefficients are dropped; index 0
  /// and duplicated indices are rejected.
  explicit BasicSparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (entries_[k].first == 0) {
        throw invalid_input("sequence indices are 1-based; got index 0");
      }
      if (k > 0 && entries_[k].first == entries_[k - 1].first) {
        throw invalid_input("duplicate index " + std::to_string(entries_[k].first));
      }
    }
    drop_zeros();
  }

  BasicSparseVector(std::initializer_list<Entry> entries)
      : BasicSparseVector(std::vector<Entry>(entries)) {}

  static BasicSparseVector unit(Index i, Scalar value = Scalar{1}) {
    return BasicSparseVector({{i, value}});
  }

  /// values[0] lands on index `first`.
  static BasicSparseVector from_dense(std::span<const Scalar> values, Index first = 1) {
    if (first == 0) throw invalid_input("sequence indices are 1-based; got index 0");
    BasicSparseVector out;
    out.entries_.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k] != Scalar{}) out.entries_.emplace_back(first + k, values[k]);
    }
    return out;
  }

  /// Caller guarantees strictly increasing nonzero indices.
  static BasicSparseVector from_sorted(std::vector<Entry> entries) {
    BasicSparseVector out;
    out.entries_ = std::move(entries);
    out.drop_zeros();
    return out;
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  Index min_index() const noexcept { return entries_.empty() ? 0 : entries_.front().first; }
  Index max_index() const noexcept { return entries_.empty() ? 0 : entries_.back().first; }

  std::vector<Index> support() const {
    std::vector<Index> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  Scalar operator[](Index i) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                               [](const Entry& e, Index j) { return e.first < j; });
    return (it != entries_.end() && it->first == i) ? it->second : Scalar{};
  }

  friend bool operator==(const BasicSparseVector&, const BasicSparseVector&) = default;

  BasicSparseVector operator-() const {
    BasicSparseVector out = *this;
    for (auto& e : out.entries_) e.second = -e.second;
    return out;
  }

  friend BasicSparseVector operator+(const BasicSparseVector& a, const BasicSparseVector& b) {
    return merge(a, b, Scalar{1});
  }
  friend BasicSparseVector operator-(const BasicSparseVector& a, const BasicSparseVector& b) {
    return merge(a, b, Scalar{-1});
  }
  BasicSparseVector& operator+=(const BasicSparseVector& b) { return *this = *this + b; }
  BasicSparseVector& operator-=(const BasicSparseVector& b) { return *this = *this - b; }

  friend BasicSparseVector operator*(Scalar t, const BasicSparseVector& a) {
    std::vector<Entry> out;
    out.reserve(a.entries_.size());
    for (const auto& [i, v] : a.entries_) out.emplace_back(i, t * v);
    return from_sorted(std::move(out));
  }
  friend BasicSparseVector operator*(const BasicSparseVector& a, Scalar t) { return t * a; }

  /// Coordinate-wise product (multiplication operator by `f`).
  friend BasicSparseVector hadamard(const BasicSparseVector& f, const BasicSparseVector& x) {
    std::vector<Entry> out;
    auto it = f.entries_.begin();
    for (const auto& [i, v] : x.entries_) {
      while (it != f.entries_.end() && it->first < i) ++it;
      if (it != f.entries_.end() && it->first == i) out.emplace_back(i, it->second * v);
    }
    return from_sorted(std::move(out));
  }

  /// Keeps the coordinates in [first, last].
  BasicSparseVector restricted(Index first, Index last) const {
    std::vector<Entry> out;
    for (const auto& e : entries_) {
      if (e.first >= first && e.first <= last) out.push_back(e);
    }
    return from_sorted(std::move(out));
  }

 private:
  static BasicSparseVector merge(const BasicSparseVector& a, const BasicSparseVector& b,
                                 Scalar sign) {
    std::vector<Entry> out;
    out.reserve(a.entries_.size() + b.entries_.size());
    auto ia = a.entries_.begin();
    auto ib = b.entries_.begin();
    while (ia != a.entries_.end() || ib != b.entries_.end()) {
      if (ib == b.entries_.end() || (ia != a.entries_.end() && ia->first < ib->first)) {
        out.push_back(*ia++);
      } else if (ia == a.entries_.end() || ib->first < ia->first) {
        out.emplace_back(ib->first, sign * ib->second);
        ++ib;
      } else {
        out.emplace_back(ia->first, ia->second + sign * ib->second);
        ++ia;
        ++ib;
      }
    }
    return from_sorted(std::move(out));
  }

  void drop_zeros() {
    std::erase_if(entries_, [](const Entry& e) { return e.second == Scalar{}; });
  }

  std::vector<Entry> entries_;
};

using SparseVector = BasicSparseVector<double>;
using ComplexVector = BasicSparseVector<std::complex<double>>;

/// Euclidean norm. Squares are summed in ascending order so the result is
/// bit-identical under any signed permutation of the coordinates.
template <class Scalar>
double l2_norm(const BasicSparseVector<Scalar>& x) {
  std::vector<double> sq;
  sq.reserve(x.size());
  for (const auto& e : x) sq.push_back(detail::squared_modulus(e.second));
  std::sort(sq.begin(), sq.end());
  return std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0));
}

inline double inner(const SparseVector& a, const SparseVector& b) {
  double acc = 0.0;
  auto ib = b.begin();
  for (const auto& [i, v] : a) {
    while (ib != b.end() && ib->first < i) ++ib;
    if (ib == b.end()) break;
    if (ib->first == i) acc += v * ib->second;
  }
  return acc;
}

/// Lifts a real vector to a complex one with zero imaginary parts.
inline ComplexVector to_complex(const SparseVector& x) {
  std::vector<ComplexVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [i, v] : x) out.emplace_back(i, std::complex<double>(v, 0.0));
  return ComplexVector::from_sorted(std::move(out));
}

inline constexpr double basis_tolerance = 1e-12;

/// Ordered orthonormal family of finitely supported vectors. Canonical
/// vectors are also disjointly supported; the Walsh vectors of one block
/// share a support.
class BlockBasis {
 public:
  struct trusted_t {};
  /// Skips validation; for generators that are orthonormal by construction.
  static constexpr trusted_t trusted{};

  BlockBasis(std::vector<SparseVector> vectors, std::string label)
      : BlockBasis(std::move(vectors), std::move(label), trusted) {
    for (std::size_t k = 0; k < vectors_.size(); ++k) {
      if (std::abs(l2_norm(vectors_[k]) - 1.0) > basis_tolerance) {
        throw invalid_input("block basis vector " + std::to_string(k + 1) +
                            " is not normalized");
      }
    }
    if (disjoint_) return;
    for (std::size_t j = 0; j < vectors_.size(); ++j) {
      for (std::size_t k = j + 1; k < vectors_.size(); ++k) {
        if (std::abs(inner(vectors_[j], vectors_[k])) > basis_tolerance) {
          throw invalid_input("block basis vectors " + std::to_string(j + 1) + " and " +
                              std::to_string(k + 1) + " are not orthogonal");
        }
      }
    }
  }

  BlockBasis(std::vector<SparseVector> vectors, std::string label, trusted_t)
      : vectors_(std::move(vectors)), label_(std::move(label)) {
    if (vectors_.empty()) throw invalid_input("a block basis needs at least one vector");
    std::size_t total = 0;
    for (const auto& v : vectors_) {
      const auto s = v.support();
      support_.insert(support_.end(), s.begin(), s.end());
      total += s.size();
    }
    std::sort(support_.begin(), support_.end());
    support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
    disjoint_ = support_.size() == total;
  }

  std::size_t size() const noexcept { return vectors_.size(); }
  const SparseVector& operator[](std::size_t k) const { return vectors_[k]; }
  const std::vector<SparseVector>& vectors() const noexcept { return vectors_; }
  const std::string& label() const noexcept { return label_; }
  auto begin() const noexcept { return vectors_.begin(); }
  auto end() const noexcept { return vectors_.end(); }

  /// True when no index carries two vectors.
  bool disjoint() const noexcept { return disjoint_; }

  /// Sorted union of the supports, without repeats.
  const std::vector<Index>& support() const noexcept { return support_; }

  /// Sum of coefficients[k] * vectors[k].
  SparseVector combine(std::span<const double> coefficients) const {
    if (coefficients.size() != vectors_.size()) {
      throw invalid_input("coefficient list length " + std::to_string(coefficients.size()) +
                          " does not match basis size " + std::to_string(vectors_.size()));
    }
    std::vector<double> dense(support_.size(), 0.0);
    for (std::size_t k = 0; k < vectors_.size(); ++k) {
      if (coefficients[k] == 0.0) continue;
      auto it = support_.begin();
      for (const auto& [i, v] : vectors_[k]) {
        it = std::lower_bound(it, support_.end(), i);
        dense[static_cast<std::size_t>(it - support_.begin())] += coefficients[k] * v;
      }
    }
    std::vector<SparseVector::Entry> out;
    out.reserve(support_.size());
    for (std::size_t r = 0; r < support_.size(); ++r) out.emplace_back(support_[r], dense[r]);
    return SparseVector::from_sorted(std::move(out));
  }

 private:
  std::vector<SparseVector> vectors_;
  std::string label_;
  std::vector<Index> support_;
  bool disjoint_ = true;
};

/// (e_1, ..., e_n).
inline BlockBasis canonical_basis(std::size_t n) {
  if (n == 0) throw invalid_input("canonical basis needs n >= 1");
  std::vector<SparseVector> v;
  v.reserve(n);
  for (Index i = 1; i <= n; ++i) v.push_back(SparseVector::unit(i));
  return BlockBasis(std::move(v), "canonical");
}

inline constexpr std::size_t default_walsh_budget = 20;

/// The n Rademacher-type vectors on the dyadic block [2^n, 2^{n+1} - 1].
///
/// Vector k has coefficient +-2^{-n/2} at index 2^n + t (0 <= t < 2^n), with
/// sign (-1)^{bit k-1 of t}: sign blocks of length 2^{k-1}, alternating,
/// starting positive.
inline BlockBasis walsh_block(std::size_t n, std::size_t max_n = default_walsh_budget) {
  if (n == 0) throw invalid_input("walsh block needs n >= 1");
  if (n > max_n) {
    throw budget_exceeded("walsh block n = " + std::to_string(n) + " exceeds the index budget " +
                          std::to_string(max_n));
  }
  const Index offset = Index{1} << n;
  const double amplitude = std::pow(2.0, -0.5 * static_cast<double>(n));
  std::vector<SparseVector> v;
  v.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<SparseVector::Entry> entries;
    entries.reserve(offset);
    for (Index t = 0; t < offset; ++t) {
      const double sign = ((t >> k) & 1U) ? -1.0 : 1.0;
      entries.emplace_back(offset + t, sign * amplitude);
    }
    v.push_back(SparseVector::from_sorted(std::move(entries)));
  }
  return BlockBasis(std::move(v), "walsh-" + std::to_string(n), BlockBasis::trusted);
}

/// Gram matrix <b_j, b_k>, row-major.
inline std::vector<double> gram_matrix(const BlockBasis& b) {
  const std::size_t n = b.size();
  std::vector<double> g(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) g[j * n + k] = inner(b[j], b[k]);
  }
  return g;
}

/// Operator x -> y with y_n = sign_n * x_{source(n)}.
///
/// Either a finite table on {1..N}, or the built-in omega with
/// source = (2,1)(4,3)... and sign_n = (-1)^n, defined on every index.
class SignedPermutation {
 public:
  /// source[n-1] and signs[n-1] describe output coordinate n.
  SignedPermutation(std::vector<Index> source, std::vector<int> signs)
      : source_(std::move(source)), signs_(std::move(signs)) {
    const std::size_t n = source_.size();
    if (signs_.size() != n) throw invalid_input("permutation and sign tables differ in length");
    target_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const Index s = source_[k];
      if (s == 0 || s > n || target_[s - 1] != 0) {
        throw invalid_input("source table is not a permutation of 1.." + std::to_string(n));
      }
      target_[s - 1] = k + 1;
      if (signs_[k] != 1 && signs_[k] != -1) throw invalid_input("signs must be +1 or -1");
    }
  }

  /// omega((x_n)) = ((-1)^n x_{sigma(n)}), sigma = (2,1)(4,3)...
  static SignedPermutation omega() {
    SignedPermutation p;
    p.omega_ = true;
    return p;
  }

  /// omega materialized as a finite table on {1..n}; n must be even.
  static SignedPermutation omega_table(std::size_t n) {
    if (n % 2 != 0) throw invalid_input("omega needs an even-sized index range");
    std::vector<Index> src(n);
    std::vector<int> sg(n);
    for (Index k = 1; k <= n; ++k) {
      src[k - 1] = omega_source(k);
      sg[k - 1] = omega_sign(k);
    }
    return SignedPermutation(std::move(src), std::move(sg));
  }

  bool is_omega() const noexcept { return omega_; }
  /// 0 for the unbounded built-in omega.
  std::size_t range() const noexcept { return omega_ ? 0 : source_.size(); }

  Index source(Index n) const { return omega_ ? omega_source(n) : source_.at(n - 1); }
  int sign(Index n) const { return omega_ ? omega_sign(n) : signs_.at(n - 1); }

  template <class Scalar>
  BasicSparseVector<Scalar> apply(const BasicSparseVector<Scalar>& x) const {
    using Entry = typename BasicSparseVector<Scalar>::Entry;
    std::vector<Entry> out;
    out.reserve(x.size());
    for (const auto& [j, v] : x) {
      Index n = 0;
      if (omega_) {
        n = omega_source(j);  // sigma is an involution
      } else {
        if (j > target_.size()) {
          throw invalid_input("index " + std::to_string(j) + " outside permutation range 1.." +
                              std::to_string(target_.size()));
        }
        n = target_[j - 1];
      }
      out.emplace_back(n, sign(n) < 0 ? -v : v);
    }
    return BasicSparseVector<Scalar>(std::move(out));
  }

  template <class Scalar>
  BasicSparseVector<Scalar> operator()(const BasicSparseVector<Scalar>& x) const {
    return apply(x);
  }

  /// (outer o inner)(x) = outer(inner(x)). Omega operands are materialized on
  /// the range of the finite operand (rounded up to even).
  friend SignedPermutation compose(const SignedPermutation& outer, const SignedPermutation& inner) {
    std::size_t n = std::max(outer.range(), inner.range());
    if (n == 0) n = 2;
    if (n % 2 != 0 && (outer.omega_ || inner.omega_)) ++n;
    const SignedPermutation a = outer.omega_ ? omega_table(n) : outer;
    const SignedPermutation b = inner.omega_ ? omega_table(n) : inner;
    if (a.range() != b.range()) throw invalid_input("composed permutations differ in range");
    std::vector<Index> src(n);
    std::vector<int> sg(n);
    for (Index k = 1; k <= n; ++k) {
      const Index mid = a.source(k);
      src[k - 1] = b.source(mid);
      sg[k - 1] = a.sign(k) * b.sign(mid);
    }
    return SignedPermutation(std::move(src), std::move(sg));
  }

 private:
  SignedPermutation() = default;

  static Index omega_source(Index n) { return (n % 2 == 1) ? n + 1 : n - 1; }
  static int omega_sign(Index n) { return (n % 2 == 0) ? 1 : -1; }

  bool omega_ = false;
  std::vector<Index> source_;
  std::vector<int> signs_;
  std::vector<Index> target_;
};

}  // namespace twlab
