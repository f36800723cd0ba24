#pragma once

// Two-sided numerical evidence for the distance from a quasi-linear map to
// the linear maps on the span of a block basis.
//
// Lower side: if Omega = B + L on span(b) with B bounded and L linear, then
// nabla_[lambda b] Omega <= 2 ||B|| ||lambda||, so every lambda certifies
// ||B|| >= nabla / (2 ||lambda||).
//
// Upper side: with the canonical linear candidate L(sum c_k b_k) =
// sum c_k Omega(b_k), maximize ||Omega(x) - L(x)|| over the unit sphere of
// span(b) by multi-start projected gradient ascent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twlab/errors.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"
#include "twlab/signavg.hpp"

namespace twlab {

struct LowerSearch {
  std::size_t random_signs = 8;
  std::size_t random_gaussian = 8;
  std::int64_t seed = 0;
  /// Used only when a candidate is too large for exact enumeration.
  std::uint64_t mc_samples = 256;
  std::uint64_t work_budget = default_work_budget;
  unsigned workers = 1;
};

struct LowerBound {
  double value = 0.0;
  std::vector<double> witness_lambda;
  SignAverageResult nabla;
  std::size_t candidates = 0;
};

inline double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// max over searched lambda of nabla_[lambda b] Omega / (2 ||lambda||).
/// Candidates: all-ones first, then random sign vectors, then Gaussian
/// vectors. Ties keep the earliest candidate.
inline LowerBound trivdist_lower(const QuasiMap& omega, const BlockBasis& b,
                                 const LowerSearch& search = {}) {
  const std::size_t n = b.size();
  std::vector<std::vector<double>> candidates;
  candidates.emplace_back(n, 1.0);
  for (std::size_t k = 0; k < search.random_signs; ++k) {
    auto eng = rng::engine_for(search.seed, rng::stream_lambda, k);
    candidates.push_back(rng::random_signs(eng, n));
  }
  for (std::size_t k = 0; k < search.random_gaussian; ++k) {
    auto eng = rng::engine_for(search.seed, rng::stream_lambda, search.random_signs + k);
    candidates.push_back(rng::gaussian_values(eng, n));
  }
  LowerBound best;
  best.candidates = candidates.size();
  bool first = true;
  for (const auto& lambda : candidates) {
    const double norm = euclidean_norm(lambda);
    if (norm == 0.0) continue;
    const SignAverageResult r = nabla_auto(omega, b, lambda, search.mc_samples, search.seed,
                                           search.work_budget, search.workers);
    const double value = r.value / (2.0 * norm);
    if (first || value > best.value) {
      best.value = value;
      best.witness_lambda = lambda;
      best.nabla = r;
      first = false;
    }
  }
  return best;
}

struct UpperOptions {
  std::size_t restarts = 64;
  std::int64_t seed = 0;
  double fd_step = 1e-5;
  std::size_t max_steps = 500;
  double rel_tol = 1e-8;
  /// Starting coefficient vectors tried before the random restarts.
  std::vector<std::vector<double>> extra_starts;
  unsigned workers = 1;
};

struct UpperBound {
  double value = 0.0;
  std::vector<double> witness_coefficients;
  SparseVector witness_x;
  std::size_t restarts = 0;
  std::int64_t seed = 0;
};

/// ||Omega(x) - L(x)|| / ||x|| at x = sum c_k b_k.
class LinearDefect {
 public:
  LinearDefect(const QuasiMap& omega, const BlockBasis& b) : omega_(omega), basis_(b) {
    images_.reserve(b.size());
    for (const auto& v : b) images_.push_back(omega(v));
  }

  double operator()(std::span<const double> c) const {
    const SparseVector x = basis_.combine(c);
    const double nx = l2_norm(x);
    if (nx == 0.0) return 0.0;
    std::vector<SparseVector::Entry> lin;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == 0.0) continue;
      for (const auto& [i, v] : images_[k]) lin.emplace_back(i, c[k] * v);
    }
    return l2_norm(omega_(x) - sum_entries(std::move(lin))) / nx;
  }

  std::size_t dim() const noexcept { return basis_.size(); }
  const BlockBasis& basis() const noexcept { return basis_; }

 private:
  static SparseVector sum_entries(std::vector<SparseVector::Entry> e) {
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SparseVector::Entry> out;
    for (const auto& x : e) {
      if (!out.empty() && out.back().first == x.first) {
        out.back().second += x.second;
      } else {
        out.push_back(x);
      }
    }
    return SparseVector::from_sorted(std::move(out));
  }

  QuasiMap omega_;
  BlockBasis basis_;
  std::vector<SparseVector> images_;
};

namespace detail {

inline void normalize(std::vector<double>& c) {
  const double n = euclidean_norm(c);
  if (n > 0.0) {
    for (auto& v : c) v /= n;
  }
}

struct AscentResult {
  double value;
  std::vector<double> point;
};

/// Projected gradient ascent on the unit sphere with central-difference
/// gradients and backtracking along the unit tangent direction. Only
/// improving steps are accepted.
inline AscentResult sphere_ascent(const LinearDefect& f, std::vector<double> c,
                                  const UpperOptions& opt) {
  normalize(c);
  double value = f(c);
  const std::size_t n = c.size();
  double step = 1.0;
  std::vector<double> g(n), trial(n), probe(n);
  for (std::size_t it = 0; it < opt.max_steps; ++it) {
    for (std::size_t k = 0; k < n; ++k) {
      probe = c;
      probe[k] = c[k] + opt.fd_step;
      const double up = f(probe);
      probe[k] = c[k] - opt.fd_step;
      const double down = f(probe);
      g[k] = (up - down) / (2.0 * opt.fd_step);
    }
    double radial = 0.0;
    for (std::size_t k = 0; k < n; ++k) radial += g[k] * c[k];
    for (std::size_t k = 0; k < n; ++k) g[k] -= radial * c[k];
    // Unit direction, so the path does not depend on the scale of Omega.
    const double gn = euclidean_norm(g);
    if (gn == 0.0 || !std::isfinite(gn)) break;
    for (auto& v : g) v /= gn;

    bool accepted = false;
    double next = value;
    for (double t = std::min(1.0, 2.0 * step); t > 1e-12; t *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = c[k] + t * g[k];
      normalize(trial);
      next = f(trial);
      if (next > value) {
        step = t;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double gain = (next - value) / std::max(std::abs(value), 1e-300);
    c = trial;
    value = next;
    if (gain < opt.rel_tol) break;
  }
  return {value, std::move(c)};
}

}  // namespace detail

/// Best value of ||Omega(x) - L(x)|| found on the unit sphere of span(b).
/// A lower estimate of the sup, reported as the empirical upper-bound
/// candidate for the triviality constant.
inline UpperBound trivdist_upper(const QuasiMap& omega, const BlockBasis& b,
                                 const UpperOptions& opt = {}) {
  const LinearDefect f(omega, b);
  const std::size_t n = b.size();
  const std::size_t total = opt.extra_starts.size() + opt.restarts;
  if (total == 0) throw invalid_input("trivdist_upper needs at least one start");
  auto start = [&](std::size_t r) {
    if (r < opt.extra_starts.size()) {
      if (opt.extra_starts[r].size() != n) throw invalid_input("start point has wrong length");
      return opt.extra_starts[r];
    }
    auto eng = rng::engine_for(opt.seed, rng::stream_restarts, r - opt.extra_starts.size());
    return rng::gaussian_values(eng, n);
  };
  const auto results = map_indexed(total, opt.workers, [&](std::size_t r) {
    return detail::sphere_ascent(f, start(r), opt);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].value > results[best].value) best = r;
  }
  UpperBound out;
  out.value = results[best].value;
  out.witness_coefficients = results[best].point;
  out.witness_x = b.combine(out.witness_coefficients);
  out.restarts = total;
  out.seed = opt.seed;
  return out;
}

}  // namespace twlab
