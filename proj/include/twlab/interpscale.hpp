#pragma once

// Explicit computations on the l_p interpolation scale at theta = 1/2: the
// homogeneous selection z -> x^{2(1-z)} and its derivative, the analytic
// family on Walsh spans, and the near-eigenvector defect of K on those spans.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "twlab/errors.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"

namespace twlab {

/// Conjugate exponents p, p' with 1/p + 1/p' = 1, interpolated at theta = 1/2.
/// The endpoints p = 1 (p' = inf) and p = 2 are admitted as limits.
struct ScaleParams {
  double p = 1.5;
  double p_prime = 3.0;
  double theta = 0.5;

  static ScaleParams from_p(double p) {
    if (!(p >= 1.0 && p <= 2.0)) {
      throw invalid_input("p must lie in [1, 2], got " + std::to_string(p));
    }
    const double q = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    return {p, q, 0.5};
  }

  double conjugacy_defect() const { return std::abs(1.0 / p + 1.0 / p_prime - 1.0); }
};

/// B(x)(z)_i = ||x|| sign(x_i) |x_i / ||x|||^{2(1-z)} for real z; equals x at
/// z = 1/2.
inline SparseVector selection(const SparseVector& x, double z) {
  const double norm = l2_norm(x);
  std::vector<SparseVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [i, v] : x) {
    const double u = std::abs(v) / norm;
    out.emplace_back(i, std::copysign(norm * std::pow(u, 2.0 * (1.0 - z)), v));
  }
  return SparseVector::from_sorted(std::move(out));
}

/// d/dz B(x)(z) at z = 1/2, coordinate-wise
///   ||x|| sign(x_i) |u_i|^{2(1-z)} (-2 ln|u_i|)  at z = 1/2,  u = x / ||x||.
inline SparseVector selection_derivative(const SparseVector& x) {
  const double norm = l2_norm(x);
  std::vector<SparseVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [i, v] : x) {
    const double u = std::abs(v) / norm;
    out.emplace_back(i, std::copysign(norm * u, v) * (-2.0 * std::log(u)));
  }
  return SparseVector::from_sorted(std::move(out));
}

/// Derivative at z = 1/2 of 2^{n(1/2 - 1/p)(1 - 2z)}: the scalar by which
/// g_x'(1/2) multiplies x.
inline double g_derivative_factor(std::size_t n, const ScaleParams& params) {
  if (n == 0) throw invalid_input("n must be >= 1");
  return -2.0 * static_cast<double>(n) * std::log(2.0) * (0.5 - 1.0 / params.p);
}

/// K f^n_k = walsh_eigenvalue(n) f^n_k for every k.
inline double walsh_eigenvalue(std::size_t n) {
  return -static_cast<double>(n) * std::log(2.0) / 2.0;
}

/// ||K(x) - c_n x|| for x in span(walsh_block(n)).
inline double eigen_defect(const SparseVector& x, std::size_t n) {
  return l2_norm(kalton_peck(x) - walsh_eigenvalue(n) * x);
}

struct DefectReport {
  std::size_t n = 0;
  double c_n = 0.0;
  double defect_max = 0.0;
  std::uint64_t samples = 0;
  std::int64_t seed = 0;
  std::vector<double> witness_coefficients;
};

/// Unit Gaussian coefficients on the Walsh block, sample t.
inline std::vector<double> walsh_coefficients(std::size_t n, std::int64_t seed, std::size_t t) {
  auto eng = rng::engine_for(seed, rng::stream_vectors, t);
  auto a = rng::gaussian_values(eng, n);
  double s = 0.0;
  for (double v : a) s += v * v;
  s = std::sqrt(s);
  for (auto& v : a) v /= s;
  return a;
}

/// max over sampled unit x in span(walsh_block(n)) of ||K(x) - c_n x||.
inline DefectReport near_eigenvector_defect(std::size_t n, std::uint64_t samples,
                                            std::int64_t seed, unsigned workers = 1) {
  if (samples == 0) throw invalid_input("samples must be >= 1");
  const BlockBasis f = walsh_block(n);
  const auto defects = map_indexed(samples, workers, [&](std::size_t t) {
    return eigen_defect(f.combine(walsh_coefficients(n, seed, t)), n);
  });
  const std::size_t best = argmax_first(defects);
  return {n, walsh_eigenvalue(n), defects[best], samples, seed,
          walsh_coefficients(n, seed, best)};
}

}  // namespace twlab
