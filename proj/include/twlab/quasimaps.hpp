#pragma once

// Quasi-linear maps on finitely supported sequences: the Kalton-Peck map and
// its complex version, the relativized map on a block basis, the twisted
// quasi-norm, and sampled lower estimates of the quasi-linearity constant and
// the centralizer defect.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "twlab/errors.hpp"
#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"

namespace twlab {

enum class Homogeneity { real, complex };

/// A homogeneous map on finitely supported sequences, plus a label.
///
/// Maps form a vector space (sum, scalar multiple) and compose with linear
/// operators on either side.
template <class Vector>
class BasicQuasiMap {
 public:
  using vector_type = Vector;
  using Rule = std::function<Vector(const Vector&)>;
  using Linear = std::function<Vector(const Vector&)>;

  BasicQuasiMap(std::string label, Rule rule) : label_(std::move(label)), rule_(std::move(rule)) {}

  Vector operator()(const Vector& x) const { return rule_(x); }

  const std::string& label() const noexcept { return label_; }

  static constexpr Homogeneity homogeneity() noexcept {
    return std::is_same_v<Vector, ComplexVector> ? Homogeneity::complex : Homogeneity::real;
  }

  friend BasicQuasiMap operator+(const BasicQuasiMap& a, const BasicQuasiMap& b) {
    return BasicQuasiMap("(" + a.label_ + " + " + b.label_ + ")",
                         [a, b](const Vector& x) { return a(x) + b(x); });
  }

  friend BasicQuasiMap operator*(double t, const BasicQuasiMap& a) {
    std::string label = format_scalar(t) + "*" + a.label_;
    return BasicQuasiMap(std::move(label), [t, a](const Vector& x) {
      return typename Vector::scalar_type(t) * a(x);
    });
  }

  /// x -> this(op(x)).
  BasicQuasiMap after(Linear op, const std::string& op_label) const {
    return BasicQuasiMap(label_ + " o " + op_label,
                         [self = *this, op = std::move(op)](const Vector& x) { return self(op(x)); });
  }

  /// x -> op(this(x)).
  BasicQuasiMap then(Linear op, const std::string& op_label) const {
    return BasicQuasiMap(op_label + " o " + label_,
                         [self = *this, op = std::move(op)](const Vector& x) { return op(self(x)); });
  }

 private:
  static std::string format_scalar(double t) {
    std::string s = std::to_string(t);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  std::string label_;
  Rule rule_;
};

using QuasiMap = BasicQuasiMap<SparseVector>;
using ComplexQuasiMap = BasicQuasiMap<ComplexVector>;

/// K(x)_i = x_i ln(|x_i| / ||x||_2); zero coordinates stay absent.
inline SparseVector kalton_peck(const SparseVector& x) {
  const double norm = l2_norm(x);
  std::vector<SparseVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [i, v] : x) out.emplace_back(i, v * std::log(std::abs(v) / norm));
  return SparseVector::from_sorted(std::move(out));
}

/// Complex version, with the complex modulus in the logarithm.
inline ComplexVector kalton_peck_complex(const ComplexVector& x) {
  const double norm = l2_norm(x);
  std::vector<ComplexVector::Entry> out;
  out.reserve(x.size());
  for (const auto& [i, v] : x) out.emplace_back(i, v * std::log(std::abs(v) / norm));
  return ComplexVector::from_sorted(std::move(out));
}

inline QuasiMap kalton_peck_map() { return QuasiMap("kalton-peck", kalton_peck); }

inline ComplexQuasiMap kalton_peck_complex_map() {
  return ComplexQuasiMap("kalton-peck-complex", kalton_peck_complex);
}

/// A linear map viewed as a (trivially) quasi-linear one.
inline QuasiMap linear_map(std::string label, QuasiMap::Rule rule) {
  return QuasiMap(std::move(label), std::move(rule));
}

inline QuasiMap zero_map() {
  return QuasiMap("zero", [](const SparseVector&) { return SparseVector{}; });
}

/// Point (w, x) of the twisted sum governed by `map`; the second coordinate
/// is the quotient coordinate.
struct TwistedPoint {
  SparseVector w;
  SparseVector x;
  QuasiMap map = kalton_peck_map();
};

/// ||x|| + ||w - map(x)||.
inline double twisted_quasinorm(const TwistedPoint& p) {
  return l2_norm(p.x) + l2_norm(p.w - p.map(p.x));
}

/// Coordinates of x in the block basis h; throws if the residual of the
/// orthogonal projection exceeds `tolerance * ||x||`.
inline SparseVector coordinates_in(const BlockBasis& h, const SparseVector& x,
                                   double tolerance = 1e-9) {
  std::vector<double> coeff(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) coeff[k] = inner(x, h[k]);
  const double residual = l2_norm(x - h.combine(coeff));
  if (residual > tolerance * std::max(1.0, l2_norm(x))) {
    throw invalid_input("vector is not in the span of basis '" + h.label() + "'");
  }
  return SparseVector::from_dense(coeff, 1);
}

/// Omega_H(sum c_k u_k) = Omega(sum c_k u_k) - sum c_k Omega(u_k).
///
/// The returned map takes H-coordinates (indices 1..|H|) and returns ambient
/// vectors. It vanishes on every basis vector.
inline QuasiMap relativize(const QuasiMap& omega, const BlockBasis& h) {
  auto basis = std::make_shared<const BlockBasis>(h);
  auto images = std::make_shared<std::vector<SparseVector>>();
  images->reserve(h.size());
  for (const auto& u : h) images->push_back(omega(u));
  return QuasiMap(omega.label() + "_[" + h.label() + "]",
                  [omega, basis, images](const SparseVector& coords) {
                    if (!coords.empty() && coords.max_index() > basis->size()) {
                      throw invalid_input("coordinate index " + std::to_string(coords.max_index()) +
                                          " outside span of a " + std::to_string(basis->size()) +
                                          "-vector basis");
                    }
                    std::vector<double> c(basis->size(), 0.0);
                    for (const auto& [k, v] : coords) c[k - 1] = v;
                    SparseVector out = omega(basis->combine(c));
                    for (const auto& [k, v] : coords) out -= v * (*images)[k - 1];
                    return out;
                  });
}

/// ||Omega(x + y) - Omega(x) - Omega(y)|| / (||x|| + ||y||).
inline double quasilinearity_ratio(const QuasiMap& omega, const SparseVector& x,
                                   const SparseVector& y) {
  const double denom = l2_norm(x) + l2_norm(y);
  if (denom == 0.0) return 0.0;
  return l2_norm(omega(x + y) - omega(x) - omega(y)) / denom;
}

/// ||Omega(f x) - f Omega(x)|| / (||f||_inf ||x||).
inline double centralizer_ratio(const QuasiMap& omega, const SparseVector& f,
                                const SparseVector& x) {
  double sup = 0.0;
  for (const auto& e : f) sup = std::max(sup, std::abs(e.second));
  const double denom = sup * l2_norm(x);
  if (denom == 0.0) return 0.0;
  return l2_norm(omega(hadamard(f, x)) - hadamard(f, omega(x))) / denom;
}

/// Sampled lower estimate of a constant together with the sample achieving it.
struct EstimatorReport {
  std::string map;
  std::string quantity;
  std::uint64_t trials = 0;
  std::size_t dim = 0;
  std::int64_t seed = 0;
  double value = 0.0;
  std::vector<SparseVector> argmax_witness;
};

enum class MultiplierClass { signs, indicator, uniform };

/// Multiplier with sup-norm 1 on indices 1..dim; the class cycles with the
/// trial number.
inline SparseVector sample_multiplier(rng::Engine& eng, std::size_t dim, MultiplierClass cls) {
  std::vector<double> f(dim);
  switch (cls) {
    case MultiplierClass::signs:
      f = rng::random_signs(eng, dim);
      break;
    case MultiplierClass::indicator: {
      std::bernoulli_distribution coin(0.5);
      for (auto& v : f) v = coin(eng) ? 1.0 : 0.0;
      if (std::all_of(f.begin(), f.end(), [](double v) { return v == 0.0; })) {
        std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
        f[pick(eng)] = 1.0;
      }
      break;
    }
    case MultiplierClass::uniform: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double sup = 0.0;
      for (auto& v : f) {
        v = u(eng);
        sup = std::max(sup, std::abs(v));
      }
      if (sup == 0.0) {
        f[0] = 1.0;
      } else {
        for (auto& v : f) v /= sup;
      }
      break;
    }
  }
  return SparseVector::from_dense(f, 1);
}

/// max over sampled Gaussian pairs of quasilinearity_ratio. A lower estimate
/// of the true constant.
inline EstimatorReport quasilinearity_constant(const QuasiMap& omega, std::uint64_t trials,
                                               std::size_t dim, std::int64_t seed,
                                               unsigned workers = 1) {
  if (trials == 0) throw invalid_input("trials must be >= 1");
  if (dim == 0) throw invalid_input("dim must be >= 1");
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_vectors, t);
    SparseVector x = rng::gaussian_vector(eng, dim);
    SparseVector y = rng::gaussian_vector(eng, dim);
    return std::pair{x, y};
  };
  const auto ratios = map_indexed(trials, workers, [&](std::size_t t) {
    const auto [x, y] = sample(t);
    return quasilinearity_ratio(omega, x, y);
  });
  const std::size_t best = argmax_first(ratios);
  const auto [bx, by] = sample(best);
  return {omega.label(), "quasilinearity", trials, dim, seed, ratios[best], {bx, by}};
}

/// max over sampled (f, x) of centralizer_ratio, f drawn from signs,
/// 0/1 indicators and uniform[-1,1] values in equal proportion.
inline EstimatorReport centralizer_defect(const QuasiMap& omega, std::uint64_t trials,
                                          std::size_t dim, std::int64_t seed,
                                          unsigned workers = 1) {
  if (trials == 0) throw invalid_input("trials must be >= 1");
  if (dim == 0) throw invalid_input("dim must be >= 1");
  auto sample = [&](std::size_t t) {
    auto eng = rng::engine_for(seed, rng::stream_multipliers, t);
    SparseVector x = rng::gaussian_vector(eng, dim);
    SparseVector f = sample_multiplier(eng, dim, static_cast<MultiplierClass>(t % 3));
    return std::pair{f, x};
  };
  const auto ratios = map_indexed(trials, workers, [&](std::size_t t) {
    const auto [f, x] = sample(t);
    return centralizer_ratio(omega, f, x);
  });
  const std::size_t best = argmax_first(ratios);
  const auto [bf, bx] = sample(best);
  return {omega.label(), "centralizer", trials, dim, seed, ratios[best], {bf, bx}};
}

}  // namespace twlab
