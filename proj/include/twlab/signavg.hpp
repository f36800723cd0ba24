#pragma once

// The sign-average functional
//
//   nabla_[b] Omega = Ave_{eps} || Omega(sum eps_k b_k) - sum eps_k Omega(b_k) ||
//
// computed exactly by enumerating sign patterns or estimated by sampling.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twlab/errors.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"

namespace twlab {

enum class Method { exact, monte_carlo };

inline std::string to_string(Method m) { return m == Method::exact ? "exact" : "monte-carlo"; }

struct SignAverageResult {
  double value = 0.0;
  Method method = Method::exact;
  /// Sign patterns enumerated (exact) or samples drawn (monte-carlo).
  std::uint64_t count = 0;
  double std_error = 0.0;
  std::optional<std::int64_t> seed;
};

/// Nonzero terms allowed on the exact path: 2^19 patterns once the first
/// sign is fixed.
inline constexpr std::size_t max_exact_terms = 20;

/// Default cap on patterns x support size before `nabla_auto` falls back to
/// sampling.
inline constexpr std::uint64_t default_work_budget = std::uint64_t{1} << 28;

namespace detail {

/// The nonzero vectors lambda_k b_k and their images, laid out on the union
/// of their supports so each sign pattern is a dense accumulation.
class SignedSums {
 public:
  SignedSums(const QuasiMap& omega, const BlockBasis& b, std::span<const double> lambda)
      : omega_(omega) {
    if (lambda.size() != b.size()) {
      throw invalid_input("coefficient list length " + std::to_string(lambda.size()) +
                          " does not match basis size " + std::to_string(b.size()));
    }
    std::vector<SparseVector> terms;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (lambda[k] != 0.0) terms.push_back(lambda[k] * b[k]);
    }
    for (const auto& t : terms) images_.push_back(omega(t));
    layout(terms, input_index_, input_slots_, input_values_);
    layout(images_, image_index_, image_slots_, image_values_);
  }

  std::size_t terms() const noexcept { return input_slots_.size(); }
  std::size_t support_size() const noexcept { return input_index_.size(); }

  /// Bit k of `pattern` (k-th bit across the words) set means eps_k = -1.
  double norm_for(std::span<const std::uint64_t> pattern) const {
    const SparseVector s = accumulate(pattern, input_index_, input_slots_, input_values_);
    const SparseVector linear = accumulate(pattern, image_index_, image_slots_, image_values_);
    return l2_norm(omega_(s) - linear);
  }

  double norm_for(std::uint64_t pattern) const {
    return norm_for(std::span<const std::uint64_t>(&pattern, 1));
  }

 private:
  static void layout(const std::vector<SparseVector>& vecs, std::vector<Index>& index,
                     std::vector<std::vector<std::size_t>>& slots,
                     std::vector<std::vector<double>>& values) {
    for (const auto& v : vecs) {
      const auto s = v.support();
      index.insert(index.end(), s.begin(), s.end());
    }
    std::sort(index.begin(), index.end());
    index.erase(std::unique(index.begin(), index.end()), index.end());
    slots.resize(vecs.size());
    values.resize(vecs.size());
    for (std::size_t k = 0; k < vecs.size(); ++k) {
      for (const auto& [i, v] : vecs[k]) {
        slots[k].push_back(static_cast<std::size_t>(
            std::lower_bound(index.begin(), index.end(), i) - index.begin()));
        values[k].push_back(v);
      }
    }
  }

  static SparseVector accumulate(std::span<const std::uint64_t> pattern,
                                 const std::vector<Index>& index,
                                 const std::vector<std::vector<std::size_t>>& slots,
                                 const std::vector<std::vector<double>>& values) {
    std::vector<double> buf(index.size(), 0.0);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const bool negative = k / 64 < pattern.size() && ((pattern[k / 64] >> (k % 64)) & 1U);
      const auto& sl = slots[k];
      const auto& va = values[k];
      for (std::size_t j = 0; j < sl.size(); ++j) buf[sl[j]] += negative ? -va[j] : va[j];
    }
    std::vector<SparseVector::Entry> out;
    out.reserve(index.size());
    for (std::size_t j = 0; j < index.size(); ++j) {
      if (buf[j] != 0.0) out.emplace_back(index[j], buf[j]);
    }
    return SparseVector::from_sorted(std::move(out));
  }

  QuasiMap omega_;
  std::vector<SparseVector> images_;
  std::vector<Index> input_index_, image_index_;
  std::vector<std::vector<std::size_t>> input_slots_, image_slots_;
  std::vector<std::vector<double>> input_values_, image_values_;
};

/// Running mean and sum of squared deviations in index order. Equal inputs
/// give their common value back exactly, with zero spread.
struct Moments {
  double mean = 0.0;
  double m2 = 0.0;
};

inline Moments welford(const std::vector<double>& v) {
  Moments m;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double delta = v[k] - m.mean;
    m.mean += delta / static_cast<double>(k + 1);
    m.m2 += delta * (v[k] - m.mean);
  }
  return m;
}

}  // namespace detail

/// Exact average over all sign patterns of the nonzero terms lambda_k b_k.
///
/// A global sign flip leaves every term's norm unchanged, so by default only
/// the 2^{n-1} patterns with eps_1 = +1 are visited; `full_enumeration`
/// visits all 2^n.
inline SignAverageResult nabla_exact(const QuasiMap& omega, const BlockBasis& b,
                                     std::span<const double> lambda,
                                     bool full_enumeration = false, unsigned workers = 1) {
  const detail::SignedSums sums(omega, b, lambda);
  const std::size_t n = sums.terms();
  if (n > max_exact_terms) {
    throw budget_exceeded("exact sign enumeration over " + std::to_string(n) +
                          " nonzero terms exceeds the budget of " +
                          std::to_string(max_exact_terms) + "; use monte-carlo mode (--mode mc)");
  }
  if (n == 0) return {0.0, Method::exact, 1, 0.0, std::nullopt};
  const std::uint64_t patterns = std::uint64_t{1} << (full_enumeration ? n : n - 1);
  // Reduced enumeration keeps eps_1 = +1: shift the pattern past bit 0.
  const unsigned shift = full_enumeration ? 0U : 1U;
  const auto norms = map_indexed(patterns, workers, [&](std::size_t p) {
    return sums.norm_for(static_cast<std::uint64_t>(p) << shift);
  });
  return {detail::welford(norms).mean, Method::exact, patterns, 0.0, std::nullopt};
}

inline SignAverageResult nabla_exact(const QuasiMap& omega, const BlockBasis& b) {
  const std::vector<double> ones(b.size(), 1.0);
  return nabla_exact(omega, b, ones);
}

/// Sample mean over uniformly random sign patterns, std_error = s / sqrt(N).
inline SignAverageResult nabla_mc(const QuasiMap& omega, const BlockBasis& b,
                                  std::span<const double> lambda, std::uint64_t samples,
                                  std::int64_t seed, unsigned workers = 1) {
  if (samples < 2) throw invalid_input("monte-carlo estimation needs at least 2 samples");
  const detail::SignedSums sums(omega, b, lambda);
  const std::size_t n = sums.terms();
  if (n == 0) return {0.0, Method::monte_carlo, samples, 0.0, seed};
  const auto norms = map_indexed(samples, workers, [&](std::size_t s) {
    auto eng = rng::engine_for(seed, rng::stream_signs, s);
    std::vector<std::uint64_t> words((n + 63) / 64);
    for (auto& w : words) w = eng();
    return sums.norm_for(words);
  });
  const detail::Moments m = detail::welford(norms);
  const double sd = std::sqrt(std::max(0.0, m.m2) / static_cast<double>(samples - 1));
  return {m.mean, Method::monte_carlo, samples, sd / std::sqrt(static_cast<double>(samples)), seed};
}

/// Exact when the pattern count and the pattern-times-support work fit the
/// budgets, sampled otherwise.
inline SignAverageResult nabla_auto(const QuasiMap& omega, const BlockBasis& b,
                                    std::span<const double> lambda, std::uint64_t samples,
                                    std::int64_t seed,
                                    std::uint64_t work_budget = default_work_budget,
                                    unsigned workers = 1) {
  std::size_t nonzero = 0;
  std::size_t support = 0;
  for (std::size_t k = 0; k < b.size() && k < lambda.size(); ++k) {
    if (lambda[k] != 0.0) {
      ++nonzero;
      support += b[k].size();
    }
  }
  if (nonzero <= max_exact_terms) {
    const std::uint64_t patterns = nonzero == 0 ? 1 : (std::uint64_t{1} << (nonzero - 1));
    if (patterns * std::max<std::size_t>(support, 1) <= work_budget) {
      return nabla_exact(omega, b, lambda, false, workers);
    }
  }
  return nabla_mc(omega, b, lambda, samples, seed, workers);
}

enum class Family { canonical, walsh };
enum class ScanMode { exact, monte_carlo, automatic };

inline BlockBasis family_basis(Family f, std::size_t n) {
  return f == Family::canonical ? canonical_basis(n) : walsh_block(n);
}

struct ScanOptions {
  Family family = Family::canonical;
  std::size_t first = 1;
  std::size_t last = 8;
  ScanMode mode = ScanMode::automatic;
  std::uint64_t samples = 5000;
  std::int64_t seed = 0;
  bool even_only = false;
  std::uint64_t work_budget = default_work_budget;
  unsigned workers = 1;
};

struct ScanRow {
  std::size_t n = 0;
  SignAverageResult result;
  double per_sqrt_n = 0.0;
  /// NaN at n = 1, where ln n = 0.
  double per_sqrt_n_log_n = 0.0;
};

/// One row per n with all-ones coefficients.
inline std::vector<ScanRow> nabla_scan(const QuasiMap& omega, const ScanOptions& opt) {
  if (opt.first == 0 || opt.first > opt.last) throw invalid_input("scan range must satisfy 1 <= from <= to");
  std::vector<ScanRow> rows;
  for (std::size_t n = opt.first; n <= opt.last; ++n) {
    if (opt.even_only && n % 2 != 0) continue;
    const BlockBasis b = family_basis(opt.family, n);
    const std::vector<double> ones(n, 1.0);
    SignAverageResult r;
    switch (opt.mode) {
      case ScanMode::exact:
        r = nabla_exact(omega, b, ones, false, opt.workers);
        break;
      case ScanMode::monte_carlo:
        r = nabla_mc(omega, b, ones, opt.samples, opt.seed, opt.workers);
        break;
      case ScanMode::automatic:
        r = nabla_auto(omega, b, ones, opt.samples, opt.seed, opt.work_budget, opt.workers);
        break;
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double ln = std::log(static_cast<double>(n));
    rows.push_back({n, r, r.value / sn, n == 1 ? std::nan("") : r.value / (sn * ln)});
  }
  return rows;
}

}  // namespace twlab
