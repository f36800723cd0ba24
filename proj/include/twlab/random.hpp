#pragma once

// Counter-based seeding and index-ordered parallel evaluation.
//
// Every random trial draws from its own engine, keyed by (seed, stream,
// counter). Results are written to a slot per trial and reduced in index
// order, so output never depends on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "twlab/seqspace.hpp"

namespace twlab::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t key(std::int64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(mix64(static_cast<std::uint64_t>(seed)) ^ stream) ^ counter);
}

/// Streams separate independent uses of one seed inside a computation.
enum Stream : std::uint64_t {
  stream_vectors = 1,
  stream_multipliers = 2,
  stream_signs = 3,
  stream_restarts = 4,
  stream_lambda = 5,
  stream_dims = 6,
};

inline Engine engine_for(std::int64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t k = key(seed, stream, counter);
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(counter)};
  return Engine(seq);
}

inline std::vector<double> gaussian_values(Engine& eng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(eng);
  return out;
}

/// Gaussian coefficients on indices first .. first + dim - 1.
inline SparseVector gaussian_vector(Engine& eng, std::size_t dim, Index first = 1) {
  const auto values = gaussian_values(eng, dim);
  return SparseVector::from_dense(values, first);
}

inline std::vector<double> random_signs(Engine& eng, std::size_t n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> out(n);
  for (auto& v : out) v = coin(eng) ? -1.0 : 1.0;
  return out;
}

inline SignedPermutation random_signed_permutation(Engine& eng, std::size_t n) {
  std::vector<Index> src(n);
  std::iota(src.begin(), src.end(), Index{1});
  std::shuffle(src.begin(), src.end(), eng);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> sg(n);
  for (auto& s : sg) s = coin(eng) ? -1 : 1;
  return SignedPermutation(std::move(src), std::move(sg));
}

}  // namespace twlab::rng

namespace twlab {

/// Evaluates f(i) for i in [0, count) on up to `workers` threads and returns
/// the results in index order.
template <class F>
auto map_indexed(std::size_t count, unsigned workers, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(count);
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = f(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Position of the first maximum; ties resolve to the lowest index.
inline std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace twlab
