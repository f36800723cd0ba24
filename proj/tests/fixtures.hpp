#pragma once

#include <cmath>
#include <vector>

#include "twlab/random.hpp"
#include "twlab/seqspace.hpp"

namespace fixture {

/// Dense orthonormal basis of span{e_1..e_n} from Gaussian vectors, Gram-Schmidt
/// applied twice. No sign flip of a coefficient reduces to a coordinate
/// permutation, so sign averages over it have genuine spread.
inline twlab::BlockBasis generic_basis(std::size_t n, std::int64_t seed) {
  std::vector<std::vector<double>> q;
  for (std::size_t k = 0; k < n; ++k) {
    auto eng = twlab::rng::engine_for(seed, twlab::rng::stream_vectors, k);
    std::vector<double> v = twlab::rng::gaussian_values(eng, n);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += u[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= d * u[i];
      }
    }
    double s = 0.0;
    for (double x : v) s += x * x;
    for (double& x : v) x /= std::sqrt(s);
    q.push_back(std::move(v));
  }
  std::vector<twlab::SparseVector> vectors;
  for (const auto& v : q) vectors.push_back(twlab::SparseVector::from_dense(v, 1));
  return twlab::BlockBasis(std::move(vectors), "generic");
}

}  // namespace fixture
