#pragma once

// Shared generators for the test and acceptance binaries.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "rootdensity/eigensolver.hpp"
#include "rootdensity/oracle.hpp"

namespace rdtest {

using cd = std::complex<double>;

inline cd uniform_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  for (;;) {
    const cd z(u(rng), u(rng));
    if (std::abs(z) <= radius) return z;
  }
}

/// n roots in |z| <= radius with pairwise distance >= sep (rejection sampled).
inline std::vector<cd> separated_roots(std::mt19937_64& rng, std::size_t n, double radius = 2.0,
                                       double sep = 0.1) {
  std::vector<cd> roots;
  while (roots.size() < n) {
    const cd z = uniform_in_disk(rng, radius);
    const bool ok = std::all_of(roots.begin(), roots.end(),
                                [&](cd r) { return std::abs(r - z) >= sep; });
    if (ok) roots.push_back(z);
  }
  return roots;
}

/// Dense row-major upper Hessenberg matrix with entries uniform in [-1, 1]^2.
inline std::vector<cd> random_hessenberg(std::mt19937_64& rng, std::size_t order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cd> a(order * order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j < order; ++j) {
      if (i <= j + 1) a[i * order + j] = cd(u(rng), u(rng));
    }
  }
  return a;
}

inline rootdensity::oracle::DenseMatrix to_eigen(const rootdensity::CompactHessenberg<double>& a,
                                                 std::size_t size) {
  return rootdensity::oracle::dense_from_row_major(a.to_dense(size), size);
}

inline double max_abs_diff(const rootdensity::oracle::DenseMatrix& a,
                           const rootdensity::oracle::DenseMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace rdtest
