#pragma once

// Reference implementations used to check the compact solver. They share no
// code with the eigensolver.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "rootdensity/polynomial.hpp"

namespace rootdensity::oracle {

using cd = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;

/// Aberth-Ehrlich simultaneous iteration. Initial guesses sit on a
/// perturbed circle of radius 1 + max|a_k|. Throws NoConvergence when the
/// residuals do not reach |p(z)| <= tol * max(1, sum |c_k||z|^k) within
/// max_iter sweeps.
std::vector<cd> aberth_solve(const Polynomial<double>& p, double tol = 1e-14,
                             int max_iter = 500);

/// One explicit shifted QR step on the leading m x m block of a:
/// Q^H and R formed as full matrices, then A <- R Q + sI.
void dense_qr_step(DenseMatrix& a, Eigen::Index m);

/// Full single-shift algorithm on dense storage: T steps per level m = n..2,
/// eig[m-1] taken after each level. Optional trajectory receives a copy of
/// the leading m x m block after every step.
std::vector<cd> dense_qr_reference(const DenseMatrix& a, int iterations,
                                   std::vector<DenseMatrix>* trajectory = nullptr);

DenseMatrix dense_from_row_major(const std::vector<cd>& values, std::size_t order);

struct RootMatch {
  /// a[k] is paired with b[assignment[k]].
  std::vector<std::size_t> assignment;
  double max_error = 0;
  double mean_error = 0;
};

/// Bijection minimizing the largest pairwise distance, found by exhaustive
/// search (n <= 10). Ties are broken by the smaller total distance.
RootMatch match_roots(const std::vector<cd>& a, const std::vector<cd>& b);

}  // namespace rootdensity::oracle
