#include "rootdensity/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rootdensity/errors.hpp"

namespace rootdensity::oracle {

namespace {

struct Eval {
  cd value;
  cd derivative;
  double scale;
};

// Horner for p and p' plus the magnitude sum used for the residual test.
Eval eval_with_derivative(const Polynomial<double>& p, cd z) {
  const auto a = p.coeffs();
  cd v(1), d(0);
  double scale = 1;
  const double az = std::abs(z);
  for (std::size_t k = a.size(); k-- > 0;) {
    d = d * z + v;
    v = v * z + a[k];
    scale = scale * az + std::abs(a[k]);
  }
  return {v, d, scale};
}

}  // namespace

std::vector<cd> aberth_solve(const Polynomial<double>& p, double tol, int max_iter) {
  const std::size_t n = p.degree();
  double radius = 0;
  for (const auto& c : p.coeffs()) radius = std::max(radius, std::abs(c));
  radius += 1;

  std::vector<cd> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2 * std::numbers::pi * static_cast<double>(k) / n + 0.4;
    z[k] = std::polar(radius, angle);
  }
  if (n == 1) return {-p.coeff(0)};

  int polish = 2;
  for (int iter = 0; iter < max_iter; ++iter) {
    bool converged = true;
    for (std::size_t k = 0; k < n; ++k) {
      const Eval e = eval_with_derivative(p, z[k]);
      if (std::abs(e.value) > tol * std::max(1.0, e.scale)) converged = false;
      if (e.value == cd(0)) continue;
      const cd ratio = e.value / e.derivative;
      cd sum(0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      }
      const cd step = ratio / (1.0 - ratio * sum);
      if (std::isfinite(step.real()) && std::isfinite(step.imag())) z[k] -= step;
    }
    if (converged && polish-- == 0) return z;
  }
  throw NoConvergence("Aberth iteration did not converge in " + std::to_string(max_iter) +
                      " sweeps");
}

void dense_qr_step(DenseMatrix& a, Eigen::Index m) {
  const cd s = a(m - 1, m - 1);
  const DenseMatrix identity = DenseMatrix::Identity(m, m);
  DenseMatrix r = a.topLeftCorner(m, m) - s * identity;
  DenseMatrix qh = identity;
  for (Eigen::Index i = 1; i < m; ++i) {
    const cd x = r(i - 1, i - 1);
    const cd y = r(i, i - 1);
    const double norm = std::sqrt(std::norm(x) + std::norm(y));
    DenseMatrix g = identity;
    if (norm != 0) {
      const cd c = std::conj(x) / norm;
      const cd sn = std::conj(y) / norm;
      g(i - 1, i - 1) = c;
      g(i - 1, i) = sn;
      g(i, i - 1) = -std::conj(sn);
      g(i, i) = std::conj(c);
    }
    r = (g * r).eval();
    qh = (g * qh).eval();
  }
  a.topLeftCorner(m, m) = r * qh.adjoint() + s * identity;
}

std::vector<cd> dense_qr_reference(const DenseMatrix& input, int iterations,
                                   std::vector<DenseMatrix>* trajectory) {
  if (input.rows() != input.cols()) throw DimensionMismatch("dense matrix must be square");
  DenseMatrix a = input;
  const Eigen::Index n = a.rows();
  std::vector<cd> eig(static_cast<std::size_t>(n));
  for (Eigen::Index m = n; m >= 2; --m) {
    for (int t = 0; t < iterations; ++t) {
      dense_qr_step(a, m);
      if (trajectory) trajectory->push_back(a.topLeftCorner(m, m));
    }
    eig[static_cast<std::size_t>(m - 1)] = a(m - 1, m - 1);
  }
  if (n >= 1) eig[0] = a(0, 0);
  return eig;
}

DenseMatrix dense_from_row_major(const std::vector<cd>& values, std::size_t order) {
  if (values.size() != order * order) throw DimensionMismatch("dense matrix size mismatch");
  const auto n = static_cast<Eigen::Index>(order);
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = values[static_cast<std::size_t>(i * n + j)];
  }
  return m;
}

namespace {

struct MatchSearch {
  const std::vector<cd>& a;
  const std::vector<cd>& b;
  std::vector<std::size_t> current;
  std::vector<bool> used;
  std::vector<std::size_t> best;
  double best_max = std::numeric_limits<double>::infinity();
  double best_sum = std::numeric_limits<double>::infinity();

  void run(std::size_t k, double cur_max, double cur_sum) {
    if (cur_max > best_max || (cur_max == best_max && cur_sum >= best_sum)) return;
    if (k == a.size()) {
      best_max = cur_max;
      best_sum = cur_sum;
      best = current;
      return;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(a[k] - b[j]);
      used[j] = true;
      current[k] = j;
      run(k + 1, std::max(cur_max, d), cur_sum + d);
      used[j] = false;
    }
  }
};

}  // namespace

RootMatch match_roots(const std::vector<cd>& a, const std::vector<cd>& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("root sets differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  if (a.size() > 10) throw ConfigError("match_roots supports at most 10 roots");
  RootMatch out;
  if (a.empty()) return out;
  MatchSearch search{a, b, std::vector<std::size_t>(a.size()), std::vector<bool>(b.size()), {}};
  search.run(0, 0.0, 0.0);
  out.assignment = std::move(search.best);
  out.max_error = search.best_max;
  out.mean_error = search.best_sum / static_cast<double>(a.size());
  return out;
}

}  // namespace rootdensity::oracle
