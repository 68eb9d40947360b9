#pragma once

// Single-shift QR iteration on companion matrices.
//
// The working matrix is kept in compact upper-Hessenberg storage and each
// iteration is performed in place: a left sweep of Givens rotations reduces
// A - sI to upper triangular R, and a right sweep applies the retained
// rotations' adjoints to form RQ before the shift is added back. Each left
// rotation touches two rows, each right rotation two columns.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rootdensity/errors.hpp"
#include "rootdensity/parallel.hpp"
#include "rootdensity/polynomial.hpp"

namespace rootdensity {

enum class Precision { kFp32, kFp64 };

/// Counts real floating-point operations performed by the solver.
/// Complex multiply = 6, complex add = 2, division and sqrt count as 1.
struct FlopCounter {
  std::uint64_t flops = 0;
  void add(std::uint64_t n) noexcept { flops += n; }
};

struct SolveConfig {
  /// QR iterations run at every deflation level.
  int iterations = 10;
  Precision precision = Precision::kFp64;
  /// Leave a level as soon as its trailing subdiagonal is negligible.
  bool early_deflate = false;
  double deflate_tol = 1e-14;

  void validate() const {
    if (iterations < 1) throw ConfigError("iterations per level must be >= 1");
    if (early_deflate && !(deflate_tol >= 0)) throw ConfigError("deflate_tol must be >= 0");
  }
};

template <typename T>
struct GivensPair {
  Complex<T> c{1};
  Complex<T> s{0};

  static GivensPair identity() { return {}; }
  friend bool operator==(const GivensPair&, const GivensPair&) = default;
};

template <typename T>
struct GivensResult {
  GivensPair<T> pair;
  T r{0};
};

/// Rotation [[c, s], [-conj(s), conj(c)]] mapping (a, b) to (r, 0), with
/// c = conj(a)/r, s = conj(b)/r and r = sqrt(|a|^2 + |b|^2). The norm is
/// formed after scaling by the largest component magnitude so that FP32
/// inputs near 1e19 do not overflow. a = b = 0 yields the identity pair.
template <typename T>
GivensResult<T> givens_coeffs(Complex<T> a, Complex<T> b) {
  const T scale = std::max({std::abs(a.real()), std::abs(a.imag()),
                            std::abs(b.real()), std::abs(b.imag())});
  if (scale == T(0)) return {GivensPair<T>::identity(), T(0)};
  const Complex<T> as = a / scale;
  const Complex<T> bs = b / scale;
  const T norm = std::sqrt(std::norm(as) + std::norm(bs));
  return {{std::conj(as) / norm, std::conj(bs) / norm}, norm * scale};
}

/// Upper-Hessenberg matrix storing only row i, columns max(i-1, 0)..n-1.
/// Entries below the first subdiagonal do not exist.
template <typename T>
class CompactHessenberg {
 public:
  CompactHessenberg() = default;

  explicit CompactHessenberg(std::size_t order) { reset(order); }

  static CompactHessenberg from_companion(const CompanionMatrix<T>& c) {
    CompactHessenberg h(c.order);
    h.load_companion(c.first_row);
    return h;
  }

  /// Builds from a row-major dense matrix; throws if any entry below the
  /// first subdiagonal is nonzero.
  static CompactHessenberg from_dense(std::span<const Complex<T>> dense, std::size_t order) {
    if (dense.size() != order * order) throw DimensionMismatch("dense matrix size mismatch");
    CompactHessenberg h(order);
    for (std::size_t i = 0; i < order; ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        const auto v = dense[i * order + j];
        if (j + 1 < i) {
          if (v != Complex<T>(0)) throw ConfigError("matrix is not upper Hessenberg");
        } else {
          h.at(i, j) = v;
        }
      }
    }
    return h;
  }

  void reset(std::size_t order) {
    if (order < 1) throw ConfigError("Hessenberg order must be >= 1");
    order_ = order;
    active_ = order;
    row_offset_.resize(order);
    std::size_t off = 0;
    for (std::size_t i = 0; i < order; ++i) {
      row_offset_[i] = off;
      off += order - first_col(i);
    }
    data_.assign(off, Complex<T>(0));
  }

  /// Reinitializes in place from a companion first row (no reallocation
  /// when the order is unchanged).
  void load_companion(std::span<const Complex<T>> first_row) {
    if (first_row.size() != order_) reset(first_row.size());
    std::fill(data_.begin(), data_.end(), Complex<T>(0));
    active_ = order_;
    for (std::size_t j = 0; j < order_; ++j) at(0, j) = first_row[j];
    for (std::size_t i = 1; i < order_; ++i) at(i, i - 1) = Complex<T>(1);
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t active_size() const noexcept { return active_; }
  void set_active_size(std::size_t m) {
    if (m < 1 || m > order_) throw ConfigError("active size out of range");
    active_ = m;
  }

  static constexpr std::size_t first_col(std::size_t row) noexcept {
    return row == 0 ? 0 : row - 1;
  }
  static constexpr bool stored(std::size_t row, std::size_t col) noexcept {
    return col + 1 >= row;
  }

  Complex<T>& at(std::size_t i, std::size_t j) {
    return data_[row_offset_[i] + (j - first_col(i))];
  }
  const Complex<T>& at(std::size_t i, std::size_t j) const {
    return data_[row_offset_[i] + (j - first_col(i))];
  }
  /// Like at() but yields zero for structurally absent entries.
  Complex<T> get(std::size_t i, std::size_t j) const {
    return stored(i, j) ? at(i, j) : Complex<T>(0);
  }

  /// Row-major dense expansion of the full order x order storage.
  std::vector<Complex<T>> to_dense() const { return to_dense(order_); }

  /// Row-major dense expansion of the leading size x size block.
  std::vector<Complex<T>> to_dense(std::size_t size) const {
    std::vector<Complex<T>> out(size * size);
    for (std::size_t i = 0; i < size; ++i) {
      for (std::size_t j = first_col(i); j < size; ++j) out[i * size + j] = at(i, j);
    }
    return out;
  }

  friend bool operator==(const CompactHessenberg&, const CompactHessenberg&) = default;

 private:
  std::size_t order_ = 0;
  std::size_t active_ = 0;
  std::vector<std::size_t> row_offset_;
  std::vector<Complex<T>> data_;
};

enum class ShiftSign { kSubtract, kAdd };

/// Adds or subtracts s on diagonal entries 0..active_size-1.
template <typename T>
void shift_diag(CompactHessenberg<T>& a, Complex<T> s, ShiftSign sign,
                FlopCounter* flops = nullptr) {
  const std::size_t m = a.active_size();
  if (sign == ShiftSign::kSubtract) {
    for (std::size_t k = 0; k < m; ++k) a.at(k, k) -= s;
  } else {
    for (std::size_t k = 0; k < m; ++k) a.at(k, k) += s;
  }
  if (flops) flops->add(2 * m);
}

/// Left-multiplies rows i-1 and i by the 2x2 block of Q_i, restricted to
/// columns [col_begin, col_end). The (i, i-1) entry is written as exact zero
/// when column i-1 is in range.
template <typename T>
void apply_left_columns(CompactHessenberg<T>& a, std::size_t i, const GivensPair<T>& g,
                        std::size_t col_begin, std::size_t col_end,
                        FlopCounter* flops = nullptr) {
  const Complex<T> c = g.c, s = g.s;
  const Complex<T> cc = std::conj(c), sc = std::conj(s);
  for (std::size_t j = col_begin; j < col_end; ++j) {
    const Complex<T> x = a.at(i - 1, j);
    const Complex<T> y = a.at(i, j);
    a.at(i - 1, j) = c * x + s * y;
    a.at(i, j) = cc * y - sc * x;
  }
  if (col_begin <= i - 1 && i - 1 < col_end) a.at(i, i - 1) = Complex<T>(0);
  if (flops) flops->add(28 * (col_end - col_begin));
}

/// A <- Q_i A on the active block. Requires 1 <= i <= active_size-1.
template <typename T>
void apply_left(CompactHessenberg<T>& a, std::size_t i, const GivensPair<T>& g,
                FlopCounter* flops = nullptr) {
  apply_left_columns(a, i, g, i - 1, a.active_size(), flops);
}

/// Right-multiplies columns i-1 and i by the 2x2 block of Q_i^H, restricted
/// to rows [row_begin, row_end).
template <typename T>
void apply_right_rows(CompactHessenberg<T>& a, std::size_t i, const GivensPair<T>& g,
                      std::size_t row_begin, std::size_t row_end,
                      FlopCounter* flops = nullptr) {
  const Complex<T> c = g.c, s = g.s;
  const Complex<T> cc = std::conj(c), sc = std::conj(s);
  for (std::size_t k = row_begin; k < row_end; ++k) {
    const Complex<T> x = a.at(k, i - 1);
    const Complex<T> y = a.at(k, i);
    a.at(k, i - 1) = x * cc + y * sc;
    a.at(k, i) = y * c - x * s;
  }
  if (flops) flops->add(28 * (row_end - row_begin));
}

/// A <- A Q_i^H. With the left sweep complete, rows 0..i are the only ones
/// holding nonzeros in columns i-1 and i; row i+1 has nothing stored at
/// column i-1 and a zero at column i, so it is left alone.
template <typename T>
void apply_right(CompactHessenberg<T>& a, std::size_t i, const GivensPair<T>& g,
                 FlopCounter* flops = nullptr) {
  apply_right_rows(a, i, g, 0, i + 1, flops);
}

/// Computes rotations for i = 1..m-1 and applies each to the left, turning
/// the active block into upper triangular form. Pairs are stored in
/// retained[0..m-2].
template <typename T>
void left_sweep(CompactHessenberg<T>& a, std::vector<GivensPair<T>>& retained,
                FlopCounter* flops = nullptr) {
  const std::size_t m = a.active_size();
  retained.resize(m - 1);
  for (std::size_t i = 1; i < m; ++i) {
    const auto g = givens_coeffs(a.at(i - 1, i - 1), a.at(i, i - 1));
    if (flops) flops->add(17);
    retained[i - 1] = g.pair;
    apply_left(a, i, g.pair, flops);
  }
}

template <typename T>
void right_sweep(CompactHessenberg<T>& a, const std::vector<GivensPair<T>>& retained,
                 FlopCounter* flops = nullptr) {
  const std::size_t m = a.active_size();
  for (std::size_t i = 1; i < m; ++i) apply_right(a, i, retained[i - 1], flops);
}

/// One shifted QR step on the active block with s = A[m-1][m-1]:
/// A <- (Q_{m-1}...Q_1)(A - sI)(Q_1^H...Q_{m-1}^H) + sI.
template <typename T>
void qr_iteration(CompactHessenberg<T>& a, std::vector<GivensPair<T>>& retained,
                  FlopCounter* flops = nullptr) {
  const std::size_t m = a.active_size();
  if (m < 2) throw ConfigError("qr_iteration requires an active block of size >= 2");
  const Complex<T> s = a.at(m - 1, m - 1);
  shift_diag(a, s, ShiftSign::kSubtract, flops);
  left_sweep(a, retained, flops);
  right_sweep(a, retained, flops);
  shift_diag(a, s, ShiftSign::kAdd, flops);
  retained.clear();
}

template <typename T>
void qr_iteration(CompactHessenberg<T>& a, FlopCounter* flops = nullptr) {
  std::vector<GivensPair<T>> retained;
  qr_iteration(a, retained, flops);
}

template <typename T>
struct RootSet {
  std::vector<Complex<T>> roots;
};

/// Reusable solver workspace; one instance per thread.
template <typename T>
class QrSolver {
 public:
  explicit QrSolver(SolveConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const SolveConfig& config() const noexcept { return cfg_; }

  /// Writes the n eigenvalues of the companion of p into out (length n).
  void solve(const Polynomial<T>& p, std::span<Complex<T>> out, FlopCounter* flops = nullptr) {
    const std::size_t n = p.degree();
    if (out.size() != n) throw DimensionMismatch("root output span has wrong length");
    if (first_row_.size() != n) first_row_.resize(n);
    const auto a = p.coeffs();
    for (std::size_t j = 0; j < n; ++j) first_row_[j] = -a[n - 1 - j];
    work_.load_companion(first_row_);
    retained_.reserve(n);

    for (std::size_t m = n; m >= 2; --m) {
      for (int t = 0; t < cfg_.iterations; ++t) {
        qr_iteration(work_, retained_, flops);
        if (cfg_.early_deflate && negligible_subdiagonal(m)) break;
      }
      out[m - 1] = work_.at(m - 1, m - 1);
      work_.set_active_size(m - 1);
    }
    out[0] = work_.at(0, 0);
  }

  RootSet<T> solve(const Polynomial<T>& p, FlopCounter* flops = nullptr) {
    RootSet<T> r;
    r.roots.resize(p.degree());
    solve(p, r.roots, flops);
    return r;
  }

 private:
  bool negligible_subdiagonal(std::size_t m) const {
    const T sub = std::abs(work_.at(m - 1, m - 2));
    const T diag = std::abs(work_.at(m - 2, m - 2)) + std::abs(work_.at(m - 1, m - 1));
    return sub <= static_cast<T>(cfg_.deflate_tol) * diag;
  }

  SolveConfig cfg_;
  CompactHessenberg<T> work_;
  std::vector<GivensPair<T>> retained_;
  std::vector<Complex<T>> first_row_;
};

template <typename T>
RootSet<T> solve_roots(const Polynomial<T>& p, const SolveConfig& cfg = {},
                       FlopCounter* flops = nullptr) {
  QrSolver<T> solver(cfg);
  return solver.solve(p, flops);
}

/// Normalizes raw coefficients {c_0..c_n} and solves; propagates
/// DegenerateLeadingCoefficient.
template <typename T>
RootSet<T> solve_roots_raw(std::span<const Complex<T>> coeffs, const SolveConfig& cfg = {}) {
  return solve_roots(make_monic<T>(coeffs), cfg);
}

template <typename T>
void require_uniform_degree(std::span<const Polynomial<T>> polys) {
  if (polys.empty()) return;
  const std::size_t n = polys.front().degree();
  for (std::size_t k = 1; k < polys.size(); ++k) {
    if (polys[k].degree() != n) {
      throw MixedDegreeBatch("batch mixes degree " + std::to_string(n) + " and degree " +
                             std::to_string(polys[k].degree()) + " (record " +
                             std::to_string(k) + ")");
    }
  }
}

/// Solves every polynomial; out receives degree roots per polynomial in
/// input order. Results do not depend on worker_count.
template <typename T>
void batch_solve_into(std::span<const Polynomial<T>> polys, const SolveConfig& cfg,
                      unsigned worker_count, std::span<Complex<T>> out) {
  require_uniform_degree(polys);
  cfg.validate();
  if (polys.empty()) return;
  const std::size_t n = polys.front().degree();
  if (out.size() != n * polys.size()) throw DimensionMismatch("root output buffer size");
  parallel_chunks(polys.size(), worker_count,
                  [&](std::size_t begin, std::size_t end, unsigned) {
                    QrSolver<T> solver(cfg);
                    for (std::size_t k = begin; k < end; ++k) {
                      solver.solve(polys[k], out.subspan(k * n, n));
                    }
                  });
}

template <typename T>
std::vector<RootSet<T>> batch_solve(std::span<const Polynomial<T>> polys, const SolveConfig& cfg,
                                    unsigned worker_count = 1) {
  require_uniform_degree(polys);
  std::vector<Complex<T>> flat(polys.empty() ? 0 : polys.size() * polys.front().degree());
  batch_solve_into<T>(polys, cfg, worker_count, flat);
  std::vector<RootSet<T>> out(polys.size());
  if (polys.empty()) return out;
  const std::size_t n = polys.front().degree();
  for (std::size_t k = 0; k < polys.size(); ++k) {
    out[k].roots.assign(flat.begin() + k * n, flat.begin() + (k + 1) * n);
  }
  return out;
}

template <typename T>
std::vector<RootSet<T>> batch_solve(const std::vector<Polynomial<T>>& polys,
                                    const SolveConfig& cfg, unsigned worker_count = 1) {
  return batch_solve<T>(std::span<const Polynomial<T>>(polys), cfg, worker_count);
}

}  // namespace rootdensity
