#pragma once

// Monic complex polynomials and their Frobenius companion matrices.
//
// Coefficients are stored low-degree-first: for
//   P(z) = z^n + a_{n-1} z^{n-1} + ... + a_1 z + a_0
// coeffs() holds {a_0, a_1, ..., a_{n-1}} and the unit leading coefficient
// is implicit.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rootdensity/errors.hpp"

namespace rootdensity {

template <typename T>
using Complex = std::complex<T>;

/// Leading-coefficient magnitude at or below which normalization is refused.
template <typename T>
constexpr T monic_epsilon();
template <>
constexpr double monic_epsilon<double>() { return 1e-12; }
template <>
constexpr float monic_epsilon<float>() { return 1e-6f; }

template <typename T>
bool is_finite(Complex<T> z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

template <typename T>
class Polynomial {
 public:
  /// Takes the n low-order coefficients of a monic polynomial of degree n.
  explicit Polynomial(std::vector<Complex<T>> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
      throw ConfigError("polynomial degree must be at least 1");
    }
    for (const auto& c : coeffs_) {
      if (!is_finite(c)) throw FormatError("non-finite polynomial coefficient");
    }
  }

  std::size_t degree() const noexcept { return coeffs_.size(); }
  std::span<const Complex<T>> coeffs() const noexcept { return coeffs_; }
  Complex<T> coeff(std::size_t k) const { return coeffs_.at(k); }

  template <typename U>
  Polynomial<U> cast() const {
    std::vector<Complex<U>> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) {
      out.emplace_back(static_cast<U>(c.real()), static_cast<U>(c.imag()));
    }
    return Polynomial<U>(std::move(out));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<Complex<T>> coeffs_;
};

/// Dense-on-demand view of the Frobenius companion matrix.
template <typename T>
struct CompanionMatrix {
  std::size_t order = 0;
  /// {-a_{n-1}, -a_{n-2}, ..., -a_0}; ones on the subdiagonal are implicit.
  std::vector<Complex<T>> first_row;

  /// Row-major order*order expansion.
  std::vector<Complex<T>> dense() const {
    std::vector<Complex<T>> m(order * order);
    for (std::size_t j = 0; j < order; ++j) m[j] = first_row[j];
    for (std::size_t i = 1; i < order; ++i) m[i * order + (i - 1)] = Complex<T>(1);
    return m;
  }
};

/// Normalizes a full coefficient array {c_0, ..., c_n} (low-degree-first,
/// length n+1) by its leading coefficient.
template <typename T>
Polynomial<T> make_monic(std::span<const Complex<T>> coeffs) {
  if (coeffs.size() < 2) {
    throw ConfigError("make_monic needs at least two coefficients");
  }
  const Complex<T> lead = coeffs.back();
  if (!(std::abs(lead) > monic_epsilon<T>())) {
    throw DegenerateLeadingCoefficient("leading coefficient magnitude " +
                                       std::to_string(std::abs(lead)) +
                                       " is at or below the monic threshold");
  }
  std::vector<Complex<T>> out(coeffs.begin(), coeffs.end() - 1);
  if (lead != Complex<T>(1)) {
    for (auto& c : out) c /= lead;
  }
  return Polynomial<T>(std::move(out));
}

template <typename T>
Polynomial<T> make_monic(const std::vector<Complex<T>>& coeffs) {
  return make_monic<T>(std::span<const Complex<T>>(coeffs));
}

template <typename T>
CompanionMatrix<T> companion(const Polynomial<T>& p) {
  const std::size_t n = p.degree();
  CompanionMatrix<T> c;
  c.order = n;
  c.first_row.resize(n);
  for (std::size_t j = 0; j < n; ++j) c.first_row[j] = -p.coeff(n - 1 - j);
  return c;
}

/// Horner evaluation of the monic polynomial.
template <typename T>
Complex<T> evaluate(const Polynomial<T>& p, Complex<T> z) {
  const auto a = p.coeffs();
  Complex<T> acc(1);
  for (std::size_t k = a.size(); k-- > 0;) acc = acc * z + a[k];
  return acc;
}

/// Monic polynomial with the given roots, built as prod (z - r_k).
template <typename T>
Polynomial<T> from_roots(std::span<const Complex<T>> roots) {
  if (roots.empty()) throw ConfigError("from_roots needs at least one root");
  // full[k] is the coefficient of z^k; start from the constant 1.
  std::vector<Complex<T>> full{Complex<T>(1)};
  for (const auto& r : roots) {
    std::vector<Complex<T>> next(full.size() + 1);
    for (std::size_t k = 0; k < full.size(); ++k) {
      next[k + 1] += full[k];
      next[k] -= r * full[k];
    }
    full = std::move(next);
  }
  full.pop_back();
  return Polynomial<T>(std::move(full));
}

template <typename T>
Polynomial<T> from_roots(const std::vector<Complex<T>>& roots) {
  return from_roots<T>(std::span<const Complex<T>>(roots));
}

}  // namespace rootdensity
