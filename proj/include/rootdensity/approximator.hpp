#pragma once

// Polynomial batch generation.
//
// Two sources feed the solver: parametric families, whose coefficients are
// expressions in parameters t1..tk sampled on a grid over [0, 1]^k, and local
// least-squares fits of a complex function over the cells of a partitioned
// rectangle.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rootdensity/polynomial.hpp"

namespace rootdensity::approx {

using cd = std::complex<double>;

/// Parsed arithmetic expression over complex numbers.
///
/// Grammar (ASCII):
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number ['i'] | 'i' | 'pi' | 'z' | 't' | 't'digits
///            | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
/// 't' is shorthand for t1. Parameters are 1-based.
class Expression {
 public:
  static Expression parse(std::string_view text);
  static Expression constant(cd value);

  cd eval(std::span<const double> params, cd z = {}) const;

  /// Highest parameter index referenced (0 when none).
  unsigned max_parameter() const noexcept { return max_param_; }
  bool uses_z() const noexcept { return uses_z_; }
  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  unsigned max_param_ = 0;
  bool uses_z_ = false;
};

struct ParametricFamily {
  unsigned degree = 0;
  /// Low-degree-first coefficient expressions a_0..a_{n-1}; monic implied.
  std::vector<Expression> coeffs;
  /// Samples per parameter axis; axis k drives parameter t_{k+1}.
  std::vector<std::uint32_t> axis_counts;

  void validate() const;
  std::uint64_t sample_count() const noexcept;
  /// Parameter vector of sample s; the first axis varies fastest.
  void parameters(std::uint64_t s, std::vector<double>& out) const;
  /// Writes the n coefficients of sample s; false if any is non-finite.
  bool coefficients(std::uint64_t s, std::vector<double>& params_scratch,
                    std::span<cd> out) const;
};

/// Parses a family definition:
///   degree = 5
///   axes = 100 100        # samples per parameter axis (may be empty)
///   a0 = exp(2*pi*i*t1)   # one line per coefficient; missing ones are 0
ParametricFamily parse_family(std::string_view text);
ParametricFamily load_family(const std::string& path);

struct Enumeration {
  std::vector<Polynomial<double>> polys;
  /// Samples skipped because a coefficient evaluated to NaN or Inf.
  std::uint64_t skipped = 0;
};

Enumeration enumerate_family(const ParametricFamily& f);
/// Samples [begin, end) in order.
Enumeration enumerate_range(const ParametricFamily& f, std::uint64_t begin, std::uint64_t end);

struct Rect {
  double x_min = -1, x_max = 1, y_min = -1, y_max = 1;
  void validate() const;
  cd center() const { return {(x_min + x_max) / 2, (y_min + y_max) / 2}; }
};

struct DomainPartition {
  Rect bounds;
  unsigned cells_x = 1;
  unsigned cells_y = 1;

  void validate() const;
  /// Cell (i, j): column i from x_min, row j from y_min.
  Rect cell(unsigned i, unsigned j) const;
};

using ComplexFunction = std::function<cd(cd)>;

struct FitResult {
  Polynomial<double> poly;
  /// Leading coefficient removed by normalization: g = leading * poly.
  cd leading;
  /// max |f - g| on the validation grid.
  double error_bound = 0;
  unsigned cell_i = 0;
  unsigned cell_j = 0;
};

/// Least-squares degree-n fit in the monomial basis ((z - c)/h)^k, with c the
/// cell midpoint and h the larger half-extent, over a (q(n+1))^2 tensor grid
/// of cell-centred nodes. The validation grid is 8x denser per axis and
/// disjoint from the fit nodes. Throws DegenerateFit when the degree-n term
/// vanishes.
FitResult fit_cell(const ComplexFunction& f, const Rect& cell, unsigned degree,
                   unsigned oversample = 2, unsigned cell_i = 0, unsigned cell_j = 0);

/// Strict: error_bound < eps.
bool accept_cell(const FitResult& r, double eps);

struct DomainFit {
  std::vector<FitResult> accepted;
  std::uint64_t rejected = 0;
  std::uint64_t degenerate = 0;
};

/// Fits every cell in row-major order (i fastest) and keeps accepted ones.
DomainFit approximate_domain(const ComplexFunction& f, const DomainPartition& d,
                             unsigned degree, unsigned oversample, double eps,
                             unsigned workers = 1);

/// Named built-ins ("sin", "cos", "exp", "cubic", ...) or any expression in z.
ComplexFunction make_function(const std::string& text);
std::vector<std::string> builtin_function_names();

}  // namespace rootdensity::approx
