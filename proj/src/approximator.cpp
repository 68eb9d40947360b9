#include "rootdensity/approximator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "rootdensity/errors.hpp"
#include "rootdensity/parallel.hpp"

namespace rootdensity::approx {

struct Expression::Node {
  enum class Kind { kConst, kParam, kZ, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kExp };
  Kind kind = Kind::kConst;
  cd value{};
  unsigned param = 0;  // 0-based
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_leaf(cd v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

NodePtr make_op(Node::Kind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

cd int_pow(cd base, long long e) {
  if (e < 0) return cd(1) / int_pow(base, -e);
  cd r(1);
  while (e) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

cd eval_node(const Node& n, std::span<const double> params, cd z) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::kConst: return n.value;
    case K::kParam: return n.param < params.size() ? cd(params[n.param]) : cd(0);
    case K::kZ: return z;
    case K::kAdd: return eval_node(*n.lhs, params, z) + eval_node(*n.rhs, params, z);
    case K::kSub: return eval_node(*n.lhs, params, z) - eval_node(*n.rhs, params, z);
    case K::kMul: return eval_node(*n.lhs, params, z) * eval_node(*n.rhs, params, z);
    case K::kDiv: return eval_node(*n.lhs, params, z) / eval_node(*n.rhs, params, z);
    case K::kPow: {
      const cd b = eval_node(*n.lhs, params, z);
      const cd e = eval_node(*n.rhs, params, z);
      if (e.imag() == 0 && std::trunc(e.real()) == e.real() && std::abs(e.real()) <= 64) {
        return int_pow(b, static_cast<long long>(e.real()));
      }
      return std::pow(b, e);
    }
    case K::kNeg: return -eval_node(*n.lhs, params, z);
    case K::kSin: return std::sin(eval_node(*n.lhs, params, z));
    case K::kCos: return std::cos(eval_node(*n.lhs, params, z));
    case K::kExp: return std::exp(eval_node(*n.lhs, params, z));
  }
  return {};
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    auto n = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

  unsigned max_param = 0;
  bool uses_z = false;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ExpressionError("expression '" + std::string(text_) + "' at offset " +
                          std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_op(Node::Kind::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = make_op(Node::Kind::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_op(Node::Kind::kMul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_op(Node::Kind::kDiv, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_op(Node::Kind::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make_op(Node::Kind::kPow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        ++pos_;
      } else if ((ch == 'e' || ch == 'E') && pos_ + 1 < text_.size() &&
                 (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                  ((text_[pos_ + 1] == '+' || text_[pos_ + 1] == '-') && pos_ + 2 < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))))) {
        pos_ += 2;
      } else {
        break;
      }
    }
    double v = 0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_) fail("bad number");
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        !(pos_ + 1 < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return make_leaf(cd(0, v));
    }
    return make_leaf(cd(v, 0));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "i") return make_leaf(cd(0, 1));
    if (name == "pi") return make_leaf(cd(std::numbers::pi, 0));
    if (name == "z") {
      uses_z = true;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::kZ;
      return n;
    }
    if (name[0] == 't' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      unsigned index = 1;
      if (name.size() > 1) {
        const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
        if (res.ec != std::errc{} || index < 1) fail("bad parameter name");
      }
      max_param = std::max(max_param, index);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::kParam;
      n->param = index - 1;
      return n;
    }
    Node::Kind fn;
    if (name == "sin") {
      fn = Node::Kind::kSin;
    } else if (name == "cos") {
      fn = Node::Kind::kCos;
    } else if (name == "exp") {
      fn = Node::Kind::kExp;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!accept('(')) fail("expected '(' after function name");
    auto arg = expr();
    if (!accept(')')) fail("expected ')'");
    return make_op(fn, arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse_all();
  e.text_ = std::string(text);
  e.max_param_ = p.max_param;
  e.uses_z_ = p.uses_z;
  return e;
}

Expression Expression::constant(cd value) {
  Expression e;
  e.root_ = make_leaf(value);
  e.text_ = "(" + std::to_string(value.real()) + "," + std::to_string(value.imag()) + ")";
  return e;
}

cd Expression::eval(std::span<const double> params, cd z) const {
  return eval_node(*root_, params, z);
}

// ---------------------------------------------------------------------------
// Parametric families

void ParametricFamily::validate() const {
  if (degree < 1) throw ConfigError("family degree must be >= 1");
  if (coeffs.size() != degree) throw ConfigError("family needs exactly one expression per coefficient");
  for (auto c : axis_counts) {
    if (c < 1) throw ConfigError("axis sample counts must be >= 1");
  }
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k].uses_z()) throw ConfigError("coefficient a" + std::to_string(k) + " may not use z");
    if (coeffs[k].max_parameter() > axis_counts.size()) {
      throw ConfigError("coefficient a" + std::to_string(k) + " references t" +
                        std::to_string(coeffs[k].max_parameter()) + " but only " +
                        std::to_string(axis_counts.size()) + " axes are defined");
    }
  }
}

std::uint64_t ParametricFamily::sample_count() const noexcept {
  std::uint64_t total = 1;
  for (auto c : axis_counts) total *= c;
  return total;
}

void ParametricFamily::parameters(std::uint64_t s, std::vector<double>& out) const {
  out.resize(axis_counts.size());
  for (std::size_t k = 0; k < axis_counts.size(); ++k) {
    const std::uint64_t count = axis_counts[k];
    const std::uint64_t j = s % count;
    s /= count;
    out[k] = count == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(count - 1);
  }
}

bool ParametricFamily::coefficients(std::uint64_t s, std::vector<double>& params,
                                    std::span<cd> out) const {
  parameters(s, params);
  bool ok = true;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    out[k] = coeffs[k].eval(params);
    if (!is_finite(out[k])) ok = false;
  }
  return ok;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

unsigned parse_unsigned(const std::string& s, const std::string& what) {
  unsigned v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

ParametricFamily parse_family(std::string_view text) {
  ParametricFamily f;
  std::optional<unsigned> degree;
  std::map<unsigned, Expression> exprs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("family line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "degree") {
      degree = parse_unsigned(value, "degree");
    } else if (key == "axes") {
      std::istringstream axes(value);
      std::string tok;
      while (axes >> tok) f.axis_counts.push_back(parse_unsigned(tok, "axis sample count"));
    } else if (key.size() > 1 && key[0] == 'a') {
      const unsigned idx = parse_unsigned(key.substr(1), "coefficient index");
      if (exprs.count(idx)) throw ConfigError("coefficient a" + std::to_string(idx) + " defined twice");
      exprs.emplace(idx, Expression::parse(value));
    } else {
      throw ConfigError("family line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!degree) throw ConfigError("family definition lacks 'degree'");
  f.degree = *degree;
  for (const auto& [idx, e] : exprs) {
    if (idx >= f.degree) {
      throw ConfigError("coefficient a" + std::to_string(idx) + " exceeds degree " +
                        std::to_string(f.degree) + " (monic leading term is implicit)");
    }
  }
  for (unsigned k = 0; k < f.degree; ++k) {
    const auto it = exprs.find(k);
    f.coeffs.push_back(it != exprs.end() ? it->second : Expression::constant(0));
  }
  f.validate();
  return f;
}

ParametricFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open family file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_family(buf.str());
}

Enumeration enumerate_range(const ParametricFamily& f, std::uint64_t begin, std::uint64_t end) {
  f.validate();
  Enumeration out;
  std::vector<double> params;
  std::vector<cd> coeffs(f.degree);
  for (std::uint64_t s = begin; s < end; ++s) {
    if (f.coefficients(s, params, coeffs)) {
      out.polys.emplace_back(coeffs);
    } else {
      ++out.skipped;
    }
  }
  return out;
}

Enumeration enumerate_family(const ParametricFamily& f) {
  return enumerate_range(f, 0, f.sample_count());
}

// ---------------------------------------------------------------------------
// Local fits

void Rect::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ConfigError("rectangle requires x_min < x_max and y_min < y_max");
  }
}

void DomainPartition::validate() const {
  bounds.validate();
  if (cells_x < 1 || cells_y < 1) throw ConfigError("partition needs at least one cell per axis");
}

Rect DomainPartition::cell(unsigned i, unsigned j) const {
  if (i >= cells_x || j >= cells_y) throw ConfigError("cell index out of range");
  const double w = (bounds.x_max - bounds.x_min) / cells_x;
  const double h = (bounds.y_max - bounds.y_min) / cells_y;
  // Outer edges are taken from the bounds so the partition covers them exactly.
  return {bounds.x_min + i * w, i + 1 == cells_x ? bounds.x_max : bounds.x_min + (i + 1) * w,
          bounds.y_min + j * h, j + 1 == cells_y ? bounds.y_max : bounds.y_min + (j + 1) * h};
}

namespace {

// Nodes x_min + (k + 0.5)/count * width, k = 0..count-1, on both axes.
std::vector<cd> grid_nodes(const Rect& r, unsigned count) {
  std::vector<cd> out;
  out.reserve(static_cast<std::size_t>(count) * count);
  for (unsigned jy = 0; jy < count; ++jy) {
    const double y = r.y_min + (jy + 0.5) / count * (r.y_max - r.y_min);
    for (unsigned jx = 0; jx < count; ++jx) {
      const double x = r.x_min + (jx + 0.5) / count * (r.x_max - r.x_min);
      out.emplace_back(x, y);
    }
  }
  return out;
}

double binomial(unsigned n, unsigned k) {
  double r = 1;
  for (unsigned j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

FitResult fit_cell(const ComplexFunction& f, const Rect& cell, unsigned degree,
                   unsigned oversample, unsigned cell_i, unsigned cell_j) {
  cell.validate();
  if (degree < 1) throw ConfigError("fit degree must be >= 1");
  if (oversample < 1) throw ConfigError("oversample factor must be >= 1");
  const cd center = cell.center();
  const double half = std::max(cell.x_max - cell.x_min, cell.y_max - cell.y_min) / 2;
  const unsigned cols = degree + 1;
  const unsigned per_axis = oversample * cols;

  const auto nodes = grid_nodes(cell, per_axis);
  Eigen::MatrixXcd vander(static_cast<Eigen::Index>(nodes.size()), cols);
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    const cd u = (nodes[r] - center) / half;
    cd pw(1);
    for (unsigned k = 0; k < cols; ++k) {
      vander(static_cast<Eigen::Index>(r), k) = pw;
      pw *= u;
    }
    const cd fv = f(nodes[r]);
    if (!is_finite(fv)) throw ExpressionError("function is not finite inside the fit cell");
    rhs(static_cast<Eigen::Index>(r)) = fv;
  }
  const Eigen::VectorXcd local = vander.colPivHouseholderQr().solve(rhs);

  // g(z) = sum_k b_k u^k with u = (z - c)/h.
  auto eval_local = [&](cd z) {
    const cd u = (z - center) / half;
    cd acc(0);
    for (unsigned k = cols; k-- > 0;) acc = acc * u + local(k);
    return acc;
  };
  double err = 0;
  for (const cd z : grid_nodes(cell, 8 * per_axis)) {
    const cd fv = f(z);
    if (!is_finite(fv)) throw ExpressionError("function is not finite inside the validation grid");
    err = std::max(err, std::abs(fv - eval_local(z)));
  }

  double max_local = 0;
  for (unsigned k = 0; k < cols; ++k) max_local = std::max(max_local, std::abs(local(k)));
  if (!(std::abs(local(degree)) > 1e-12 * max_local)) {
    throw DegenerateFit("degree-" + std::to_string(degree) + " term vanishes on the cell");
  }

  // Re-expand in global monomials: coefficient of z^j is
  // sum_{k>=j} b_k h^-k C(k, j) (-c)^{k-j}.
  std::vector<cd> global(cols);
  for (unsigned k = 0; k < cols; ++k) {
    const cd bk = local(k) / std::pow(half, static_cast<double>(k));
    cd negc_pow(1);
    for (unsigned j = k + 1; j-- > 0;) {
      global[j] += bk * binomial(k, j) * negc_pow;
      negc_pow *= -center;
    }
  }
  const cd leading = global.back();
  try {
    auto poly = make_monic<double>(global);
    return FitResult{std::move(poly), leading, err, cell_i, cell_j};
  } catch (const DegenerateLeadingCoefficient& e) {
    throw DegenerateFit(e.what());
  }
}

bool accept_cell(const FitResult& r, double eps) { return r.error_bound < eps; }

DomainFit approximate_domain(const ComplexFunction& f, const DomainPartition& d,
                             unsigned degree, unsigned oversample, double eps,
                             unsigned workers) {
  d.validate();
  const std::size_t cells = static_cast<std::size_t>(d.cells_x) * d.cells_y;
  enum class Outcome { kAccepted, kRejected, kDegenerate };
  std::vector<std::optional<FitResult>> results(cells);
  std::vector<Outcome> outcome(cells, Outcome::kRejected);
  parallel_chunks(cells, workers, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t c = begin; c < end; ++c) {
      const auto i = static_cast<unsigned>(c % d.cells_x);
      const auto j = static_cast<unsigned>(c / d.cells_x);
      try {
        auto r = fit_cell(f, d.cell(i, j), degree, oversample, i, j);
        if (accept_cell(r, eps)) {
          outcome[c] = Outcome::kAccepted;
          results[c] = std::move(r);
        }
      } catch (const DegenerateFit&) {
        outcome[c] = Outcome::kDegenerate;
      } catch (const ExpressionError&) {
        outcome[c] = Outcome::kDegenerate;
      }
    }
  });
  DomainFit out;
  for (std::size_t c = 0; c < cells; ++c) {
    switch (outcome[c]) {
      case Outcome::kAccepted: out.accepted.push_back(std::move(*results[c])); break;
      case Outcome::kRejected: ++out.rejected; break;
      case Outcome::kDegenerate: ++out.degenerate; break;
    }
  }
  return out;
}

namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table{
      {"sin", "sin(z)"},
      {"cos", "cos(z)"},
      {"exp", "exp(z) - 2"},
      {"cubic", "z^3 - 1"},
      {"rational", "(z^2 + 1) / (z - 3)"},
      {"mixed", "sin(z) - z/2"},
  };
  return table;
}

}  // namespace

ComplexFunction make_function(const std::string& text) {
  const auto it = builtins().find(text);
  const Expression e = Expression::parse(it != builtins().end() ? it->second : text);
  if (e.max_parameter() > 0) throw ConfigError("fit functions may only use z");
  return [e](cd z) { return e.eval({}, z); };
}

std::vector<std::string> builtin_function_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtins()) names.push_back(k);
  return names;
}

}  // namespace rootdensity::approx
