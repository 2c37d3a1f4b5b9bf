#include "leafsym/exterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <type_traits>

namespace leafsym {

using ad::D1;
using ad::D2;
using ad::D3;
using ad::D4;
using ad::Dual;

// ---------------------------------------------------------------------------
// Charts

bool Chart::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  return !domain || domain(p);
}

ChartRef make_chart(std::string name, std::vector<std::string> coordinates,
                    std::function<bool(std::span<const double>)> domain) {
  if (coordinates.empty() || coordinates.size() > static_cast<std::size_t>(kMaxDim)) {
    throw StructuralError("chart '" + name + "': dimension must be in [1, 8]");
  }
  std::set<std::string> seen(coordinates.begin(), coordinates.end());
  if (seen.size() != coordinates.size()) {
    throw StructuralError("chart '" + name + "': coordinate names must be distinct");
  }
  return std::make_shared<const Chart>(
      Chart{std::move(name), std::move(coordinates), std::move(domain)});
}

// ---------------------------------------------------------------------------
// Field nodes

namespace {

template <class T>
inline constexpr bool kHasDualAbove = !std::is_same_v<T, D4>;

[[noreturn]] void depth_exceeded() {
  throw StructuralError("derivative nesting exceeds supported dual depth");
}

struct ConstantNode final : detail::FieldNodeImpl<ConstantNode> {
  explicit ConstantNode(double v) : value(v) {}
  template <class T>
  T apply(std::span<const T>) const {
    return T(value);
  }
  double value;
};

struct CoordinateNode final : detail::FieldNodeImpl<CoordinateNode> {
  explicit CoordinateNode(int i) : index(i) {}
  template <class T>
  T apply(std::span<const T> x) const {
    return x[index];
  }
  int index;
};

struct SumNode final : detail::FieldNodeImpl<SumNode> {
  std::vector<std::pair<double, ScalarField>> terms;
  double offset = 0.0;
  template <class T>
  T apply(std::span<const T> x) const {
    T acc(offset);
    for (const auto& [w, f] : terms) {
      if (w == 1.0) {
        acc = acc + f.eval(x);
      } else {
        acc = acc + w * f.eval(x);
      }
    }
    return acc;
  }
};

struct ProductNode final : detail::FieldNodeImpl<ProductNode> {
  ProductNode(ScalarField a_, ScalarField b_) : a(std::move(a_)), b(std::move(b_)) {}
  template <class T>
  T apply(std::span<const T> x) const {
    return a.eval(x) * b.eval(x);
  }
  ScalarField a;
  ScalarField b;
};

struct PartialNode final : detail::FieldNodeImpl<PartialNode> {
  PartialNode(ScalarField f_, int i) : f(std::move(f_)), index(i) {}
  template <class T>
  T apply(std::span<const T> x) const {
    if constexpr (kHasDualAbove<T>) {
      std::array<Dual<T>, kMaxDim> buf;
      for (std::size_t j = 0; j < x.size(); ++j) {
        buf[j] = Dual<T>(x[j], T(static_cast<int>(j) == index ? 1.0 : 0.0));
      }
      return f.eval(std::span<const Dual<T>>(buf.data(), x.size())).d;
    } else {
      depth_exceeded();
    }
  }
  ScalarField f;
  int index;
};

struct ComposeNode final : detail::FieldNodeImpl<ComposeNode> {
  ComposeNode(ScalarField f_, ChartMap phi_) : f(std::move(f_)), phi(std::move(phi_)) {}
  template <class T>
  T apply(std::span<const T> x) const {
    std::array<T, kMaxDim> y;
    const auto m = phi.components().size();
    phi.apply(x, std::span<T>(y.data(), m));
    return f.eval(std::span<const T>(y.data(), m));
  }
  ScalarField f;
  ChartMap phi;
};

// Generic determinant with value-based partial pivoting.
template <class T>
T generic_determinant(std::array<std::array<T, kMaxDim>, kMaxDim>& m, int n) {
  T det(1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    double best = std::abs(ad::value_of(m[c][c]));
    for (int r = c + 1; r < n; ++r) {
      double v = std::abs(ad::value_of(m[r][c]));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return T(0.0);
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det = det * m[c][c];
    for (int r = c + 1; r < n; ++r) {
      T factor = m[r][c] / m[c][c];
      for (int k = c + 1; k < n; ++k) m[r][k] = m[r][k] - factor * m[c][k];
    }
  }
  return det;
}

// Coefficient of dx_I in phi^* a, evaluated in one pass per point:
//   sum_J a_J(phi(x)) det(d phi_J / d x_I).
struct PullbackNode final : detail::FieldNodeImpl<PullbackNode> {
  PullbackNode(ChartMap phi_, DifferentialForm a_, Mask source)
      : phi(std::move(phi_)), a(std::move(a_)), columns(mask_indices(source)) {}

  template <class T>
  T apply(std::span<const T> x) const {
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(phi.components().size());
    const int k = static_cast<int>(columns.size());
    std::array<T, kMaxDim> y;
    phi.apply(x, std::span<T>(y.data(), m));
    std::span<const T> yv(y.data(), m);
    if (k == 0) {
      auto only = a.coefficient(0);
      return only ? only->eval(yv) : T(0.0);
    }
    // jac[j][c] = d phi_j / d x_{columns[c]}
    std::array<std::array<T, kMaxDim>, kMaxDim> jac;
    if constexpr (kHasDualAbove<T>) {
      std::array<Dual<T>, kMaxDim> buf;
      for (int c = 0; c < k; ++c) {
        for (int j = 0; j < n; ++j) {
          buf[j] = Dual<T>(x[j], T(j == columns[c] ? 1.0 : 0.0));
        }
        std::span<const Dual<T>> xs(buf.data(), n);
        for (int j = 0; j < m; ++j) jac[j][c] = phi.components()[j].eval(xs).d;
      }
    } else {
      depth_exceeded();
    }
    T acc(0.0);
    std::array<std::array<T, kMaxDim>, kMaxDim> minor;
    for (const auto& [mask, coeff] : a.terms()) {
      auto rows = mask_indices(mask);
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) minor[r][c] = jac[rows[r]][c];
      }
      T det = generic_determinant(minor, k);
      acc = acc + coeff.eval(yv) * det;
    }
    return acc;
  }

  ChartMap phi;
  DifferentialForm a;
  std::vector<int> columns;
};

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(ChartRef chart, std::shared_ptr<const detail::FieldNode> node,
                         std::optional<double> constant, std::optional<int> coordinate)
    : chart_(std::move(chart)),
      node_(std::move(node)),
      constant_(constant),
      coordinate_(coordinate) {}

ScalarField ScalarField::constant(ChartRef chart, double c) {
  return ScalarField(std::move(chart), std::make_shared<ConstantNode>(c), c, std::nullopt);
}

ScalarField ScalarField::coordinate(ChartRef chart, int index) {
  if (index < 0 || index >= chart->dim()) {
    throw StructuralError("coordinate index out of range on chart '" + chart->name + "'");
  }
  return ScalarField(std::move(chart), std::make_shared<CoordinateNode>(index), std::nullopt,
                     index);
}

double ScalarField::partial(std::span<const double> p, int index) const {
  std::array<D1, kMaxDim> buf;
  for (std::size_t j = 0; j < p.size(); ++j) {
    buf[j] = D1(p[j], static_cast<int>(j) == index ? 1.0 : 0.0);
  }
  return node_->eval(std::span<const D1>(buf.data(), p.size())).d;
}

std::vector<double> ScalarField::gradient(std::span<const double> p) const {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = partial(p, static_cast<int>(i));
  return g;
}

ScalarField ScalarField::derivative(int index) const {
  if (index < 0 || index >= chart_->dim()) {
    throw StructuralError("derivative index out of range on chart '" + chart_->name + "'");
  }
  if (constant_) return constant(chart_, 0.0);
  if (coordinate_) return constant(chart_, *coordinate_ == index ? 1.0 : 0.0);
  return ScalarField(chart_, std::make_shared<PartialNode>(*this, index), std::nullopt,
                     std::nullopt);
}

namespace {

void require_same_chart(const ChartRef& a, const ChartRef& b, const char* what) {
  if (a != b) {
    throw StructuralError(std::string(what) + ": chart mismatch ('" + a->name + "' vs '" +
                          b->name + "')");
  }
}

}  // namespace

ScalarField linear_combination(const ChartRef& chart,
                               const std::vector<std::pair<double, ScalarField>>& terms) {
  auto node = std::make_shared<SumNode>();
  for (const auto& [w, f] : terms) {
    require_same_chart(chart, f.chart(), "linear_combination");
    if (w == 0.0 || f.is_zero()) continue;
    if (auto c = f.constant_value()) {
      node->offset += w * *c;
      continue;
    }
    node->terms.emplace_back(w, f);
  }
  if (node->terms.empty()) return ScalarField::constant(chart, node->offset);
  if (node->terms.size() == 1 && node->offset == 0.0 && node->terms[0].first == 1.0) {
    return node->terms[0].second;
  }
  return ScalarField(chart, node, std::nullopt, std::nullopt);
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return linear_combination(a.chart(), {{1.0, a}, {1.0, b}});
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return linear_combination(a.chart(), {{1.0, a}, {-1.0, b}});
}

ScalarField operator-(const ScalarField& a) { return linear_combination(a.chart(), {{-1.0, a}}); }

ScalarField operator*(double c, const ScalarField& a) {
  return linear_combination(a.chart(), {{c, a}});
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  require_same_chart(a.chart(), b.chart(), "field product");
  if (a.is_zero() || b.is_zero()) return ScalarField::constant(a.chart(), 0.0);
  if (auto c = a.constant_value()) return *c * b;
  if (auto c = b.constant_value()) return *c * a;
  return ScalarField(a.chart(), std::make_shared<ProductNode>(a, b), std::nullopt, std::nullopt);
}

// ---------------------------------------------------------------------------
// ChartMap

ChartMap::ChartMap(ChartRef source, ChartRef target, std::vector<ScalarField> components)
    : source_(std::move(source)), target_(std::move(target)), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != target_->dim()) {
    throw StructuralError("chart map into '" + target_->name + "' needs " +
                          std::to_string(target_->dim()) + " components");
  }
  for (const auto& c : components_) require_same_chart(source_, c.chart(), "chart map component");
}

ChartMap ChartMap::identity(const ChartRef& chart) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart->dim(); ++i) comps.push_back(ScalarField::coordinate(chart, i));
  return ChartMap(chart, chart, std::move(comps));
}

ChartMap ChartMap::translation(const ChartRef& chart, std::vector<double> offset) {
  if (static_cast<int>(offset.size()) != chart->dim()) {
    throw StructuralError("translation offset has wrong dimension");
  }
  std::vector<ScalarField> comps;
  for (int i = 0; i < chart->dim(); ++i) {
    comps.push_back(linear_combination(
        chart, {{1.0, ScalarField::coordinate(chart, i)},
                {offset[i], ScalarField::constant(chart, 1.0)}}));
  }
  return ChartMap(chart, chart, std::move(comps));
}

Point ChartMap::operator()(std::span<const double> x) const {
  Point y(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) y[j] = components_[j](x);
  return y;
}

ScalarField compose(const ScalarField& f, const ChartMap& phi) {
  require_same_chart(f.chart(), phi.target(), "compose");
  if (auto c = f.constant_value()) return ScalarField::constant(phi.source(), *c);
  if (auto i = f.coordinate_index()) return phi.components()[*i];
  return ScalarField(phi.source(), std::make_shared<ComposeNode>(f, phi), std::nullopt,
                     std::nullopt);
}

ChartMap compose(const ChartMap& psi, const ChartMap& phi) {
  require_same_chart(psi.source(), phi.target(), "map composition");
  std::vector<ScalarField> comps;
  for (const auto& c : psi.components()) comps.push_back(compose(c, phi));
  return ChartMap(phi.source(), psi.target(), std::move(comps));
}

// ---------------------------------------------------------------------------
// Multi-indices

int mask_degree(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

std::vector<int> mask_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; i < kMaxDim; ++i) {
    if (m & (1u << i)) out.push_back(i);
  }
  return out;
}

Mask mask_of(std::initializer_list<int> indices) {
  unsigned m = 0;
  for (int i : indices) {
    if (i < 0 || i >= kMaxDim) throw StructuralError("multi-index entry out of range");
    m |= 1u << i;
  }
  return static_cast<Mask>(m);
}

int shuffle_sign(Mask a, Mask b) {
  // Count inversions: pairs (i in a, j in b) with i > j.
  int inversions = 0;
  for (int i : mask_indices(a)) {
    unsigned below = static_cast<unsigned>(b) & ((1u << i) - 1u);
    inversions += std::popcount(below);
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

// ---------------------------------------------------------------------------
// DifferentialForm

DifferentialForm::DifferentialForm(ChartRef chart, int degree)
    : chart_(std::move(chart)), degree_(degree) {
  if (degree < 0) throw StructuralError("negative form degree");
}

DifferentialForm DifferentialForm::scalar(const ScalarField& f) {
  DifferentialForm out(f.chart(), 0);
  out.add_term(0, f);
  return out;
}

DifferentialForm DifferentialForm::basis(const ChartRef& chart, std::initializer_list<int> indices) {
  DifferentialForm out(chart, static_cast<int>(indices.size()));
  std::vector<int> idx(indices);
  for (int i : idx) {
    if (i < 0 || i >= chart->dim()) throw StructuralError("basis index out of chart range");
  }
  // Bubble sort to obtain the permutation sign; repeated index gives zero.
  int sign = 1;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b + 1 < idx.size() - a; ++b) {
      if (idx[b] == idx[b + 1]) return out;
      if (idx[b] > idx[b + 1]) {
        std::swap(idx[b], idx[b + 1]);
        sign = -sign;
      }
    }
  }
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    if (idx[a] == idx[a + 1]) return out;
  }
  Mask m = 0;
  for (int i : idx) m = static_cast<Mask>(m | (1u << i));
  out.add_term(m, ScalarField::constant(chart, static_cast<double>(sign)));
  return out;
}

std::optional<ScalarField> DifferentialForm::coefficient(Mask m) const {
  auto it = terms_.find(m);
  if (it == terms_.end()) return std::nullopt;
  return it->second;
}

double DifferentialForm::coefficient_at(Mask m, std::span<const double> p) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second(p);
}

void DifferentialForm::add_term(Mask m, const ScalarField& f) {
  require_same_chart(chart_, f.chart(), "form term");
  if (mask_degree(m) != degree_) throw StructuralError("term degree does not match form degree");
  if (degree_ > chart_->dim() || (m >> chart_->dim()) != 0) {
    throw StructuralError("multi-index outside chart dimension");
  }
  if (f.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, f);
    return;
  }
  ScalarField sum = it->second + f;
  if (sum.is_zero()) {
    terms_.erase(it);
  } else {
    it->second = sum;
  }
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& other) {
  require_same_chart(chart_, other.chart_, "form sum");
  if (degree_ != other.degree_) throw StructuralError("form sum: degree mismatch");
  for (const auto& [m, f] : other.terms_) add_term(m, f);
  return *this;
}

DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) {
  a += b;
  return a;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) {
  return a + (-1.0) * b;
}

DifferentialForm operator*(double c, const DifferentialForm& a) {
  DifferentialForm out(a.chart_, a.degree_);
  for (const auto& [m, f] : a.terms_) out.add_term(m, c * f);
  return out;
}

DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a) {
  DifferentialForm out(a.chart_, a.degree_);
  for (const auto& [m, g] : a.terms_) out.add_term(m, f * g);
  return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  DifferentialForm out(a.chart(), a.degree() + b.degree());
  if (out.degree() > a.chart()->dim()) return out;
  for (const auto& [ma, fa] : a.terms()) {
    for (const auto& [mb, fb] : b.terms()) {
      if (ma & mb) continue;
      const int sign = shuffle_sign(ma, mb);
      out.add_term(static_cast<Mask>(ma | mb), static_cast<double>(sign) * (fa * fb));
    }
  }
  return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& a) {
  const int n = a.chart()->dim();
  if (a.degree() >= n) {
    throw StructuralError("exterior derivative of a top-degree form");
  }
  DifferentialForm out(a.chart(), a.degree() + 1);
  for (const auto& [m, f] : a.terms()) {
    for (int i = 0; i < n; ++i) {
      if (m & (1u << i)) continue;
      ScalarField di = f.derivative(i);
      if (di.is_zero()) continue;
      const Mask single = static_cast<Mask>(1u << i);
      const int sign = shuffle_sign(single, m);
      out.add_term(static_cast<Mask>(m | single), static_cast<double>(sign) * di);
    }
  }
  return out;
}

DifferentialForm pullback(const ChartMap& phi, const DifferentialForm& a) {
  require_same_chart(a.chart(), phi.target(), "pullback");
  const auto& src = phi.source();
  DifferentialForm out(src, a.degree());
  if (a.is_zero() || a.degree() > src->dim()) return out;
  if (a.degree() == 0) {
    out.add_term(0, compose(*a.coefficient(0), phi));
    return out;
  }
  const unsigned full = (1u << src->dim()) - 1u;
  for (unsigned m = 1; m <= full; ++m) {
    if (mask_degree(static_cast<Mask>(m)) != a.degree()) continue;
    out.add_term(static_cast<Mask>(m),
                 ScalarField(src, std::make_shared<PullbackNode>(phi, a, static_cast<Mask>(m)),
                             std::nullopt, std::nullopt));
  }
  return out;
}

DifferentialForm interior(const std::vector<ScalarField>& x, const DifferentialForm& a) {
  const int n = a.chart()->dim();
  if (static_cast<int>(x.size()) != n) throw StructuralError("interior: vector field dimension");
  if (a.degree() == 0) throw StructuralError("interior product of a 0-form");
  for (const auto& c : x) require_same_chart(c.chart(), a.chart(), "interior");
  DifferentialForm out(a.chart(), a.degree() - 1);
  for (const auto& [m, f] : a.terms()) {
    for (int i : mask_indices(m)) {
      const Mask single = static_cast<Mask>(1u << i);
      const Mask rest = static_cast<Mask>(m & ~single);
      const double sign = shuffle_sign(single, rest);
      out.add_term(rest, sign * (x[i] * f));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

TangentVector::TangentVector(ChartRef chart_, Point base_, std::vector<double> components_)
    : chart(std::move(chart_)), base(std::move(base_)), components(std::move(components_)) {
  if (static_cast<int>(base.size()) != chart->dim() ||
      static_cast<int>(components.size()) != chart->dim()) {
    throw StructuralError("tangent vector dimension does not match chart '" + chart->name + "'");
  }
  if (!chart->contains(base)) {
    throw DomainError("tangent vector base point outside chart '" + chart->name + "'");
  }
}

TangentVector TangentVector::coordinate(const ChartRef& chart, const Point& base, int index) {
  std::vector<double> c(chart->dim(), 0.0);
  c.at(index) = 1.0;
  return TangentVector(chart, base, std::move(c));
}

std::vector<TangentVector> coordinate_frame(const ChartRef& chart, const Point& p) {
  std::vector<TangentVector> frame;
  for (int i = 0; i < chart->dim(); ++i) frame.push_back(TangentVector::coordinate(chart, p, i));
  return frame;
}

double determinant(std::vector<std::vector<double>> m) {
  const int n = static_cast<int>(m.size());
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (int r = c + 1; r < n; ++r) {
      const double factor = m[r][c] / m[c][c];
      for (int k = c + 1; k < n; ++k) m[r][k] -= factor * m[c][k];
    }
  }
  return det;
}

namespace {

void check_vectors(const DifferentialForm& a, std::span<const TangentVector> vectors) {
  if (static_cast<int>(vectors.size()) != a.degree()) {
    throw StructuralError("evaluate: number of vectors differs from form degree");
  }
  for (const auto& v : vectors) {
    require_same_chart(a.chart(), v.chart, "evaluate");
    if (v.base != vectors.front().base) {
      throw StructuralError("evaluate: tangent vectors have different base points");
    }
  }
}

}  // namespace

double evaluate(const DifferentialForm& a, std::span<const TangentVector> vectors) {
  check_vectors(a, vectors);
  const int k = a.degree();
  if (k == 0) {
    throw StructuralError("evaluate: use the scalar field directly for 0-forms");
  }
  const auto& p = vectors.front().base;
  double total = 0.0;
  std::vector<std::vector<double>> minor(k, std::vector<double>(k));
  for (const auto& [m, f] : a.terms()) {
    auto rows = mask_indices(m);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) minor[r][c] = vectors[c].components[rows[r]];
    }
    const double det = determinant(minor);
    if (det != 0.0) total += f(p) * det;
  }
  return total;
}

std::vector<std::vector<double>> pairing_matrix(const DifferentialForm& a,
                                                std::span<const TangentVector> frame) {
  if (a.degree() != 2) throw StructuralError("pairing_matrix needs a 2-form");
  const auto n = frame.size();
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const TangentVector pair[2] = {frame[i], frame[j]};
      b[i][j] = evaluate(a, pair);
      b[j][i] = -b[i][j];
    }
  }
  return b;
}

double max_coefficient_difference(const DifferentialForm& a, const DifferentialForm& b,
                                  std::span<const double> p) {
  require_same_chart(a.chart(), b.chart(), "coefficient comparison");
  if (a.degree() != b.degree()) throw StructuralError("coefficient comparison: degree mismatch");
  double worst = 0.0;
  for (const auto& [m, f] : a.terms()) {
    worst = std::max(worst, std::abs(f(p) - b.coefficient_at(m, p)));
  }
  for (const auto& [m, g] : b.terms()) {
    if (!a.terms().contains(m)) worst = std::max(worst, std::abs(g(p)));
  }
  return worst;
}

double max_abs_coefficient(const DifferentialForm& a, std::span<const double> p) {
  double worst = 0.0;
  for (const auto& [m, f] : a.terms()) worst = std::max(worst, std::abs(f(p)));
  return worst;
}

double pfaffian(const std::array<std::array<double, 4>, 4>& b) {
  return b[0][1] * b[2][3] - b[0][2] * b[1][3] + b[0][3] * b[1][2];
}

double pfaffian4(const DifferentialForm& a, std::span<const double> p,
                 std::span<const TangentVector> frame) {
  if (a.degree() != 2 || a.chart()->dim() != 4) {
    throw StructuralError("pfaffian4 needs a 2-form on a 4-dimensional chart");
  }
  if (frame.size() != 4) throw StructuralError("pfaffian4 needs a 4-vector frame");
  for (const auto& v : frame) {
    if (!std::equal(v.base.begin(), v.base.end(), p.begin(), p.end())) {
      throw StructuralError("pfaffian4: frame not based at p");
    }
  }
  auto m = pairing_matrix(a, frame);
  std::array<std::array<double, 4>, 4> b{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) b[i][j] = m[i][j];
  }
  return pfaffian(b);
}

}  // namespace leafsym
