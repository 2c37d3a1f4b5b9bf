#pragma once

// Chart-based exterior calculus with exact first (and nested) derivatives.
//
// Scalar fields are immutable expression DAGs whose leaves are generic
// callables evaluable on double and on nested dual numbers up to depth four.
// Differential forms store one scalar field per increasing multi-index, with
// the multi-index packed as a bit mask (chart dimension is at most 8).

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafsym/dual.hpp"
#include "leafsym/errors.hpp"

namespace leafsym {

inline constexpr int kMaxDim = 8;

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Charts

struct Chart {
  std::string name;
  std::vector<std::string> coordinates;
  std::function<bool(std::span<const double>)> domain;

  int dim() const { return static_cast<int>(coordinates.size()); }
  bool contains(std::span<const double> p) const;
};

using ChartRef = std::shared_ptr<const Chart>;

/// Builds a chart; an empty domain predicate accepts all of R^dim.
ChartRef make_chart(std::string name, std::vector<std::string> coordinates,
                    std::function<bool(std::span<const double>)> domain = {});

// ---------------------------------------------------------------------------
// Scalar fields

namespace detail {

struct FieldNode {
  virtual ~FieldNode() = default;
  virtual double eval(std::span<const double> x) const = 0;
  virtual ad::D1 eval(std::span<const ad::D1> x) const = 0;
  virtual ad::D2 eval(std::span<const ad::D2> x) const = 0;
  virtual ad::D3 eval(std::span<const ad::D3> x) const = 0;
  virtual ad::D4 eval(std::span<const ad::D4> x) const = 0;
};

// Derived supplies `template <class T> T apply(std::span<const T>) const`.
template <class Derived>
struct FieldNodeImpl : FieldNode {
  double eval(std::span<const double> x) const override { return self().apply(x); }
  ad::D1 eval(std::span<const ad::D1> x) const override { return self().apply(x); }
  ad::D2 eval(std::span<const ad::D2> x) const override { return self().apply(x); }
  ad::D3 eval(std::span<const ad::D3> x) const override { return self().apply(x); }
  ad::D4 eval(std::span<const ad::D4> x) const override { return self().apply(x); }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

template <class F>
struct LambdaNode final : FieldNodeImpl<LambdaNode<F>> {
  explicit LambdaNode(F fn) : f(std::move(fn)) {}
  template <class T>
  T apply(std::span<const T> x) const {
    return T(f(x));
  }
  F f;
};

}  // namespace detail

class ChartMap;

class ScalarField {
 public:
  /// Wraps a generic callable `(std::span<const T>) -> T`.  The callable must
  /// be written against ad:: math so that it instantiates for every dual depth.
  template <class F>
  static ScalarField from(ChartRef chart, F f) {
    return ScalarField(std::move(chart),
                       std::make_shared<detail::LambdaNode<F>>(std::move(f)),
                       std::nullopt, std::nullopt);
  }
  static ScalarField constant(ChartRef chart, double c);
  static ScalarField coordinate(ChartRef chart, int index);

  const ChartRef& chart() const { return chart_; }

  double operator()(std::span<const double> p) const { return node_->eval(p); }

  template <class T>
  T eval(std::span<const T> p) const {
    return node_->eval(p);
  }

  /// Exact partial derivative at p by one dual-number pass.
  double partial(std::span<const double> p, int index) const;
  std::vector<double> gradient(std::span<const double> p) const;

  /// The field d f / d x_index.
  ScalarField derivative(int index) const;

  std::optional<double> constant_value() const { return constant_; }
  std::optional<int> coordinate_index() const { return coordinate_; }
  bool is_zero() const { return constant_ && *constant_ == 0.0; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& a);
  friend ScalarField operator-(const ScalarField& a);

  /// Internal: fields assembled from nodes by the engine.
  ScalarField(ChartRef chart, std::shared_ptr<const detail::FieldNode> node,
              std::optional<double> constant, std::optional<int> coordinate);

 private:
  ChartRef chart_;
  std::shared_ptr<const detail::FieldNode> node_;
  std::optional<double> constant_;
  std::optional<int> coordinate_;
};

/// Sum of weighted fields with constant folding.
ScalarField linear_combination(const ChartRef& chart,
                               const std::vector<std::pair<double, ScalarField>>& terms);

// ---------------------------------------------------------------------------
// Maps between charts

class ChartMap {
 public:
  ChartMap(ChartRef source, ChartRef target, std::vector<ScalarField> components);

  static ChartMap identity(const ChartRef& chart);
  /// x -> x + offset on one chart.
  static ChartMap translation(const ChartRef& chart, std::vector<double> offset);

  const ChartRef& source() const { return source_; }
  const ChartRef& target() const { return target_; }
  const std::vector<ScalarField>& components() const { return components_; }

  Point operator()(std::span<const double> x) const;

  template <class T>
  void apply(std::span<const T> x, std::span<T> y) const {
    for (std::size_t j = 0; j < components_.size(); ++j) y[j] = components_[j].eval(x);
  }

 private:
  ChartRef source_;
  ChartRef target_;
  std::vector<ScalarField> components_;
};

/// f o phi, a field on phi.source().
ScalarField compose(const ScalarField& f, const ChartMap& phi);
/// psi o phi.
ChartMap compose(const ChartMap& psi, const ChartMap& phi);

// ---------------------------------------------------------------------------
// Multi-indices

using Mask = std::uint8_t;

int mask_degree(Mask m);
std::vector<int> mask_indices(Mask m);
Mask mask_of(std::initializer_list<int> indices);

/// Sign of the permutation sorting the concatenation (a, b) of two disjoint
/// increasing index sets.
int shuffle_sign(Mask a, Mask b);

// ---------------------------------------------------------------------------
// Differential forms

class DifferentialForm {
 public:
  /// The zero form of the given degree.
  DifferentialForm(ChartRef chart, int degree);

  static DifferentialForm scalar(const ScalarField& f);
  /// dx_{i1} ^ ... ^ dx_{ik}; indices in any order, sign normalised.
  static DifferentialForm basis(const ChartRef& chart, std::initializer_list<int> indices);

  const ChartRef& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<Mask, ScalarField>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  std::optional<ScalarField> coefficient(Mask m) const;
  double coefficient_at(Mask m, std::span<const double> p) const;

  /// Accumulates f into the coefficient of m.
  void add_term(Mask m, const ScalarField& f);

  DifferentialForm& operator+=(const DifferentialForm& other);
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(double c, const DifferentialForm& a);
  friend DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a);

 private:
  ChartRef chart_;
  int degree_;
  std::map<Mask, ScalarField> terms_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& a);
DifferentialForm pullback(const ChartMap& phi, const DifferentialForm& a);
/// Interior product i_X a of a vector field with components x (one per coordinate).
DifferentialForm interior(const std::vector<ScalarField>& x, const DifferentialForm& a);

// ---------------------------------------------------------------------------
// Evaluation

struct TangentVector {
  ChartRef chart;
  Point base;
  std::vector<double> components;

  /// Validates dimensions and the chart's domain predicate.
  TangentVector(ChartRef chart, Point base, std::vector<double> components);
  static TangentVector coordinate(const ChartRef& chart, const Point& base, int index);
};

/// Standard coordinate frame (d/dx_0, ..., d/dx_{n-1}) at p.
std::vector<TangentVector> coordinate_frame(const ChartRef& chart, const Point& p);

double evaluate(const DifferentialForm& a, std::span<const TangentVector> vectors);

/// Matrix B_ij = a(v_i, v_j) of a 2-form on a frame.
std::vector<std::vector<double>> pairing_matrix(const DifferentialForm& a,
                                                std::span<const TangentVector> frame);

/// Pfaffian of a 4x4 antisymmetric matrix.
double pfaffian(const std::array<std::array<double, 4>, 4>& b);

/// Pf(B), B_ij = a(frame_i, frame_j), for a 2-form on a 4-dimensional chart.
double pfaffian4(const DifferentialForm& a, std::span<const double> p,
                 std::span<const TangentVector> frame);

/// max over multi-indices of |a_I(p) - b_I(p)|; forms must share chart and degree.
double max_coefficient_difference(const DifferentialForm& a, const DifferentialForm& b,
                                  std::span<const double> p);
/// max over multi-indices of |a_I(p)|.
double max_abs_coefficient(const DifferentialForm& a, std::span<const double> p);

/// Determinant by Gaussian elimination with partial pivoting (n <= 8).
double determinant(std::vector<std::vector<double>> m);

}  // namespace leafsym
