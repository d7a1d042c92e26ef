#pragma once

#include <array>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "fuelgame/errors.hpp"

namespace fuelgame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// h, h', h'', h'''
using Jet = std::array<double, 4>;

struct CostFunction {
  std::string name;
  std::function<Jet(double)> jet;
  double k = 0;  // lower curvature bound
  double K = 0;  // upper curvature bound
  std::function<double(double)> value;  // optional fast path for h alone

  double operator()(double x) const { return value ? value(x) : jet(x)[0]; }
};

CostFunction quadratic_cost();
// x^2 + c*log cosh x, c >= 0
CostFunction logcosh_cost(double c = 0.1);
CostFunction cost_by_name(const std::string& name);

// symmetry, curvature bounds and h''' sign on [-10 s, 10 s]
void validate_cost(const CostFunction& cost, double sigma_ref = 1.0);

enum class Variant { Pooling, Dividing, Sharing, General };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

class GameSpec {
 public:
  GameSpec(Matrix adjacency, double discount, CostFunction cost, Variant variant = Variant::General);

  static GameSpec pooling(Index n, double discount, CostFunction cost);
  static GameSpec dividing(Index n, double discount, CostFunction cost);
  static GameSpec sharing(Matrix adjacency, double discount, CostFunction cost);

  Index players() const { return adj_.rows(); }
  Index resources() const { return adj_.cols(); }
  const Matrix& adjacency() const { return adj_; }
  double discount() const { return alpha_; }
  const CostFunction& cost() const { return cost_; }
  Variant variant() const { return variant_; }

  // same N, alpha, cost with another network
  GameSpec with_adjacency(Matrix adjacency, Variant variant) const;

 private:
  Matrix adj_;
  double alpha_;
  CostFunction cost_;
  Variant variant_;
};

struct JointState {
  Vector x;
  Vector y;
};

void check_state(const GameSpec& spec, const JointState& s);

struct RegionLabel {
  enum Kind { Waiting, Action } kind = Waiting;
  Index player = -1;
  int side = 0;  // +1 or -1

  bool operator==(const RegionLabel&) const = default;
};

std::string to_string(const RegionLabel& r);

template <typename Derived>
typename Derived::PlainObject relative_positions(const Eigen::MatrixBase<Derived>& x) {
  const Index n = x.size();
  if (n < 2) throw DimensionError("relative positions need at least two players");
  using Scalar = typename Derived::Scalar;
  const Scalar s = x.sum();
  return ((Scalar(n) * x.derived().array() - s) / Scalar(n - 1)).matrix();
}

// accessible totals a_i . y for every player
Vector accessible_totals(const GameSpec& spec, const Vector& y);
double total_accessible(const GameSpec& spec, const Vector& y, Index i);
// w_ik = a_ik y^k / sum_s a_is y^s, zero vector when nothing is left
Vector allocation_weights(const GameSpec& spec, const Vector& y, Index i);

class BoundarySolution;

// Q tie-break: larger excess wins, ties to the larger index
RegionLabel classify_region(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

// |x~^i| - f^-1(acc_i), -inf for players with nothing accessible
Vector threshold_excess(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

}  // namespace fuelgame
