#include "fuelgame/core.hpp"

#include <cmath>
#include <limits>

#include "fuelgame/boundary.hpp"

namespace fuelgame {

namespace {

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

bool is_binary(const Matrix& a) {
  return ((a.array() == 0.0) || (a.array() == 1.0)).all();
}

}  // namespace

CostFunction quadratic_cost() {
  return {"quadratic", [](double x) { return Jet{x * x, 2 * x, 2.0, 0.0}; }, 2.0, 2.0,
          [](double x) { return x * x; }};
}

CostFunction logcosh_cost(double c) {
  if (!(c >= 0)) throw ModelError("logcosh weight must be non-negative");
  auto jet = [c](double x) {
    const double t = std::tanh(x);
    const double s2 = 1 - t * t;
    return Jet{x * x + c * log_cosh(x), 2 * x + c * t, 2 + c * s2, -2 * c * s2 * t};
  };
  return {"logcosh", jet, 2.0, 2.0 + c, [c](double x) { return x * x + c * log_cosh(x); }};
}

CostFunction cost_by_name(const std::string& name) {
  if (name == "quadratic") return quadratic_cost();
  if (name == "logcosh") return logcosh_cost();
  throw ModelError("unknown cost '" + name + "'");
}

void validate_cost(const CostFunction& cost, double sigma_ref) {
  if (!cost.jet) throw ModelError("cost has no evaluator");
  if (!(cost.k > 0) || !(cost.k <= cost.K)) throw ModelError("cost needs 0 < k <= K");
  const int n = 10000;
  const double lim = 10 * sigma_ref;
  if (cost(0.0) < 0) throw ModelError("cost must satisfy h(0) >= 0");
  for (int j = 0; j <= n; ++j) {
    const double x = -lim + 2 * lim * j / n;
    const Jet a = cost.jet(x), b = cost.jet(-x);
    const double scale = std::max(1.0, std::abs(a[0]));
    if (std::abs(a[0] - b[0]) > 1e-12 * scale) throw ModelError("cost is not symmetric");
    const double slack = 1e-12 * std::max(1.0, cost.K);
    if (a[2] < cost.k - slack || a[2] > cost.K + slack)
      throw ModelError("cost curvature outside [k, K]");
    if (x >= 0 && a[3] > 1e-12) throw ModelError("cost third derivative positive on x >= 0");
  }
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Pooling: return "pooling";
    case Variant::Dividing: return "dividing";
    case Variant::Sharing: return "sharing";
    case Variant::General: return "general";
  }
  return "general";
}

Variant variant_from_string(const std::string& s) {
  if (s == "pooling") return Variant::Pooling;
  if (s == "dividing") return Variant::Dividing;
  if (s == "sharing") return Variant::Sharing;
  if (s == "general") return Variant::General;
  throw ModelError("unknown variant '" + s + "'");
}

GameSpec::GameSpec(Matrix adjacency, double discount, CostFunction cost, Variant variant)
    : adj_(std::move(adjacency)), alpha_(discount), cost_(std::move(cost)), variant_(variant) {
  const Index n = adj_.rows(), m = adj_.cols();
  if (n < 2) throw DimensionError("a game needs at least two players");
  if (m < 1) throw DimensionError("a game needs at least one resource");
  if (!is_binary(adj_)) throw ModelError("adjacency entries must be 0 or 1");
  if ((adj_.rowwise().sum().array() < 1).any())
    throw ModelError("each player has access to at least one resource");
  if ((adj_.colwise().sum().array() < 1).any())
    throw ModelError("each resource is accessible by at least one player");
  if (!(alpha_ > 0) || !std::isfinite(alpha_)) throw ModelError("discount rate must be positive");
  if (!cost_.jet) throw ModelError("cost has no evaluator");

  switch (variant_) {
    case Variant::Pooling:
      if (m != 1) throw ModelError("pooling needs a single resource");
      break;
    case Variant::Dividing:
      if (m != n || !adj_.isIdentity()) throw ModelError("dividing needs the identity adjacency");
      break;
    case Variant::Sharing:
      if (m != n || (adj_.diagonal().array() != 1.0).any())
        throw ModelError("sharing needs a square adjacency with unit diagonal");
      break;
    case Variant::General:
      break;
  }
}

GameSpec GameSpec::pooling(Index n, double discount, CostFunction cost) {
  return GameSpec(Matrix::Ones(n, 1), discount, std::move(cost), Variant::Pooling);
}

GameSpec GameSpec::dividing(Index n, double discount, CostFunction cost) {
  return GameSpec(Matrix::Identity(n, n), discount, std::move(cost), Variant::Dividing);
}

GameSpec GameSpec::sharing(Matrix adjacency, double discount, CostFunction cost) {
  return GameSpec(std::move(adjacency), discount, std::move(cost), Variant::Sharing);
}

GameSpec GameSpec::with_adjacency(Matrix adjacency, Variant variant) const {
  return GameSpec(std::move(adjacency), alpha_, cost_, variant);
}

void check_state(const GameSpec& spec, const JointState& s) {
  if (s.x.size() != spec.players()) throw DimensionError("position vector has wrong length");
  if (s.y.size() != spec.resources()) throw DimensionError("resource vector has wrong length");
  if (!s.x.allFinite() || !s.y.allFinite()) throw DomainError("state is not finite");
  if ((s.y.array() < 0).any()) throw DomainError("resource levels must be non-negative");
}

std::string to_string(const RegionLabel& r) {
  if (r.kind == RegionLabel::Waiting) return "W";
  return "A" + std::to_string(r.player + 1) + (r.side > 0 ? "+" : "-");
}

Vector accessible_totals(const GameSpec& spec, const Vector& y) {
  if (y.size() != spec.resources()) throw DimensionError("resource vector has wrong length");
  return spec.adjacency() * y;
}

double total_accessible(const GameSpec& spec, const Vector& y, Index i) {
  if (i < 0 || i >= spec.players()) throw DimensionError("player index out of range");
  if (y.size() != spec.resources()) throw DimensionError("resource vector has wrong length");
  return spec.adjacency().row(i).dot(y);
}

Vector allocation_weights(const GameSpec& spec, const Vector& y, Index i) {
  if ((y.array() < 0).any()) throw DomainError("resource levels must be non-negative");
  const double tot = total_accessible(spec, y, i);
  if (tot <= 0) return Vector::Zero(spec.resources());
  return (spec.adjacency().row(i).transpose().array() * y.array() / tot).matrix();
}

Vector threshold_excess(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  check_state(spec, s);
  const Vector xt = relative_positions(s.x);
  const Vector acc = accessible_totals(spec, s.y);
  Vector e(spec.players());
  for (Index k = 0; k < e.size(); ++k)
    e[k] = acc[k] > 0 ? std::abs(xt[k]) - b.f_inverse(acc[k]) : -std::numeric_limits<double>::infinity();
  return e;
}

RegionLabel classify_region(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  const Vector e = threshold_excess(spec, b, s);
  Index best = -1;
  for (Index k = 0; k < e.size(); ++k)
    if (std::isfinite(e[k]) && (best < 0 || e[k] >= e[best])) best = k;
  if (best < 0 || e[best] < 0) return {};
  const double xt = relative_positions(s.x)[best];
  return {RegionLabel::Action, best, xt >= 0 ? 1 : -1};
}

}  // namespace fuelgame
