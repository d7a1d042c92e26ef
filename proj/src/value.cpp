#include "fuelgame/value.hpp"

#include <cmath>
#include <limits>

namespace fuelgame {

namespace {

constexpr int kMaxJumps = 1000;
constexpr double kSettleTol = 1e-12;
constexpr double kFinalTol = 1e-8;
constexpr double kFaceTol = 1e-9;

struct Landing {
  double z;  // |x~| after the jump
  double u;  // accessible total after the jump
};

// g(u) - u = t on u in [0, y_max], g = f^-1
Landing land_plus(const BoundarySolution& b, double t) {
  if (!std::isfinite(t)) throw DomainError("jump target is not finite");
  if (t >= b.x0()) return {t, 0.0};
  double lo = 0, hi = b.y_max();
  const double phi_hi = b.f_inverse(hi) - hi;
  if (t < phi_hi) throw CoverageError("jump root beyond the frontier table");
  if (t == phi_hi) return {b.f_inverse(hi), hi};
  double u = std::min(hi, (b.x0() - t) / (1 - b.f_inverse_prime(0)));
  for (int it = 0; it < 200; ++it) {
    const double r = b.f_inverse(u) - u - t;
    if (r == 0) break;
    if (r > 0)
      lo = u;
    else
      hi = u;
    double nu = u - r / (b.f_inverse_prime(u) - 1);
    if (!(nu > lo && nu < hi)) nu = 0.5 * (lo + hi);
    if (std::abs(nu - u) <= 2 * std::numeric_limits<double>::epsilon() * std::max(1.0, u) ||
        hi - lo <= 2 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
      u = nu;
      break;
    }
    u = nu;
  }
  return {b.f_inverse(u), u};
}

double relative_position(const Vector& x, Index i) {
  const Index n = x.size();
  return (double(n) * x[i] - x.sum()) / double(n - 1);
}

Vector excess_of(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  return threshold_excess(spec, b, s);
}

}  // namespace

double jump_root_plus(const BoundarySolution& b, double target) { return land_plus(b, target).z; }

double jump_root_minus(const BoundarySolution& b, double target) { return -land_plus(b, -target).z; }

JumpRecord apply_jump(const GameSpec& spec, const BoundarySolution& b, JointState& s, const RegionLabel& label) {
  if (label.kind != RegionLabel::Action) throw DomainError("no acting player");
  const Index i = label.player;
  const double acc = total_accessible(spec, s.y, i);
  const double xt = relative_position(s.x, i);
  const double a = std::abs(xt);
  const Landing l = land_plus(b, a - acc);
  double lam = std::clamp(a - l.z, 0.0, acc);
  // landing past the intercept means the tank empties; snap rounding residue
  if (l.z >= b.x0() || acc - lam <= 1e-12 * acc) lam = acc;
  JumpRecord r;
  r.player = i;
  r.side = xt >= 0 ? 1 : -1;
  r.size = lam;
  Vector y_new = s.y;
  if (acc > 0)
    for (Index k = 0; k < y_new.size(); ++k)
      if (spec.adjacency()(i, k) != 0) y_new[k] = lam == acc ? 0.0 : s.y[k] * ((acc - lam) / acc);
  r.consumed = s.y - y_new;
  s.y = y_new.cwiseMax(0.0);
  s.x[i] -= r.side * lam;
  return r;
}

double waiting_distance(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  const Vector e = excess_of(spec, b, s);
  double d = 0;
  for (Index k = 0; k < e.size(); ++k)
    if (std::isfinite(e[k])) d = std::max(d, e[k]);
  return d;
}

double waiting_value(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Index i) {
  const double xt = relative_position(s.x, i);
  const double acc = total_accessible(spec, s.y, i);
  const double p = b.p()(xt, 0);
  if (acc <= 0) return p;
  return p + b.a_coefficient(acc) * std::cosh(xt * std::sqrt(b.beta()));
}

namespace {

JointState settle(const GameSpec& spec, const BoundarySolution& b, JointState s) {
  for (int it = 0; it < kMaxJumps; ++it) {
    const RegionLabel lab = classify_region(spec, b, s);
    if (lab.kind == RegionLabel::Waiting) return s;
    if (waiting_distance(spec, b, s) <= kSettleTol) return s;
    apply_jump(spec, b, s, lab);
  }
  if (waiting_distance(spec, b, s) > kFinalTol) throw NumericError("jump recursion did not settle");
  return s;
}

void check_query(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Index i) {
  check_state(spec, s);
  if (i < 0 || i >= spec.players()) throw DimensionError("player index out of range");
  if (b.players() != spec.players() || b.discount() != spec.discount())
    throw ModelError("boundary solved for a different game");
}

}  // namespace

double value_game(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Index i) {
  check_query(spec, b, s, i);
  return waiting_value(spec, b, settle(spec, b, s), i);
}

Vector value_game(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  check_query(spec, b, s, 0);
  const JointState t = settle(spec, b, s);
  Vector v(spec.players());
  for (Index i = 0; i < v.size(); ++i) v[i] = waiting_value(spec, b, t, i);
  return v;
}

double value_game(const ValueQuery& q) { return value_game(q.spec, q.boundary, q.state, q.player); }

namespace {

struct Evaluator {
  const ValueQuery& q;
  double operator()(const Vector& x, const Vector& y) const {
    return value_game(q.spec, q.boundary, JointState{x, y}, q.player);
  }
};

double d_dx(const Evaluator& v, const JointState& s, Index j, double h) {
  auto central = [&](double hh) {
    Vector xp = s.x, xm = s.x;
    xp[j] += hh;
    xm[j] -= hh;
    return (v(xp, s.y) - v(xm, s.y)) / (2 * hh);
  };
  return (4 * central(h / 2) - central(h)) / 3;
}

double d_dy(const Evaluator& v, const JointState& s, Index k, double h) {
  auto central = [&](double hh) {
    Vector yp = s.y, ym = s.y;
    yp[k] += hh;
    ym[k] -= hh;
    return (v(s.x, yp) - v(s.x, ym)) / (2 * hh);
  };
  auto forward = [&](double hh) {
    Vector y1 = s.y, y2 = s.y;
    y1[k] += hh;
    y2[k] += 2 * hh;
    return (-3 * v(s.x, s.y) + 4 * v(s.x, y1) - v(s.x, y2)) / (2 * hh);
  };
  if (s.y[k] >= h) return (4 * central(h / 2) - central(h)) / 3;
  return (4 * forward(h / 2) - forward(h)) / 3;
}

double gamma_term(const Evaluator& v, const GameSpec& spec, const JointState& s, Index j, double h) {
  const Vector w = allocation_weights(spec, s.y, j);
  double g = 0;
  for (Index k = 0; k < w.size(); ++k)
    if (w[k] != 0) g += w[k] * d_dy(v, s, k, h);
  return g;
}

double default_step(const ValueQuery& q, double fd_step) {
  if (fd_step > 0) return fd_step;
  return 1e-4 * std::max(1.0, std::abs(relative_position(q.state.x, q.player)));
}

}  // namespace

QviReport qvi_residuals(const ValueQuery& q, double fd_step) {
  const GameSpec& spec = q.spec;
  const BoundarySolution& b = q.boundary;
  const JointState& s = q.state;
  const Index i = q.player;
  check_query(spec, b, s, i);
  const Vector e = excess_of(spec, b, s);
  for (Index j = 0; j < e.size(); ++j)
    if (j != i && std::isfinite(e[j]) && e[j] > kFaceTol)
      throw DomainError("state outside the closure of the other players' waiting region");

  const double h = default_step(q, fd_step);
  const Evaluator v{q};
  const double v0 = v(s.x, s.y);
  double lap = 0;
  for (Index j = 0; j < spec.players(); ++j) {
    Vector xp = s.x, xm = s.x;
    xp[j] += h;
    xm[j] -= h;
    lap += (v(xp, s.y) - 2 * v0 + v(xm, s.y)) / (h * h);
  }
  const double xt = relative_position(s.x, i);
  const double n = double(spec.players());
  QviReport r;
  r.pde = 0.5 * lap - spec.discount() * v0 + spec.cost()((n - 1) / n * xt);
  const double vx = d_dx(v, s, i, h);
  const double gam = gamma_term(v, spec, s, i, h);
  r.grad_plus = -gam + vx;
  r.grad_minus = -gam - vx;
  const double acc = total_accessible(spec, s.y, i);
  if (acc > 0) {
    const double g = b.f_inverse(acc);
    r.plus_active = xt <= -g + kFaceTol;
    r.minus_active = xt >= g - kFaceTol;
  }
  for (Index j = 0; j < spec.players(); ++j) {
    if (j == i) {
      r.cross_terms.push_back({r.grad_plus, r.grad_minus});
      continue;
    }
    const double vxj = d_dx(v, s, j, h);
    const double gj = gamma_term(v, spec, s, j, h);
    r.cross_terms.push_back({-gj + vxj, -gj - vxj});
  }
  return r;
}

std::array<double, 2> cross_residuals(const ValueQuery& q, Index j, double fd_step) {
  check_query(q.spec, q.boundary, q.state, q.player);
  if (j < 0 || j >= q.spec.players()) throw DimensionError("player index out of range");
  const double h = default_step(q, fd_step);
  const Evaluator v{q};
  const double vxj = d_dx(v, q.state, j, h);
  const double gj = gamma_term(v, q.spec, q.state, j, h);
  return {-gj + vxj, -gj - vxj};
}

std::array<double, 2> one_sided_second_derivatives(const ValueQuery& q, const Vector& dir, double h) {
  const Index n = q.spec.players(), m = q.spec.resources();
  if (dir.size() != n + m) throw DimensionError("direction must span positions and resources");
  const Evaluator v{q};
  auto at = [&](double t) {
    return v(q.state.x + t * dir.head(n), q.state.y + t * dir.tail(m));
  };
  const double f0 = at(0);
  std::array<double, 2> out;
  for (int side = 0; side < 2; ++side) {
    const double sg = side == 0 ? 1.0 : -1.0;
    out[side] = (2 * f0 - 5 * at(sg * h) + 4 * at(sg * 2 * h) - at(sg * 3 * h)) / (h * h);
  }
  return out;
}

GameComparison compare_games(const GameSpec& sharing, const BoundarySolution& b, const Vector& x,
                             const Vector& y, double tol) {
  const Index n = sharing.players();
  if (sharing.resources() != n) throw DimensionError("sharing game needs one resource per player");
  if (y.size() != n || x.size() != n) throw DimensionError("state has wrong length");
  const GameSpec pool = sharing.with_adjacency(Matrix::Ones(n, 1), Variant::Pooling);
  const GameSpec divide = sharing.with_adjacency(Matrix::Identity(n, n), Variant::Dividing);
  const JointState sp{x, Vector::Constant(1, y.sum())}, ss{x, y};

  auto values = [&](const GameSpec& g, const JointState& s) {
    check_query(g, b, s, 0);
    const Vector xt = relative_positions(s.x);
    const Vector acc = accessible_totals(g, s.y);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
      if (!(std::abs(xt[i]) < b.f_inverse(acc[i])))
        throw HypothesisError("state outside the common waiting region");
      v[i] = waiting_value(g, b, s, i);
    }
    return v;
  };
  GameComparison c;
  c.pooled = values(pool, sp);
  c.shared = values(sharing, ss);
  c.divided = values(divide, ss);
  c.ordered = ((c.pooled.array() <= c.shared.array() + tol) && (c.shared.array() <= c.divided.array() + tol)).all();
  c.pooled_eq_shared = (c.pooled - c.shared).array().abs() <= tol;
  c.shared_eq_divided = (c.shared - c.divided).array().abs() <= tol;
  return c;
}

}  // namespace fuelgame
