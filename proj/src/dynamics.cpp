#include "fuelgame/dynamics.hpp"

#include <cmath>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace fuelgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// -zeta(1/2) / sqrt(2 pi)
constexpr double kMonitoringConstant = 0.5825971579390106;
constexpr int kMaxJumps = 1000;
constexpr double kSettleTol = 1e-12;
constexpr double kFinalTol = 1e-8;

bool same_rows(const Matrix& a) { return a.rows() == 2 && a.row(0) == a.row(1); }

}  // namespace

// ---------------------------------------------------------------- geometry

bool GeometryModel::in_domain(const JointState& s) const {
  check_state(spec_, s);
  const Vector xt = relative_positions(s.x);
  const Vector acc = accessible_totals(spec_, s.y);
  for (Index k = 0; k < xt.size(); ++k)
    if (!(std::abs(xt[k]) < b_.f_inverse(acc[k]))) return false;
  return true;
}

Vector GeometryModel::normal(Index face, const Vector& y) const {
  const Index n = spec_.players(), m = spec_.resources();
  if (face < 0 || face >= 2 * n) throw DimensionError("face index out of range");
  const Index k = face % n;
  const double sg = face < n ? -1.0 : 1.0;
  Vector v(n + m);
  v.head(n).setConstant(-sg / double(n - 1));
  v[k] = sg;
  const double acc = total_accessible(spec_, y, k);
  v.tail(m) = b_.f_inverse_prime(acc) * spec_.adjacency().row(k).transpose();
  return v.normalized();
}

Vector GeometryModel::reflection(Index face, const Vector& y) const {
  const Index n = spec_.players(), m = spec_.resources();
  if (face < 0 || face >= 2 * n) throw DimensionError("face index out of range");
  const Index k = face % n;
  Vector v = Vector::Zero(n + m);
  v[k] = face < n ? -1.0 : 1.0;
  v.tail(m) = -allocation_weights(spec_, y, k);
  return v.normalized();
}

GeometryModel build_geometry(const GameSpec& spec, const BoundarySolution& b) {
  if (b.players() != spec.players() || b.discount() != spec.discount())
    throw ModelError("boundary solved for a different game");
  return GeometryModel(spec, b);
}

ReflectionBound check_reflection_compatibility(const GeometryModel& g, const Vector& lo, const Vector& hi,
                                               int samples_per_dim, double floor) {
  const Index n = g.spec().players(), m = g.spec().resources();
  if (lo.size() != m || hi.size() != m) throw DimensionError("resource box has wrong dimension");
  if ((hi.array() < lo.array()).any()) throw DomainError("resource box is empty");
  if (samples_per_dim < 1) throw DomainError("need at least one sample per dimension");
  ReflectionBound out;
  const Vector lo_f = lo.cwiseMax(floor);
  out.floored = (lo_f.array() != lo.array()).any();
  const Vector hi_f = hi.cwiseMax(lo_f);
  out.normal_side = kInf;
  out.reflection_side = kInf;

  long total_y = 1;
  for (Index j = 0; j < m; ++j) total_y *= samples_per_dim;
  long patterns = 1;
  for (Index i = 0; i < n; ++i) patterns *= 3;

  std::vector<Vector> nrm(2 * n), ref(2 * n);
  std::vector<int> pat(n);
  for (long c = 0; c < total_y; ++c) {
    Vector y(m);
    long r = c;
    for (Index j = 0; j < m; ++j) {
      const int idx = int(r % samples_per_dim);
      r /= samples_per_dim;
      const double t = samples_per_dim == 1 ? 0.0 : double(idx) / (samples_per_dim - 1);
      y[j] = lo_f[j] + t * (hi_f[j] - lo_f[j]);
    }
    for (Index f = 0; f < 2 * n; ++f) {
      nrm[f] = g.normal(f, y);
      ref[f] = g.reflection(f, y);
    }
    for (long code = 1; code < patterns; ++code) {
      long q = code;
      int count = 0, plus = 0, minus = 0;
      for (Index i = 0; i < n; ++i) {
        pat[i] = int(q % 3) - 1;
        q /= 3;
        if (pat[i] != 0) ++count;
        if (pat[i] > 0) ++plus;
        if (pat[i] < 0) ++minus;
      }
      if (count == 0) continue;
      // all players on the same side cannot happen since sum x~ = 0
      if (plus == n || minus == n) continue;
      Vector nbar = Vector::Zero(n + m), rbar = Vector::Zero(n + m);
      std::vector<Index> faces;
      for (Index i = 0; i < n; ++i) {
        if (pat[i] == 0) continue;
        const Index f = pat[i] > 0 ? i : n + i;
        faces.push_back(f);
        nbar += nrm[f] / double(count);
        rbar += ref[f] / double(count);
      }
      for (Index f : faces) {
        const double a = nbar.dot(ref[f]), b = rbar.dot(nrm[f]);
        if (a < out.normal_side || b < out.reflection_side) {
          if (std::min(a, b) < std::min(out.normal_side, out.reflection_side)) {
            out.argmin_y = y;
            out.argmin_pattern = pat;
          }
        }
        out.normal_side = std::min(out.normal_side, a);
        out.reflection_side = std::min(out.reflection_side, b);
      }
    }
  }
  out.a = std::min(out.normal_side, out.reflection_side);
  if (!(out.a > 0)) throw GeometryError("reflection directions fail the compatibility bound");
  return out;
}

// ---------------------------------------------------------------- params

double SchemeParams::push_cap() const { return delta > 0 ? delta : std::sqrt(dt); }

double SchemeParams::time_horizon(double discount) const {
  return horizon > 0 ? horizon : -std::log(1e-4) / discount;
}

int SchemeParams::steps(double discount) const {
  if (!(dt > 0)) throw DomainError("time step must be positive");
  return int(std::ceil(time_horizon(discount) / dt - 1e-9));
}

// ---------------------------------------------------------------- engine

PathEngine::PathEngine(const GeometryModel& g, const SchemeParams& p, const Deviation& dev)
    : g_(g), spec_(g.spec()), b_(g.boundary()), p_(p), dev_(dev) {
  n_ = spec_.players();
  m_ = spec_.resources();
  if (dev_.player >= n_) throw DimensionError("deviating player out of range");
  if (!(p_.dt > 0) || !(p_.boundary_tol > 0)) throw DomainError("scheme parameters must be positive");
  cap_ = p_.push_cap();
  corr_ = p_.monitoring_correction ? kMonitoringConstant * std::sqrt(double(n_) / double(n_ - 1)) * std::sqrt(p_.dt) : 0.0;
  coincident_ = same_rows(spec_.adjacency());
  xt_.resize(n_);
  acc_.resize(n_);
  thr_.resize(n_);
  thr_ne_.resize(n_);
  e_.resize(n_);
  e_ne_.resize(n_);
  active_.resize(n_);
  xi_p_ = Vector::Zero(n_);
  xi_m_ = Vector::Zero(n_);
  eta_ = Vector::Zero(2 * n_);
}

void PathEngine::refresh_thresholds() {
  acc_.noalias() = spec_.adjacency() * s_.y;
  for (Index k = 0; k < n_; ++k) {
    if (acc_[k] > 0) {
      thr_ne_[k] = b_.f_inverse(acc_[k]) - corr_;
      thr_[k] = thr_ne_[k] + (k == dev_.player ? dev_.shift : 0.0);
    } else {
      thr_ne_[k] = thr_[k] = kInf;
    }
  }
}

void PathEngine::update_relative() {
  const double sum = s_.x.sum();
  const double n = double(n_);
  for (Index k = 0; k < n_; ++k) xt_[k] = (n * s_.x[k] - sum) / (n - 1);
}

void PathEngine::reset(const JointState& s) {
  check_state(spec_, s);
  s_ = s;
  xi_p_.setZero();
  xi_m_.setZero();
  eta_.setZero();
  refresh_thresholds();
  update_relative();
  pushes_ = 0;
  top_face_ = -1;
  reflect();
}

void PathEngine::step(const double* dw) {
  for (Index k = 0; k < n_; ++k) s_.x[k] += dw[k];
  update_relative();
  pushes_ = 0;
  top_face_ = -1;
  const double tol = p_.boundary_tol;
  for (Index k = 0; k < n_; ++k)
    if (std::abs(xt_[k]) - thr_[k] > tol) {
      reflect();
      return;
    }
}

double PathEngine::exact_push(Index k) const {
  const double acc = acc_[k];
  const double a = std::abs(xt_[k]);
  const double off = thr_[k] - thr_ne_[k] - corr_;  // shift - corr
  auto phi = [&](double lam) { return a - lam - (b_.f_inverse(acc - lam) + off); };
  if (phi(acc) >= 0) return acc;
  double lo = 0, hi = acc;
  double lam = std::min(acc, (a - thr_[k]) / (1 - b_.f_inverse_prime(acc)));
  for (int it = 0; it < 100; ++it) {
    const double r = phi(lam);
    if (r == 0) break;
    if (r > 0)
      lo = lam;
    else
      hi = lam;
    double nl = lam + r / (1 - b_.f_inverse_prime(acc - lam));
    if (!(nl > lo && nl < hi)) nl = 0.5 * (lo + hi);
    const bool done = std::abs(nl - lam) <= 1e-15 * std::max(1.0, lam);
    lam = nl;
    if (done) break;
  }
  return lam;
}

void PathEngine::push(Index k, int side, double lam) {
  const double acc = acc_[k];
  lam = std::min(lam, acc);
  if (!(lam > 0)) return;
  if (acc - lam <= 1e-12 * acc) lam = acc;
  const double keep = (acc - lam) / acc;
  double w2 = 0;
  for (Index j = 0; j < m_; ++j) {
    if (spec_.adjacency()(k, j) == 0) continue;
    const double w = s_.y[j] / acc;
    w2 += w * w;
    s_.y[j] = std::max(0.0, s_.y[j] * keep);
  }
  s_.x[k] -= side * lam;
  const double len = lam * std::sqrt(1 + w2);
  if (side > 0) {
    xi_m_[k] += lam;
    eta_[k] += len;
  } else {
    xi_p_[k] += lam;
    eta_[n_ + k] += len;
  }
  acc_[k] -= lam;
}

void PathEngine::reflect() {
  const double tol = p_.boundary_tol;
  double biggest = 0;
  while (true) {
    for (Index k = 0; k < n_; ++k) {
      e_[k] = std::abs(xt_[k]) - thr_[k];
      e_ne_[k] = std::abs(xt_[k]) - thr_ne_[k];
      active_[k] = e_[k] >= -tol;
    }
    // a lazy deviator sitting in its own action region keeps the others waiting
    if (dev_.player >= 0 && !active_[dev_.player]) {
      const Index d = dev_.player;
      for (Index j = 0; j < n_; ++j) {
        if (j == d || !active_[j]) continue;
        if (e_ne_[d] > e_ne_[j] + tol || (std::abs(e_ne_[d] - e_ne_[j]) <= tol && d > j)) active_[j] = false;
      }
    }
    if (coincident_ && active_[0] && active_[1]) active_[0] = false;

    int count = 0;
    bool violated = false;
    double worst = 0;
    Index single = -1;
    for (Index k = 0; k < n_; ++k) {
      if (!active_[k]) continue;
      ++count;
      single = k;
      if (e_[k] > tol) violated = true;
      worst = std::max(worst, e_[k]);
    }
    if (!violated) return;
    if (++pushes_ > p_.max_pushes) throw SchemeError("too many pushes in one step; reduce delta or dt");

    if (count == 1) {
      const double lam = std::min(exact_push(single), cap_);
      const int side = xt_[single] >= 0 ? 1 : -1;
      if (lam > biggest) {
        biggest = lam;
        top_face_ = side > 0 ? single : n_ + single;
      }
      push(single, side, lam);
    } else {
      const double lam = std::min(worst, cap_) / count;
      for (Index k = 0; k < n_; ++k) {
        if (!active_[k]) continue;
        const int side = xt_[k] >= 0 ? 1 : -1;
        if (lam > biggest) {
          biggest = lam;
          top_face_ = side > 0 ? k : n_ + k;
        }
        push(k, side, lam);
      }
    }
    refresh_thresholds();
    update_relative();
  }
}

StepOutcome reflect_step(const GeometryModel& g, const JointState& s, const Vector& increment,
                         const SchemeParams& p, JointState& out, const Deviation& dev) {
  const GameSpec& spec = g.spec();
  check_state(spec, s);
  if (increment.size() != spec.players()) throw DimensionError("increment has wrong length");
  const Vector e = threshold_excess(spec, g.boundary(), s);
  for (Index k = 0; k < e.size(); ++k)
    if (dev.player != k && std::isfinite(e[k]) && e[k] > p.boundary_tol + p.push_cap())
      throw DomainError("state is not in the closure of the waiting region");
  PathEngine eng(g, p, dev);
  eng.reset(s);
  eng.step(increment.data());
  out = eng.state();
  StepOutcome r;
  r.xi_plus = eng.xi_plus();
  r.xi_minus = eng.xi_minus();
  r.eta = eng.eta();
  r.pushes = eng.last_pushes();
  r.top_face = eng.last_top_face();
  return r;
}

// ---------------------------------------------------------------- cascade

RankReport rank_diagnostic(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  check_state(spec, s);
  const Vector xt = relative_positions(s.x);
  const Vector acc = accessible_totals(spec, s.y);
  RankReport r;
  r.rank.resize(spec.players());
  for (Index k = 0; k < xt.size(); ++k) {
    if (!(acc[k] > 0))
      r.rank[k] = -kInf;
    else if (spec.variant() == Variant::Pooling)
      r.rank[k] = std::abs(xt[k]);
    else
      r.rank[k] = std::abs(xt[k]) - b.f_inverse(acc[k]);
  }
  for (Index k = 0; k < xt.size(); ++k)
    if (std::isfinite(r.rank[k]) && (r.argmax < 0 || r.rank[k] >= r.rank[r.argmax])) r.argmax = k;
  const RegionLabel lab = classify_region(spec, b, s);
  if (lab.kind == RegionLabel::Action) r.consistent = lab.player == r.argmax;
  return r;
}

CascadeResult jump_cascade(const GameSpec& spec, const BoundarySolution& b, const JointState& s) {
  check_state(spec, s);
  CascadeResult r;
  r.state = s;
  for (int it = 0; it < kMaxJumps; ++it) {
    const RegionLabel lab = classify_region(spec, b, r.state);
    r.distance = waiting_distance(spec, b, r.state);
    if (lab.kind == RegionLabel::Waiting || r.distance <= kSettleTol) return r;
    r.top_rank.push_back(rank_diagnostic(spec, b, r.state).argmax);
    r.jumps.push_back(apply_jump(spec, b, r.state, lab));
    r.iterations = it + 1;
  }
  r.distance = waiting_distance(spec, b, r.state);
  if (r.distance > kFinalTol)
    throw NumericError("jump cascade did not converge: distance " + std::to_string(r.distance) + " after " +
                       std::to_string(kMaxJumps) + " jumps");
  return r;
}

// ---------------------------------------------------------------- paths

Matrix brownian_increments(Index players, int steps, double dt, std::uint64_t seed, std::uint64_t path) {
  Philox eng(seed, path);
  boost::random::normal_distribution<double> nd;
  const double sd = std::sqrt(dt);
  Matrix w(players, steps);
  for (int t = 0; t < steps; ++t)
    for (Index k = 0; k < players; ++k) w(k, t) = sd * nd(eng);
  return w;
}

PathRecord simulate_path(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                         const JointState& start, const SchemeParams& p, std::uint64_t path) {
  return simulate_path(spec, b, g, start, p,
                       brownian_increments(spec.players(), p.steps(spec.discount()), p.dt, p.seed, path));
}

PathRecord simulate_path(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                         const JointState& start, const SchemeParams& p, const Matrix& increments) {
  check_state(spec, start);
  const Index n = spec.players();
  if (increments.rows() != n) throw DimensionError("increments need one row per player");
  const Index steps = increments.cols();

  PathRecord rec;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  rec.labels.reserve(steps + 1);
  rec.xi_plus = Matrix::Zero(steps + 1, n);
  rec.xi_minus = Matrix::Zero(steps + 1, n);
  rec.eta = Matrix::Zero(steps + 1, 2 * n);

  JointState s = start;
  Vector jp = Vector::Zero(n), jm = Vector::Zero(n);
  RegionLabel first;
  if (waiting_distance(spec, b, s) > p.boundary_tol) {
    const CascadeResult c = jump_cascade(spec, b, s);
    for (const JumpRecord& j : c.jumps) {
      rec.jumps.push_back({0.0, j});
      if (j.side > 0)
        jm[j.player] += j.size;
      else
        jp[j.player] += j.size;
    }
    if (!c.jumps.empty()) first = {RegionLabel::Action, c.jumps.front().player, c.jumps.front().side};
    s = c.state;
  }
  PathEngine eng(g, p);
  eng.reset(s);
  auto record = [&](double t, const RegionLabel& lab) {
    const Index row = Index(rec.times.size());
    rec.times.push_back(t);
    rec.states.push_back(eng.state());
    rec.labels.push_back(lab);
    rec.xi_plus.row(row) = (jp + eng.xi_plus()).transpose();
    rec.xi_minus.row(row) = (jm + eng.xi_minus()).transpose();
    rec.eta.row(row) = eng.eta().transpose();
  };
  record(0.0, first);
  for (Index t = 0; t < steps; ++t) {
    eng.step(increments.col(t).data());
    RegionLabel lab;
    if (eng.last_pushes() > 0) {
      const Index f = eng.last_top_face();
      lab = {RegionLabel::Action, f % n, f < n ? 1 : -1};
    }
    record(double(t + 1) * p.dt, lab);
  }
  return rec;
}

PathRecord two_player_explicit(const JointState& start, const Matrix& increments, const BoundarySolution& b,
                               double dt) {
  if (start.x.size() != 2 || start.y.size() != 1) throw DimensionError("explicit map needs two players, one resource");
  if (increments.rows() != 2) throw DimensionError("increments need two rows");
  if (b.players() != 2) throw ModelError("boundary solved for a different game");
  const Index steps = increments.cols();
  PathRecord rec;
  rec.xi_plus = Matrix::Zero(steps + 1, 2);
  rec.xi_minus = Matrix::Zero(steps + 1, 2);
  rec.eta = Matrix::Zero(steps + 1, 4);

  double x1 = start.x[0], x2 = start.x[1], y = start.y[0];
  double up = 0, down = 0;
  // lam solving d - lam = f^-1(y - lam)
  auto solve = [&](double d) {
    auto psi = [&](double lam) { return d - lam - b.f_inverse(y - lam); };
    if (psi(y) >= 0) return y;
    double lo = 0, hi = y;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (psi(mid) > 0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto settle = [&](double t) {
    for (int pass = 0; pass < 2 && y > 0; ++pass) {
      const double d = x1 - x2, g = b.f_inverse(y);
      double lam = 0;
      if (d > g) {
        lam = solve(d);
        x2 += lam;
        up += lam;
      } else if (-d > g) {
        lam = solve(-d);
        x2 -= lam;
        down += lam;
      } else {
        break;
      }
      y = y - lam <= 0 ? 0.0 : y - lam;
      if (t == 0 && lam > 0) {
        JumpRecord j;
        j.player = 1;
        j.side = d > 0 ? -1 : 1;
        j.size = lam;
        j.consumed = Vector::Constant(1, lam);
        rec.jumps.push_back({0.0, j});
      }
    }
  };
  auto record = [&](double t) {
    const Index row = Index(rec.times.size());
    rec.times.push_back(t);
    JointState s{Vector(2), Vector(1)};
    s.x << x1, x2;
    s.y << y;
    rec.states.push_back(s);
    rec.labels.push_back({});
    rec.xi_plus(row, 1) = up;
    rec.xi_minus(row, 1) = down;
  };
  settle(0.0);
  record(0.0);
  for (Index t = 0; t < steps; ++t) {
    x1 += increments(0, t);
    x2 += increments(1, t);
    const double up0 = up, down0 = down;
    settle(double(t + 1) * dt);
    record(double(t + 1) * dt);
    if (up > up0) rec.labels.back() = {RegionLabel::Action, 1, -1};
    if (down > down0) rec.labels.back() = {RegionLabel::Action, 1, 1};
  }
  return rec;
}

}  // namespace fuelgame
