#include "fuelgame/montecarlo.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>

#include <boost/random/normal_distribution.hpp>

namespace fuelgame {

void RunningStats::add(double v) {
  ++n;
  const double d = v - mean;
  mean += d / double(n);
  m2 += d * (v - mean);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double tot = double(n + o.n);
  const double d = o.mean - mean;
  mean += d * double(o.n) / tot;
  m2 += o.m2 + d * d * double(n) * double(o.n) / tot;
  n += o.n;
}

RunningStats summary_stats(const std::vector<RunningStats>& records) {
  // pairwise tree keeps rounding symmetric
  std::vector<RunningStats> level = records;
  if (level.empty()) return {};
  while (level.size() > 1) {
    std::vector<RunningStats> next;
    for (std::size_t k = 0; k + 1 < level.size(); k += 2) {
      RunningStats s = level[k];
      s.merge(level[k + 1]);
      next.push_back(s);
    }
    if (level.size() % 2) next.push_back(level.back());
    level.swap(next);
  }
  return level.front();
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string summary_header() { return "name,n,mean,variance,std_error"; }

std::string summary_row(const std::string& name, const RunningStats& s) {
  return name + "," + std::to_string(s.n) + "," + fmt(s.mean) + "," + fmt(s.variance()) + "," + fmt(s.std_error());
}

int worker_threads() {
  if (const char* env = std::getenv("FUELGAME_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

PathCosts simulate_costs(const GeometryModel& g, const JointState& start, const SchemeParams& p, long n_paths,
                         const Deviation& dev) {
  const GameSpec& spec = g.spec();
  const BoundarySolution& b = g.boundary();
  check_state(spec, start);
  if (n_paths < 1) throw DomainError("need at least one path");
  const Index n = spec.players();
  const double alpha = spec.discount();
  const int steps = p.steps(alpha);
  const double dt = p.dt;

  // exact exponential weights for a linear-in-time integrand on one step
  const double i0 = -std::expm1(-alpha * dt) / alpha;
  const double i1 = (-std::expm1(-alpha * dt) - alpha * dt * std::exp(-alpha * dt)) / (alpha * alpha);
  const double wa = i0 - i1 / dt, wb = i1 / dt;
  const double decay = std::exp(-alpha * dt);
  const double scale = double(n - 1) / double(n);

  JointState s0 = start;
  if (dev.player < 0 && waiting_distance(spec, b, s0) > p.boundary_tol) s0 = jump_cascade(spec, b, s0).state;

  PathCosts out;
  out.cost = Matrix::Zero(n_paths, n);
  out.terminal_h = Matrix::Zero(n_paths, n);
  out.horizon = steps * dt;
  const int threads = std::max(1, std::min<int>(worker_threads(), int(n_paths)));
  std::vector<double> sup(threads, 0.0);
  std::vector<std::exception_ptr> errors(threads);

  auto work = [&](int tid) {
    try {
      PathEngine eng(g, p, dev);
      boost::random::normal_distribution<double> nd;
      const double sd = std::sqrt(dt);
      Vector dw(n), h0(n), h1(n), acc(n);
      double top = 0;
      for (long path = tid; path < n_paths; path += threads) {
        Philox rng(p.seed, std::uint64_t(path));
        eng.reset(s0);
        for (Index k = 0; k < n; ++k) h0[k] = spec.cost()(scale * eng.relative()[k]);
        acc.setZero();
        double disc = 1;
        for (int t = 0; t < steps; ++t) {
          for (Index k = 0; k < n; ++k) dw[k] = sd * nd(rng);
          eng.step(dw.data());
          for (Index k = 0; k < n; ++k) {
            h1[k] = spec.cost()(scale * eng.relative()[k]);
            acc[k] += disc * (wa * h0[k] + wb * h1[k]);
            top = std::max(top, h1[k]);
          }
          h0.swap(h1);
          disc *= decay;
        }
        out.cost.row(path) = acc.transpose();
        out.terminal_h.row(path) = h0.transpose();
      }
      sup[tid] = top;
    } catch (...) {
      errors[tid] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (double v : sup) out.sup_h = std::max(out.sup_h, v);
  return out;
}

namespace {

RunningStats column_stats(const Matrix& m, Index col) {
  RunningStats s;
  for (Index r = 0; r < m.rows(); ++r) s.add(m(r, col));
  return s;
}

}  // namespace

std::vector<EstimateReport> estimate_values(const GameSpec& spec, const BoundarySolution& b,
                                            const GeometryModel& g, const JointState& start,
                                            const SchemeParams& p, long n_paths) {
  if (n_paths < 2) throw DomainError("need at least two paths");
  const PathCosts pc = simulate_costs(g, start, p, n_paths);
  const Vector v = value_game(spec, b, start);
  std::vector<EstimateReport> out;
  for (Index i = 0; i < spec.players(); ++i) {
    const RunningStats s = column_stats(pc.cost, i);
    EstimateReport r;
    r.mean = s.mean;
    r.std_error = s.std_error();
    r.n_paths = n_paths;
    // tail after T: pushes only move toward the centre, so h grows at most like free motion
    const double a = spec.discount();
    const double var = double(spec.players() - 1) / double(spec.players());
    r.horizon_bias_bound =
        std::exp(-a * pc.horizon) * (pc.terminal_h.col(i).mean() / a + 0.5 * spec.cost().K * var / (a * a));
    r.analytic = v[i];
    r.z_score = r.std_error > 0 ? (r.mean - r.analytic) / r.std_error : (r.mean == r.analytic ? 0.0 : INFINITY);
    out.push_back(r);
  }
  return out;
}

EstimateReport estimate_value(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                              const JointState& start, const SchemeParams& p, Index player, long n_paths) {
  if (player < 0 || player >= spec.players()) throw DimensionError("player index out of range");
  return estimate_values(spec, b, g, start, p, n_paths)[player];
}

std::string to_string(const Perturbation& q) {
  std::string k = q.kind == Perturbation::Shift ? "shift" : "roundtrip";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, q.size);
  return k + ":" + std::string(buf, r.ptr);
}

std::vector<DeviationRow> deviation_test(const GameSpec& spec, const BoundarySolution& b, const JointState& start,
                                         const SchemeParams& p, Index player,
                                         const std::vector<Perturbation>& perturbations, long n_paths) {
  check_state(spec, start);
  if (player < 0 || player >= spec.players()) throw DimensionError("player index out of range");
  if (n_paths < 2) throw DomainError("need at least two paths");
  if (waiting_distance(spec, b, start) > 0) throw DomainError("deviation tests start inside the waiting region");
  const GeometryModel g = build_geometry(spec, b);
  const PathCosts ne = simulate_costs(g, start, p, n_paths);
  const RunningStats sne = column_stats(ne.cost, player);
  const double acc = total_accessible(spec, start.y, player);

  std::vector<DeviationRow> rows;
  for (const Perturbation& q : perturbations) {
    DeviationRow row;
    row.perturbation = q;
    row.j_ne = sne.mean;
    row.se_ne = sne.std_error();
    PathCosts dv;
    if (q.kind == Perturbation::Shift) {
      if (acc <= 0) {
        row.admissible = false;
        row.reason = "player has no accessible resource";
      } else if (b.f_inverse(acc) + q.size <= 0) {
        row.admissible = false;
        row.reason = "shifted threshold is not positive";
      }
      if (row.admissible) dv = simulate_costs(g, start, p, n_paths, Deviation{player, q.size});
    } else {
      if (!(q.size >= 0) || 2 * q.size > acc) {
        row.admissible = false;
        row.reason = "round trip overdraws the accessible resource";
      } else {
        // push out and back at t = 0: position unchanged, fuel spent twice
        JointState s = start;
        const double keep = (acc - 2 * q.size) / acc;
        for (Index k = 0; k < s.y.size(); ++k)
          if (spec.adjacency()(player, k) != 0) s.y[k] *= keep;
        dv = simulate_costs(g, s, p, n_paths);
      }
    }
    if (row.admissible) {
      const RunningStats sd = column_stats(dv.cost, player);
      RunningStats diff;
      for (Index r = 0; r < dv.cost.rows(); ++r) diff.add(dv.cost(r, player) - ne.cost(r, player));
      row.j_dev = sd.mean;
      row.se_dev = sd.std_error();
      row.se_combined = std::hypot(row.se_dev, row.se_ne);
      row.se_paired = diff.std_error();
      row.pass = row.j_dev >= row.j_ne - 3 * row.se_combined;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fuelgame
