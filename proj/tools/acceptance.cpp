// acceptance run: one PASS/FAIL line per criterion, details indented below
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../tests/oracles.hpp"
#include "fuelgame/montecarlo.hpp"

using namespace fuelgame;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3)));
};

void Verdict::note(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  details.emplace_back(buf);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Matrix chain_adjacency(Index n) {
  Matrix a = Matrix::Identity(n, n);
  for (Index i = 0; i + 1 < n; ++i) a(i, i + 1) = 1;
  return a;
}

// 1: boundary against closed forms and quadrature
Verdict boundary_reproduction() {
  Verdict v;
  double worst_x0 = 0, worst_f = 0, worst_a = 0, worst_t = 0;
  for (int n : {2, 3, 5})
    for (double a : {0.5, 1.0, 2.0}) {
      const auto t0 = Clock::now();
      const BoundarySolution b = BoundarySolution::solve(quadratic_cost(), n, a, 10.0);
      const double secs = seconds_since(t0);
      const double ex0 = std::abs(b.x0() - oracle::quad_x0(n, a));
      const FrontierTable& t = b.table();
      double ef = 0, ea = 0;
      for (std::size_t k = 0; k < t.x.size(); k += 7) {
        ef = std::max(ef, std::abs(t.f[k] - oracle::quad_f(t.x[k], n, a)));
        ea = std::max(ea, std::abs(b.a_coefficient(t.f[k]) - oracle::quad_a(t.x[k], n, a)));
      }
      const bool ok = ex0 <= 1e-10 && ef <= 1e-6 && ea <= 1e-8 && secs < 5;
      if (!ok) v.pass = false;
      v.note("N=%d alpha=%.1f: |dx0| %.2e  sup|df| %.2e  sup|dA| %.2e  solve %.2fs  %s", n, a, ex0, ef, ea, secs,
             ok ? "ok" : "out of tolerance");
      worst_x0 = std::max(worst_x0, ex0);
      worst_f = std::max(worst_f, ef);
      worst_a = std::max(worst_a, ea);
      worst_t = std::max(worst_t, secs);
    }
  v.summary = fmt("9 configs, worst x0 %.1e, f %.1e, A %.1e, solve %.2fs", worst_x0, worst_f, worst_a, worst_t);
  return v;
}

// 2: smooth fit on the faces, PDE in the interior
Verdict smooth_fit() {
  Verdict v;
  struct Case {
    std::string name;
    GameSpec spec;
  };
  std::vector<Case> cases;
  for (int n : {2, 3, 5})
    for (double a : {0.5, 1.0, 2.0})
      cases.push_back({fmt("pooling N=%g alpha=%.1f", n, a), GameSpec::pooling(n, a, quadratic_cost())});
  cases.push_back({"pooling N=3 logcosh", GameSpec::pooling(3, 1.0, logcosh_cost(0.1))});
  cases.push_back({"sharing N=3 chain", GameSpec::sharing(chain_adjacency(3), 1.0, quadratic_cost())});

  double worst_grad = 0, worst_d2 = 0, worst_pde = 0;
  for (const Case& c : cases) {
    const GameSpec& spec = c.spec;
    const Index n = spec.players(), m = spec.resources();
    const BoundarySolution b = BoundarySolution::solve(spec.cost(), n, spec.discount(), 8.0);
    double eg = 0, ed = 0, ep = 0;
    for (int k = 0; k < 20; ++k) {
      // player 0 on its upper face (even k) or lower face (odd k)
      JointState s{Vector::Zero(n), Vector::Constant(m, 0.25 * (k / 2 + 1) / double(m))};
      const double acc = total_accessible(spec, s.y, 0);
      const double g = b.f_inverse(acc);
      const double side = k % 2 == 0 ? 1.0 : -1.0;
      s.x[0] = side * g;
      const ValueQuery q{spec, b, s, 0};
      const QviReport r = qvi_residuals(q);
      eg = std::max(eg, std::abs(side > 0 ? r.grad_minus : r.grad_plus));
      Vector dir = Vector::Zero(n + m);
      dir[0] = 1;
      const auto d2 = one_sided_second_derivatives(q, dir, 1e-3);
      ed = std::max(ed, std::abs(d2[0] - d2[1]));
    }
    JointState s{Vector::Zero(n), Vector::Constant(m, 1.0)};
    const double g = b.f_inverse(total_accessible(spec, s.y, 0));
    for (int k = 0; k < 50; ++k) {
      s.x[0] = -0.9 * g + 1.8 * g * k / 49.0;
      ep = std::max(ep, std::abs(qvi_residuals(ValueQuery{spec, b, s, 0}).pde));
    }
    const bool ok = eg <= 1e-6 && ed <= 1e-4 && ep < 1e-6;
    if (!ok) v.pass = false;
    v.note("%s: active gradient %.2e  second derivative jump %.2e  pde %.2e  %s", c.name.c_str(), eg, ed, ep,
           ok ? "ok" : "out of tolerance");
    worst_grad = std::max(worst_grad, eg);
    worst_d2 = std::max(worst_d2, ed);
    worst_pde = std::max(worst_pde, ep);
  }
  v.summary = std::to_string(cases.size()) + " configs x 20 face samples + 50 interior points, worst gradient " +
              fmt("%.1e, second derivative %.1e, pde %.1e", worst_grad, worst_d2, worst_pde);
  return v;
}

// 3: reflected scheme against the explicit running-maximum map
Verdict srbm_consistency() {
  Verdict v;
  const auto t0 = Clock::now();
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 10.0);
  const GeometryModel g = build_geometry(spec, b);
  const JointState start{Vector::Zero(2), Vector::Constant(1, 2.0)};
  const double T = 5, dt_ref = 2.5e-4 / 16;
  const int n_ref = int(std::lround(T / dt_ref));
  const int n_paths = 100;
  const int agg[3] = {64, 32, 16};  // dt = 1e-3, 5e-4, 2.5e-4
  double mean[3] = {0, 0, 0};
  int within = 0;
  for (int path = 0; path < n_paths; ++path) {
    const Matrix inc = brownian_increments(2, n_ref, dt_ref, 20240601, path);
    const PathRecord ref = two_player_explicit(start, inc, b, dt_ref);
    for (int lev = 0; lev < 3; ++lev) {
      const int a = agg[lev];
      const int nc = n_ref / a;
      const double dt = dt_ref * a;
      Matrix ic(2, nc);
      for (int k = 0; k < nc; ++k) ic.col(k) = inc.middleCols(k * a, a).rowwise().sum();
      SchemeParams p;
      p.dt = dt;
      p.horizon = T;
      p.monitoring_correction = false;
      const PathRecord rec = simulate_path(spec, b, g, start, p, ic);
      double sup = 0;
      for (int k = 0; k <= nc; ++k) {
        const JointState& x = rec.states[k];
        const JointState& r = ref.states[std::size_t(k) * a];
        sup = std::max({sup, (x.x - r.x).cwiseAbs().maxCoeff(), std::abs(x.y[0] - r.y[0])});
      }
      mean[lev] += sup / n_paths;
      if (lev == 0 && sup <= 5 * std::sqrt(dt)) ++within;
    }
  }
  // least squares slope of log error against log dt
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int lev = 0; lev < 3; ++lev) {
    const double lx = std::log(dt_ref * agg[lev]), ly = std::log(mean[lev]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double order = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  const double secs = seconds_since(t0);
  v.pass = within >= 95 && order >= 0.4 && secs < 120;
  v.note("mean sup distance: dt 1e-3 %.3e, 5e-4 %.3e, 2.5e-4 %.3e (reference dt %.3e)", mean[0], mean[1], mean[2],
         dt_ref);
  v.summary = fmt("%g/100 paths within 5 sqrt(dt), order %.3f, %.1fs", within, order, secs);
  return v;
}

struct GameCase {
  std::string name;
  GameSpec spec;
};

std::vector<GameCase> value_cases() {
  std::vector<GameCase> out;
  for (int n : {2, 3}) {
    out.push_back({fmt("pooling N=%g", n), GameSpec::pooling(n, 1.0, quadratic_cost())});
    out.push_back({fmt("dividing N=%g", n), GameSpec::dividing(n, 1.0, quadratic_cost())});
    out.push_back({fmt("sharing N=%g chain", n), GameSpec::sharing(chain_adjacency(n), 1.0, quadratic_cost())});
  }
  return out;
}

// random state with every |x~^i| below frac of its threshold
JointState interior_state(const GameSpec& spec, const BoundarySolution& b, std::mt19937_64& rng, double frac) {
  const Index n = spec.players(), m = spec.resources();
  std::uniform_real_distribution<double> uy(0.2, 2.0), ux(-1.0, 1.0);
  for (;;) {
    JointState s{Vector(n), Vector(m)};
    for (Index k = 0; k < m; ++k) s.y[k] = uy(rng);
    for (Index i = 0; i < n; ++i) s.x[i] = ux(rng);
    const Vector xt = relative_positions(s.x);
    const Vector acc = accessible_totals(spec, s.y);
    bool ok = true;
    for (Index i = 0; i < n; ++i) ok = ok && std::abs(xt[i]) < frac * b.f_inverse(acc[i]);
    if (ok) return s;
  }
}

// 4: Monte Carlo costs against the analytic values
Verdict value_verification(long n_paths) {
  Verdict v;
  const auto t0 = Clock::now();
  SchemeParams p;
  p.dt = 1e-3;
  p.seed = 20240601;
  p.monitoring_correction = true;
  int total = 0, passed = 0;
  double worst = 0;
  for (const GameCase& c : value_cases()) {
    const BoundarySolution b = BoundarySolution::solve(c.spec.cost(), c.spec.players(), 1.0, 10.0);
    const GeometryModel g = build_geometry(c.spec, b);
    std::mt19937_64 rng(11);
    int cell_pass = 0, cell_total = 0;
    double cell_worst = 0;
    for (int k = 0; k < 10; ++k) {
      const JointState s = interior_state(c.spec, b, rng, 0.8);
      const auto reps = estimate_values(c.spec, b, g, s, p, n_paths);
      for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        const bool ok = std::abs(r.z_score) <= 3;
        ++cell_total;
        cell_pass += ok;
        cell_worst = std::max(cell_worst, std::abs(r.z_score));
        if (!ok)
          v.note("%s state %d player %zu: mc %.5f +- %.5f, analytic %.5f, z %.2f", c.name.c_str(), k, i + 1, r.mean,
                 r.std_error, r.analytic, r.z_score);
      }
    }
    v.note("%s: %d/%d within |z| <= 3, worst |z| %.2f", c.name.c_str(), cell_pass, cell_total, cell_worst);
    total += cell_total;
    passed += cell_pass;
    worst = std::max(worst, cell_worst);
  }
  const double secs = seconds_since(t0);
  v.pass = passed == total && secs < 600;
  v.summary = fmt("%g/%g player values within |z| <= 3, worst |z| %.2f, %.0fs", passed, total, worst, secs) +
              fmt(" (%g paths each)", double(n_paths));
  return v;
}

// 5: unilateral threshold shifts never beat the equilibrium cost
Verdict deviation_suite(long n_paths) {
  Verdict v;
  SchemeParams p;
  p.dt = 1e-3;
  p.seed = 7;
  p.monitoring_correction = true;
  std::vector<Perturbation> grid;
  for (double e : {-0.3, -0.1, -0.05, 0.05, 0.1, 0.3}) grid.push_back({Perturbation::Shift, e});
  grid.push_back({Perturbation::RoundTrip, 0.1});

  struct Case {
    std::string name;
    GameSpec spec;
    JointState start;
  };
  auto vec = [](std::initializer_list<double> l) {
    Vector r(Index(l.size()));
    Index k = 0;
    for (double d : l) r[k++] = d;
    return r;
  };
  const std::vector<Case> cases = {
      {"pooling N=2", GameSpec::pooling(2, 1.0, quadratic_cost()), {vec({0.3, 0}), vec({1})}},
      {"pooling N=3", GameSpec::pooling(3, 1.0, quadratic_cost()), {vec({0.2, -0.1, 0}), vec({1.5})}},
      {"dividing N=2", GameSpec::dividing(2, 1.0, quadratic_cost()), {vec({0.2, 0}), vec({1, 0.5})}},
      {"sharing N=3 chain", GameSpec::sharing(chain_adjacency(3), 1.0, quadratic_cost()),
       {vec({0.2, -0.1, 0}), vec({1, 2, 0.5})}},
  };
  int shifts = 0, shifts_ok = 0, extra = 0, extra_ok = 0, skipped = 0;
  for (const Case& c : cases) {
    const BoundarySolution b = BoundarySolution::solve(c.spec.cost(), c.spec.players(), 1.0, 10.0);
    for (Index i = 0; i < c.spec.players(); ++i) {
      const auto rows = deviation_test(c.spec, b, c.start, p, i, grid, n_paths);
      for (const DeviationRow& r : rows) {
        const bool shift = r.perturbation.kind == Perturbation::Shift;
        if (!r.admissible) {
          ++skipped;
          v.note("%s player %ld %s: inadmissible (%s)", c.name.c_str(), long(i + 1),
                 to_string(r.perturbation).c_str(), r.reason.c_str());
          continue;
        }
        (shift ? shifts : extra)++;
        (shift ? shifts_ok : extra_ok) += r.pass;
        if (!r.pass)
          v.note("%s player %ld %s: J_dev %.5f < J_NE %.5f - 3 x %.5f", c.name.c_str(), long(i + 1),
                 to_string(r.perturbation).c_str(), r.j_dev, r.j_ne, r.se_combined);
      }
    }
  }
  v.pass = shifts_ok == shifts && extra_ok == extra && shifts >= 60;
  v.summary = fmt("%g/%g threshold shifts and %g/%g round trips hold", shifts_ok, shifts, extra_ok, extra) +
              fmt(", %g inadmissible, %g paths per run", skipped, double(n_paths));
  return v;
}

// 6: pooled <= shared <= divided, equality exactly where the network degenerates
Verdict ordering() {
  Verdict v;
  const Index n = 3;
  const BoundarySolution b = BoundarySolution::solve(quadratic_cost(), n, 1.0, 10.0);
  Matrix mixed = Matrix::Identity(n, n);
  mixed(0, 1) = mixed(0, 2) = mixed(2, 0) = 1;
  const std::vector<std::pair<std::string, Matrix>> nets = {
      {"chain", chain_adjacency(n)}, {"mixed", mixed}, {"all-ones", Matrix::Ones(n, n)}, {"diagonal", Matrix::Identity(n, n)}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uy(0.1, 3.0), ux(-0.6, 0.6);
  int states = 0, order_fail = 0, eq_fail = 0, strict = 0, equal = 0;
  while (states < 100) {
    Vector x(n), y(n);
    for (Index i = 0; i < n; ++i) {
      x[i] = ux(rng);
      y[i] = uy(rng);
    }
    // common waiting: every game waits, the pooled thresholds are the tightest
    const Vector xt = relative_positions(x);
    if ((xt.array().abs() >= b.f_inverse(y.sum())).any()) continue;
    ++states;
    for (const auto& [name, a] : nets) {
      const GameSpec s = GameSpec::sharing(a, 1.0, quadratic_cost());
      const GameComparison c = compare_games(s, b, x, y, 1e-12);
      if (!c.ordered) {
        ++order_fail;
        v.note("%s state %d: ordering violated", name.c_str(), states);
      }
      for (Index i = 0; i < n; ++i) {
        const bool full = (a.row(i).array() != 0).all();
        const bool own = (a.row(i).array() != 0).count() == 1;
        if (c.pooled_eq_shared[i] != full || c.shared_eq_divided[i] != own) {
          ++eq_fail;
          v.note("%s state %d player %ld: equality pattern (%d,%d) expected (%d,%d)", name.c_str(), states,
                 long(i + 1), int(c.pooled_eq_shared[i]), int(c.shared_eq_divided[i]), int(full), int(own));
        }
        (full || own ? equal : strict)++;
      }
    }
  }
  v.pass = order_fail == 0 && eq_fail == 0;
  v.summary = fmt("100 states x 4 networks: %g ordering violations, %g equality mismatches", order_fail, eq_fail) +
              fmt(" (%g strict, %g degenerate player rows)", strict, equal);
  return v;
}

// 7: exterior starts settle through single-player jumps in rank order
Verdict cascade_termination() {
  Verdict v;
  const Index n = 3;
  const BoundarySolution b = BoundarySolution::solve(quadratic_cost(), n, 1.0, 12.0);
  const std::vector<GameCase> cases = {
      {"pooling", GameSpec::pooling(n, 1.0, quadratic_cost())},
      {"dividing", GameSpec::dividing(n, 1.0, quadratic_cost())},
      {"sharing chain", GameSpec::sharing(chain_adjacency(n), 1.0, quadratic_cost())},
  };
  int bad_total = 0;
  for (const GameCase& c : cases) {
    const GameSpec& spec = c.spec;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ux(-4, 4), uy(0, 3);
    int starts = 0, bad = 0, max_it = 0;
    double max_dist = 0;
    while (starts < 1000) {
      JointState s{Vector(n), Vector(spec.resources())};
      for (Index i = 0; i < n; ++i) s.x[i] = ux(rng);
      for (Index k = 0; k < s.y.size(); ++k) s.y[k] = uy(rng);
      if (waiting_distance(spec, b, s) <= 0) continue;
      ++starts;
      std::string why;
      try {
        const CascadeResult r = jump_cascade(spec, b, s);
        max_it = std::max(max_it, r.iterations);
        max_dist = std::max(max_dist, r.distance);
        if (r.iterations > 1000 || r.distance > 1e-8) why = "did not settle";
        // replay jump by jump
        JointState t = s;
        for (std::size_t k = 0; k < r.jumps.size() && why.empty(); ++k) {
          const RegionLabel lab = classify_region(spec, b, t);
          const RankReport rank = rank_diagnostic(spec, b, t);
          if (lab.kind != RegionLabel::Action || lab.player != r.jumps[k].player) why = "jump order differs";
          if (rank.argmax != r.jumps[k].player || r.top_rank[k] != r.jumps[k].player) why = "rank argmax differs";
          const JointState before = t;
          apply_jump(spec, b, t, lab);
          if ((t.y.array() > before.y.array()).any()) why = "resources increased";
          for (Index i = 0; i < n; ++i)
            if (i != lab.player && t.x[i] != before.x[i]) why = "more than one player moved";
        }
        if (why.empty() && ((t.x - r.state.x).cwiseAbs().maxCoeff() > 1e-12 ||
                            (t.y - r.state.y).cwiseAbs().maxCoeff() > 1e-12))
          why = "replay does not reproduce the cascade";
      } catch (const std::exception& e) {
        why = e.what();
      }
      if (!why.empty()) {
        if (++bad <= 5) v.note("%s start %d: %s", c.name.c_str(), starts, why.c_str());
      }
    }
    v.note("%s: %d/1000 starts clean, most iterations %d, largest residual distance %.1e", c.name.c_str(),
           1000 - bad, max_it, max_dist);
    bad_total += bad;
  }
  v.pass = bad_total == 0;
  v.summary = fmt("3 variants x 1000 exterior starts, %g failures", bad_total);
  return v;
}

// 8: reflection compatibility constant on [0.1, 10]^M
Verdict reflection_compatibility() {
  Verdict v;
  std::vector<GameCase> cases;
  for (int n : {2, 3, 5}) cases.push_back({fmt("pooling N=%g", n), GameSpec::pooling(n, 1.0, quadratic_cost())});
  for (int n : {2, 3}) cases.push_back({fmt("dividing N=%g", n), GameSpec::dividing(n, 1.0, quadratic_cost())});
  for (int n : {2, 3})
    cases.push_back({fmt("sharing N=%g chain", n), GameSpec::sharing(chain_adjacency(n), 1.0, quadratic_cost())});
  cases.push_back({"sharing N=3 all-ones", GameSpec::sharing(Matrix::Ones(3, 3), 1.0, quadratic_cost())});
  double worst = 1e300;
  for (const GameCase& c : cases) {
    const Index m = c.spec.resources();
    const BoundarySolution b = BoundarySolution::solve(c.spec.cost(), c.spec.players(), 1.0, 10.0 * m + 1);
    const GeometryModel g = build_geometry(c.spec, b);
    const ReflectionBound r =
        check_reflection_compatibility(g, Vector::Constant(m, 0.1), Vector::Constant(m, 10.0), m > 2 ? 5 : 9);
    const bool ok = r.a >= 0.01;
    if (!ok) v.pass = false;
    v.note("%s: a = %.4f (normal side %.4f, reflection side %.4f)  %s", c.name.c_str(), r.a, r.normal_side,
           r.reflection_side, ok ? "ok" : "below 0.01");
    worst = std::min(worst, r.a);
  }
  v.summary = std::to_string(cases.size()) + fmt(" specs, smallest a = %.4f", worst);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuelgame acceptance checks"};
  std::vector<int> only;
  long paths = 10000, dev_paths = 4000;
  app.add_option("criteria", only, "run only these criteria (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--paths", paths, "paths per value estimate")->check(CLI::Range(2L, 1000000000L));
  app.add_option("--deviation-paths", dev_paths, "paths per deviation run")->check(CLI::Range(2L, 1000000000L));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> all = {
      {"boundary reproduction", boundary_reproduction},
      {"smooth fit and QVI", smooth_fit},
      {"reflected scheme consistency", srbm_consistency},
      {"value verification", [&] { return value_verification(paths); }},
      {"deviation suite", [&] { return deviation_suite(dev_paths); }},
      {"ordering", ordering},
      {"cascade termination", cascade_termination},
      {"reflection compatibility", reflection_compatibility},
  };
  const std::set<int> pick(only.begin(), only.end());
  int failed = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = int(k) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    Verdict v;
    try {
      v = all[k].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("error: ") + e.what();
    }
    failed += !v.pass;
    std::printf("criterion %d %s: %s  %s\n", id, all[k].first.c_str(), v.pass ? "PASS" : "FAIL", v.summary.c_str());
    for (const std::string& d : v.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
