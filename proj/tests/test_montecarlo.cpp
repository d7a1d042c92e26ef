#include <doctest.h>

#include <cstdlib>
#include <random>

#include "fuelgame/montecarlo.hpp"
#include "fuelgame/value.hpp"

using namespace fuelgame;

TEST_CASE("running stats merge") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(3, 2);
  std::vector<double> v(1000);
  for (double& x : v) x = nd(rng);
  RunningStats serial;
  for (double x : v) serial.add(x);
  std::vector<RunningStats> shards(10);
  for (std::size_t k = 0; k < v.size(); ++k) shards[k % 10].add(v[k]);
  const RunningStats merged = summary_stats(shards);
  CHECK(merged.n == serial.n);
  CHECK(std::abs(merged.mean - serial.mean) < 1e-12);
  CHECK(std::abs(merged.variance() - serial.variance()) < 1e-12);

  RunningStats a = shards[0], b = shards[1];
  RunningStats ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab.mean == doctest::Approx(ba.mean).epsilon(1e-15));
  CHECK(ab.m2 == doctest::Approx(ba.m2).epsilon(1e-14));

  const RunningStats one = summary_stats({shards[3]});
  CHECK(one.n == shards[3].n);
  CHECK(one.mean == shards[3].mean);
  CHECK(summary_row("x", one).rfind("x,", 0) == 0);
}

TEST_CASE("pure Brownian start matches the constant term") {
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 5.0);
  const GeometryModel g = build_geometry(spec, b);
  SchemeParams p;
  p.seed = 42;
  const JointState s{Vector::Zero(2), Vector::Zero(1)};
  const EstimateReport r = estimate_value(spec, b, g, s, p, 0, 2000);
  CHECK(r.analytic == doctest::Approx(0.5));
  CHECK(std::abs(r.z_score) <= 3);
  CHECK(r.horizon_bias_bound < 0.01 * r.analytic);
}

TEST_CASE("zero cost gives exactly zero") {
  CostFunction zero{"zero", [](double) { return Jet{0, 0, 0, 0}; }, 0, 0, {}};
  const GameSpec spec(Matrix::Ones(2, 1), 1.0, zero, Variant::Pooling);
  const BoundarySolution b = BoundarySolution::solve(quadratic_cost(), 2, 1.0, 5.0);
  const GeometryModel g(spec, b);
  SchemeParams p;
  p.horizon = 1;
  const PathCosts pc = simulate_costs(g, JointState{Vector::Zero(2), Vector::Ones(1)}, p, 5);
  CHECK(pc.cost.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("results do not depend on the thread count") {
  const GameSpec spec = GameSpec::pooling(3, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 3, 1.0, 5.0);
  const GeometryModel g = build_geometry(spec, b);
  SchemeParams p;
  p.horizon = 1;
  const JointState s{Vector::Zero(3), Vector::Ones(1)};
  setenv("FUELGAME_THREADS", "1", 1);
  const PathCosts one = simulate_costs(g, s, p, 9);
  setenv("FUELGAME_THREADS", "4", 1);
  const PathCosts four = simulate_costs(g, s, p, 9);
  unsetenv("FUELGAME_THREADS");
  CHECK((one.cost - four.cost).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("standard error shrinks like one over root n") {
  const GameSpec spec = GameSpec::pooling(2, 2.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 2.0, 5.0);
  const GeometryModel g = build_geometry(spec, b);
  SchemeParams p;
  p.dt = 4e-3;
  const JointState s{Vector::Zero(2), Vector::Constant(1, 0.5)};
  const double se1 = estimate_value(spec, b, g, s, p, 0, 800).std_error;
  const double se2 = estimate_value(spec, b, g, s, p, 0, 1600).std_error;
  CHECK(se2 / se1 == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("deviation rows") {
  const GameSpec spec = GameSpec::pooling(2, 2.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 2.0, 5.0);
  SchemeParams p;
  p.dt = 2e-3;
  const JointState s{Vector::Zero(2), Vector::Constant(1, 0.5)};
  const std::vector<Perturbation> grid{{Perturbation::Shift, 0.0},
                                       {Perturbation::Shift, -0.3},
                                       {Perturbation::Shift, -5.0},
                                       {Perturbation::RoundTrip, 0.1},
                                       {Perturbation::RoundTrip, 1.0}};
  const auto rows = deviation_test(spec, b, s, p, 1, grid, 400);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].j_dev == rows[0].j_ne);  // shared noise, same strategy
  CHECK(rows[1].admissible);
  CHECK(rows[1].pass);
  CHECK_FALSE(rows[2].admissible);
  CHECK(rows[3].admissible);
  CHECK(rows[3].j_dev > rows[3].j_ne);  // burning fuel for nothing costs
  CHECK_FALSE(rows[4].admissible);
  CHECK(rows[4].reason.find("overdraws") != std::string::npos);
  CHECK(to_string(grid[1]) == "shift:-0.3");

  JointState out{Vector::Zero(2), Vector::Constant(1, 0.5)};
  out.x[0] = 4;
  CHECK_THROWS_AS(deviation_test(spec, b, out, p, 0, grid, 10), DomainError);
}
