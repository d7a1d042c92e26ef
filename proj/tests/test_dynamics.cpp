#include <doctest.h>

#include <random>

#include "fuelgame/dynamics.hpp"
#include "fuelgame/value.hpp"

using namespace fuelgame;

TEST_CASE("philox known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) == A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  Philox a(5, 1), b(5, 1), c(5, 2);
  const auto va = a(), vb = b(), vc = c();
  CHECK(va == vb);
  CHECK(va != vc);
}

TEST_CASE("brownian increments are reproducible and scaled") {
  const Matrix w1 = brownian_increments(3, 20000, 1e-3, 9, 4);
  const Matrix w2 = brownian_increments(3, 20000, 1e-3, 9, 4);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() == 0.0);
  const double var = w1.array().square().mean() / 1e-3;
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  // a shorter run is a prefix of a longer one
  const Matrix w3 = brownian_increments(3, 100, 1e-3, 9, 4);
  CHECK((w3 - w1.leftCols(100)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("geometry normals and reflections") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = 1;
  const GameSpec spec = GameSpec::sharing(a, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 3, 1.0, 12.0);
  const GeometryModel g = build_geometry(spec, b);
  Vector y(3);
  y << 1, 2, 0.5;
  for (Index f = 0; f < g.faces(); ++f) {
    CHECK(g.normal(f, y).norm() == doctest::Approx(1.0));
    CHECK(g.reflection(f, y).norm() == doctest::Approx(1.0));
    CHECK(g.normal(f, y).dot(g.reflection(f, y)) > 0);
  }
  const ReflectionBound rb = check_reflection_compatibility(g, Vector::Constant(3, 0.1), Vector::Constant(3, 5.0), 3);
  CHECK(rb.a > 0.01);
  CHECK(rb.a == std::min(rb.normal_side, rb.reflection_side));
}

TEST_CASE("simulated paths stay in the domain and burn fuel monotonically") {
  for (int n : {2, 3}) {
    const GameSpec spec = GameSpec::pooling(n, 1.0, quadratic_cost());
    const BoundarySolution b = BoundarySolution::solve(spec.cost(), n, 1.0, 6.0);
    const GeometryModel g = build_geometry(spec, b);
    SchemeParams p;
    p.horizon = 3;
    JointState s{Vector::Zero(n), Vector::Constant(1, 0.8)};
    const PathRecord r = simulate_path(spec, b, g, s, p, 3);
    CHECK(r.states.size() == r.times.size());
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      CHECK(waiting_distance(spec, b, r.states[k]) < 1e-8);
      if (k) {
        CHECK(r.states[k].y[0] <= r.states[k - 1].y[0]);
        CHECK((r.xi_plus.row(Index(k)) - r.xi_plus.row(Index(k - 1))).minCoeff() >= 0);
      }
    }
    // fuel balance
    const double burnt = r.xi_plus.bottomRows(1).sum() + r.xi_minus.bottomRows(1).sum();
    CHECK(burnt == doctest::Approx(0.8 - r.states.back().y[0]).epsilon(1e-9));
  }
}

TEST_CASE("explicit two-player map agrees with the reflection scheme") {
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 6.0);
  const GeometryModel g = build_geometry(spec, b);
  SchemeParams p;
  p.horizon = 5;
  const JointState s{Vector::Zero(2), Vector::Constant(1, 1.0)};
  const Matrix w = brownian_increments(2, p.steps(1.0), p.dt, 11, 0);
  const PathRecord a = simulate_path(spec, b, g, s, p, w);
  const PathRecord e = two_player_explicit(s, w, b, p.dt);
  double sup = 0;
  for (std::size_t k = 0; k < a.states.size(); ++k)
    sup = std::max(sup, (a.states[k].x - e.states[k].x).cwiseAbs().maxCoeff());
  CHECK(sup <= 5 * std::sqrt(p.dt));
}

TEST_CASE("jump cascade from random exterior starts") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = a(2, 0) = 1;
  const GameSpec spec = GameSpec::sharing(a, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 3, 1.0, 10.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-4, 4), uy(0, 3);
  int exterior = 0;
  for (int k = 0; k < 200; ++k) {
    JointState s{Vector(3), Vector(3)};
    for (int i = 0; i < 3; ++i) {
      s.x[i] = ux(rng);
      s.y[i] = uy(rng);
    }
    if (waiting_distance(spec, b, s) <= 0) continue;
    ++exterior;
    const CascadeResult r = jump_cascade(spec, b, s);
    CHECK(r.distance <= 1e-8);
    CHECK(r.iterations == int(r.jumps.size()));
    CHECK((r.state.y.array() <= s.y.array() + 1e-15).all());
    for (std::size_t j = 0; j < r.jumps.size(); ++j) CHECK(r.top_rank[j] == r.jumps[j].player);
  }
  CHECK(exterior > 50);
}

TEST_CASE("rank diagnostic") {
  const GameSpec spec = GameSpec::pooling(3, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 3, 1.0, 5.0);
  JointState s{Vector::Zero(3), Vector::Ones(1)};
  s.x << -3, 0.2, 0.1;
  const RankReport r = rank_diagnostic(spec, b, s);
  CHECK(r.argmax == 0);
  CHECK(r.consistent);
}

TEST_CASE("scheme validation") {
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 5.0);
  const GeometryModel g = build_geometry(spec, b);
  SchemeParams p;
  p.dt = -1;
  CHECK_THROWS(PathEngine(g, p));
  SchemeParams q;
  JointState far{Vector::Zero(2), Vector::Ones(1)}, out;
  far.x[0] = 5;
  CHECK_THROWS_AS(reflect_step(g, far, Vector::Zero(2), q, out), DomainError);
  CHECK_THROWS_AS(PathEngine(g, q, Deviation{4, 0.1}), DimensionError);
}
