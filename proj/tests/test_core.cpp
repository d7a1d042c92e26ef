#include <doctest.h>

#include "fuelgame/boundary.hpp"
#include "fuelgame/core.hpp"

using namespace fuelgame;

TEST_CASE("relative positions") {
  Vector x(3);
  x << 1, 2, 3;
  const Vector xt = relative_positions(x);
  CHECK(xt[0] == doctest::Approx(-1.5));
  CHECK(xt[1] == doctest::Approx(0.0));
  CHECK(xt[2] == doctest::Approx(1.5));
  CHECK(std::abs(xt.sum()) < 1e-14);

  const Vector same = relative_positions(Vector::Constant(4, 2.7));
  CHECK(same.cwiseAbs().maxCoeff() < 1e-14);

  Vector two(2);
  two << 0, 4;
  CHECK(relative_positions(two)[0] == doctest::Approx(-4));
  CHECK(relative_positions(two)[1] == doctest::Approx(4));

  // translation invariance
  Vector shifted = x.array() + 10.0;
  CHECK((relative_positions(shifted) - xt).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(relative_positions(Vector::Zero(1)), DimensionError);
}

TEST_CASE("allocation weights") {
  Matrix a = Matrix::Zero(2, 6);
  a.row(0) << 1, 1, 0, 0, 0, 0;
  a.row(1) << 0, 1, 1, 1, 1, 1;
  GameSpec spec(a, 1.0, quadratic_cost());
  Vector y(6);
  y << 2, 6, 1, 1, 1, 1;
  const Vector w = allocation_weights(spec, y, 0);
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.75));
  CHECK(w.tail(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(allocation_weights(spec, y, 1).sum() == doctest::Approx(1.0));

  const GameSpec div = GameSpec::dividing(2, 1.0, quadratic_cost());
  Vector yd(2);
  yd << 3, 5;
  const Vector wd = allocation_weights(div, yd, 1);
  CHECK(wd[0] == 0.0);
  CHECK(wd[1] == 1.0);

  CHECK(allocation_weights(spec, Vector::Zero(6), 0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(total_accessible(spec, y, 1) == doctest::Approx(10.0));
  CHECK_THROWS_AS(allocation_weights(spec, -y, 0), DomainError);
}

TEST_CASE("game spec validation") {
  CHECK_NOTHROW(GameSpec::pooling(3, 0.5, quadratic_cost()));
  Matrix zero_row(2, 2);
  zero_row << 1, 1, 0, 0;
  CHECK_THROWS_WITH_AS(GameSpec(zero_row, 1.0, quadratic_cost()), "each player has access to at least one resource",
                       ModelError);
  Matrix zero_col(2, 2);
  zero_col << 1, 0, 1, 0;
  CHECK_THROWS_AS(GameSpec(zero_col, 1.0, quadratic_cost()), ModelError);
  Matrix nonbinary = Matrix::Identity(2, 2) * 2;
  CHECK_THROWS_AS(GameSpec(nonbinary, 1.0, quadratic_cost()), ModelError);
  CHECK_THROWS_AS(GameSpec::pooling(2, -1.0, quadratic_cost()), ModelError);
  CHECK_THROWS_AS(GameSpec::pooling(2, 0.0, quadratic_cost()), ModelError);
  CHECK_THROWS_AS(GameSpec::pooling(1, 1.0, quadratic_cost()), DimensionError);
  CHECK_THROWS_AS(GameSpec(Matrix::Ones(3, 2), 1.0, quadratic_cost(), Variant::Pooling), ModelError);
  CHECK_THROWS_AS(GameSpec(Matrix::Ones(2, 2), 1.0, quadratic_cost(), Variant::Dividing), ModelError);
  Matrix off(2, 2);
  off << 0, 1, 1, 0;
  CHECK_THROWS_AS(GameSpec::sharing(off, 1.0, quadratic_cost()), ModelError);
  CHECK(variant_from_string(to_string(Variant::Sharing)) == Variant::Sharing);
  CHECK_THROWS_AS(variant_from_string("ring"), ModelError);
}

TEST_CASE("cost functions") {
  CHECK_NOTHROW(validate_cost(quadratic_cost()));
  CHECK_NOTHROW(validate_cost(logcosh_cost()));
  const CostFunction lc = logcosh_cost(0.1);
  // huge arguments stay finite
  CHECK(std::isfinite(lc(800.0)));
  CHECK(lc(3.0) == doctest::Approx(9 + 0.1 * std::log(std::cosh(3.0))).epsilon(1e-14));
  CHECK(lc.jet(0.7)[1] == doctest::Approx(1.4 + 0.1 * std::tanh(0.7)));

  CostFunction asym{"asym", [](double x) { return Jet{x * x + x, 2 * x + 1, 2, 0}; }, 2, 2, {}};
  CHECK_THROWS_AS(validate_cost(asym), ModelError);
  CostFunction soft{"soft", [](double x) { return Jet{0.5 * x * x, x, 1, 0}; }, 2, 2, {}};
  CHECK_THROWS_AS(validate_cost(soft), ModelError);
  CHECK_THROWS_AS(cost_by_name("cubic"), ModelError);
}

TEST_CASE("region classification and tie-break") {
  const GameSpec spec = GameSpec::pooling(3, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 3, 1.0, 5.0);
  const double g = b.f_inverse(1.0);

  JointState s{Vector::Zero(3), Vector::Ones(1)};
  CHECK(classify_region(spec, b, s).kind == RegionLabel::Waiting);
  CHECK(to_string(classify_region(spec, b, s)) == "W");

  s.x << 0, 0, 2 * g;  // x~3 = 2g, x~1 = x~2 = -g
  RegionLabel lab = classify_region(spec, b, s);
  CHECK(lab.kind == RegionLabel::Action);
  CHECK(lab.player == 2);
  CHECK(lab.side == 1);
  CHECK(to_string(lab) == "A3+");

  // symmetric pair: equal excess, larger index wins
  s.x << -1.5 * g, 1.5 * g, 0;
  lab = classify_region(spec, b, s);
  CHECK(lab.player == 1);

  // exhausted players never act
  JointState e{Vector::Zero(3), Vector::Zero(1)};
  e.x << 5, 0, 0;
  CHECK(classify_region(spec, b, e).kind == RegionLabel::Waiting);

  CHECK_THROWS_AS(classify_region(spec, b, JointState{Vector::Zero(2), Vector::Ones(1)}), DimensionError);
  CHECK_THROWS_AS(classify_region(spec, b, JointState{Vector::Zero(3), -Vector::Ones(1)}), DomainError);
}
