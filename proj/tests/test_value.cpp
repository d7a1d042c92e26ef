#include <doctest.h>

#include "fuelgame/dynamics.hpp"
#include "fuelgame/value.hpp"
#include "oracles.hpp"

using namespace fuelgame;

namespace {

// smallest grid point where z - f(z) crosses the target, refined by bisection
double scan_root_plus(const BoundarySolution& b, double target) {
  auto phi = [&](double z) { return z - b.f(z) - target; };
  double lo = b.f_inverse(b.y_max() * 0.999), step = 1e-3;
  while (phi(lo + step) < 0) lo += step;
  double hi = lo + step;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("jump roots agree with a grid scan") {
  const BoundarySolution b = BoundarySolution::solve(quadratic_cost(), 2, 1.0, 6.0);
  for (double t : {-3.0, -1.0, 0.0, 0.4, 0.9, 2.0}) {
    const double z = jump_root_plus(b, t);
    CHECK(z == doctest::Approx(scan_root_plus(b, t)).epsilon(1e-9));
    CHECK(z - b.f(z) == doctest::Approx(t).epsilon(1e-10));
    const double zm = jump_root_minus(b, -t);
    CHECK(zm == doctest::Approx(-z).epsilon(1e-12));
  }
  // past the intercept the root is the target itself
  CHECK(jump_root_plus(b, b.x0() + 0.5) == doctest::Approx(b.x0() + 0.5));
}

TEST_CASE("value equals p with no resource and is continuous through a jump") {
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 6.0);
  JointState s{Vector::Zero(2), Vector::Zero(1)};
  CHECK(value_game(spec, b, s, 0) == doctest::Approx(0.5));  // 1/(2 alpha^2)
  s.x << 0.7, -0.2;
  CHECK(value_game(spec, b, s, 1) == doctest::Approx(oracle::quad_p(0.9, 2, 1.0)));

  // exterior point: value equals the value after the jump
  JointState e{Vector::Zero(2), Vector::Constant(1, 1.0)};
  e.x << 3.0, 0.0;
  const double v = value_game(spec, b, e, 0);
  JointState after = e;
  const JumpRecord j = apply_jump(spec, b, after, classify_region(spec, b, e));
  CHECK(j.size > 0);
  CHECK(j.size == doctest::Approx(e.y[0] - after.y[0]));
  CHECK(waiting_distance(spec, b, after) < 1e-9);
  CHECK(v == doctest::Approx(value_game(spec, b, after, 0)).epsilon(1e-10));
  // approaching the face from inside matches the outside value
  const double g = b.f_inverse(1.0);
  JointState in{Vector::Zero(2), Vector::Ones(1)}, out = in;
  in.x[0] = g - 1e-7;
  out.x[0] = g + 1e-7;
  CHECK(std::abs(value_game(spec, b, in, 0) - value_game(spec, b, out, 0)) < 1e-6);
}

TEST_CASE("QVI residuals on the face and in the interior") {
  for (int n : {2, 3}) {
    const GameSpec spec = GameSpec::pooling(n, 1.0, quadratic_cost());
    const BoundarySolution b = BoundarySolution::solve(spec.cost(), n, 1.0, 6.0);
    const double g = b.f_inverse(1.0);
    JointState s{Vector::Zero(n), Vector::Ones(1)};
    s.x[0] = g;
    const QviReport face = qvi_residuals(ValueQuery{spec, b, s, 0});
    CHECK(face.minus_active);
    CHECK(std::abs(face.grad_minus) < 1e-6);
    CHECK(face.grad_plus > 0);

    s.x[0] = 0.3 * g;
    const QviReport inner = qvi_residuals(ValueQuery{spec, b, s, 0});
    CHECK(std::abs(inner.pde) < 1e-6);
    CHECK(inner.grad_plus > 0);
    CHECK(inner.grad_minus > 0);
    CHECK(inner.cross_terms.size() == std::size_t(n));

    JointState far{Vector::Zero(n), Vector::Ones(1)};
    far.x[n - 1] = 3;
    CHECK_THROWS_AS(qvi_residuals(ValueQuery{spec, b, far, 0}), DomainError);
  }
}

TEST_CASE("second derivatives match across the face") {
  const GameSpec spec = GameSpec::pooling(2, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(spec.cost(), 2, 1.0, 6.0);
  JointState s{Vector::Zero(2), Vector::Ones(1)};
  s.x[0] = b.f_inverse(1.0);
  Vector dir = Vector::Zero(3);
  dir[0] = 1;
  const auto d2 = one_sided_second_derivatives(ValueQuery{spec, b, s, 0}, dir, 1e-3);
  CHECK(std::abs(d2[0] - d2[1]) < 1e-4);
}

TEST_CASE("pooling, sharing, dividing ordering") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 1) = a(1, 2) = 1;
  const GameSpec sharing = GameSpec::sharing(a, 1.0, quadratic_cost());
  const BoundarySolution b = BoundarySolution::solve(sharing.cost(), 3, 1.0, 10.0);
  Vector x(3), y(3);
  x << 0.1, -0.1, 0.05;
  y << 1, 0.5, 2;
  const GameComparison c = compare_games(sharing, b, x, y);
  CHECK(c.ordered);
  CHECK(c.shared_eq_divided[2]);  // player 3 only sees its own tank
  CHECK_FALSE(c.pooled_eq_shared[0]);

  const GameSpec full = GameSpec::sharing(Matrix::Ones(3, 3), 1.0, quadratic_cost());
  const GameComparison cf = compare_games(full, b, x, y);
  CHECK(cf.pooled_eq_shared.all());
  const GameSpec diag = GameSpec::sharing(Matrix::Identity(3, 3), 1.0, quadratic_cost());
  CHECK(compare_games(diag, b, x, y).shared_eq_divided.all());

  x << 3, 0, 0;
  CHECK_THROWS_AS(compare_games(sharing, b, x, y), HypothesisError);
}
