#pragma once

#include <array>
#include <vector>

#include "fuelgame/boundary.hpp"
#include "fuelgame/core.hpp"

namespace fuelgame {

// z > 0 with z - f(z) = target, f extended by 0 beyond x0
double jump_root_plus(const BoundarySolution& b, double target);
// z < 0 with z + f(z) = target
double jump_root_minus(const BoundarySolution& b, double target);

struct JumpRecord {
  Index player = -1;
  int side = 0;       // sign of x~ before the jump
  double size = 0;    // |dx^i|, equal to the fuel burnt
  Vector consumed;    // per resource
};

// moves the labelled player onto its boundary (or exhausts it)
JumpRecord apply_jump(const GameSpec& spec, const BoundarySolution& b, JointState& s, const RegionLabel& label);

// largest positive threshold excess over players with fuel, 0 inside the closure
double waiting_distance(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

struct ValueQuery {
  GameSpec spec;
  BoundarySolution boundary;
  JointState state;
  Index player = 0;
};

double value_game(const ValueQuery& q);
double value_game(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Index player);
// all players at once
Vector value_game(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

// closed form p(x~) + A(acc) cosh(x~ sqrt(beta)), valid on the closure of the waiting region
double waiting_value(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Index player);

struct QviReport {
  double pde = 0;         // 1/2 sum v_xx - alpha v + h
  double grad_plus = 0;   // -Gamma_i v + v_{x^i}
  double grad_minus = 0;  // -Gamma_i v - v_{x^i}
  bool plus_active = false;   // x~ on the lower face
  bool minus_active = false;  // x~ on the upper face
  std::vector<std::array<double, 2>> cross_terms;  // per j: -Gamma_j v^i +- v^i_{x^j}
};

// fd_step <= 0 selects 1e-4 * max(1, |x~^i|)
QviReport qvi_residuals(const ValueQuery& q, double fd_step = 0);

// -Gamma_j v^i +- v^i_{x^j} at any state
std::array<double, 2> cross_residuals(const ValueQuery& q, Index j, double fd_step = 0);

// (2v0 - 5v1 + 4v2 - v3)/h^2 along +dir and along -dir; dir spans (x, y)
std::array<double, 2> one_sided_second_derivatives(const ValueQuery& q, const Vector& dir, double h);

struct GameComparison {
  Vector pooled, shared, divided;
  bool ordered = false;
  Eigen::Array<bool, Eigen::Dynamic, 1> pooled_eq_shared, shared_eq_divided;
};

// y: the per-resource levels of the sharing/dividing games, pooled total sum(y)
GameComparison compare_games(const GameSpec& sharing, const BoundarySolution& b, const Vector& x,
                             const Vector& y, double tol = 1e-12);

}  // namespace fuelgame
