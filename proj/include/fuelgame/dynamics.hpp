#pragma once

#include <cstdint>
#include <vector>

#include "fuelgame/boundary.hpp"
#include "fuelgame/core.hpp"
#include "fuelgame/rng.hpp"
#include "fuelgame/value.hpp"

namespace fuelgame {

// face i < N: upper face x~^i = f^-1(acc_i); face N + i: lower face x~^i = -f^-1(acc_i)
class GeometryModel {
 public:
  GeometryModel(GameSpec spec, BoundarySolution b) : spec_(std::move(spec)), b_(std::move(b)) {}

  const GameSpec& spec() const { return spec_; }
  const BoundarySolution& boundary() const { return b_; }
  Index faces() const { return 2 * spec_.players(); }

  // |x~^i| < f^-1(acc_i) for every player
  bool in_domain(const JointState& s) const;
  // unit inward normal in (x, y)
  Vector normal(Index face, const Vector& y) const;
  // unit reflection direction in (x, y)
  Vector reflection(Index face, const Vector& y) const;

 private:
  GameSpec spec_;
  BoundarySolution b_;
};

GeometryModel build_geometry(const GameSpec& spec, const BoundarySolution& b);

struct ReflectionBound {
  double a = 0;            // min of both sides
  double normal_side = 0;  // min <sum n_i/|I|, r_k>
  double reflection_side = 0;  // min <sum r_i/|I|, n_k>
  Vector argmin_y;
  std::vector<int> argmin_pattern;  // per player -1, 0, +1
  bool floored = false;    // box lower corner lifted to the epsilon floor
};

ReflectionBound check_reflection_compatibility(const GeometryModel& g, const Vector& lo, const Vector& hi,
                                               int samples_per_dim = 5, double floor = 1e-6);

struct SchemeParams {
  double dt = 1e-3;
  double delta = 0;         // 0: sqrt(dt)
  double boundary_tol = 1e-9;
  double horizon = 0;       // 0: -ln(1e-4) / alpha
  std::uint64_t seed = 1;
  bool monitoring_correction = false;
  int max_pushes = 10000;

  double push_cap() const;
  double time_horizon(double discount) const;
  int steps(double discount) const;
};

// threshold shift for one player; everyone else plays the equilibrium
struct Deviation {
  Index player = -1;
  double shift = 0;  // > 0 lazy, < 0 eager
};

struct StepOutcome {
  Vector xi_plus, xi_minus;  // control increments per player
  Vector eta;                // local time increments per face
  int pushes = 0;
  Index top_face = -1;       // face that pushed most
};

StepOutcome reflect_step(const GeometryModel& g, const JointState& s, const Vector& increment,
                         const SchemeParams& p, JointState& out, const Deviation& dev = {});

struct CascadeResult {
  JointState state;
  std::vector<JumpRecord> jumps;
  std::vector<Index> top_rank;  // rank argmax before each jump
  int iterations = 0;
  double distance = 0;
};

CascadeResult jump_cascade(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

struct PathJump {
  double time = 0;
  JumpRecord jump;
};

struct PathRecord {
  std::vector<double> times;
  std::vector<JointState> states;
  Matrix xi_plus, xi_minus;  // rows: time, cols: players
  Matrix eta;                // rows: time, cols: faces
  std::vector<RegionLabel> labels;
  std::vector<PathJump> jumps;
};

// Brownian increments, one column per step
Matrix brownian_increments(Index players, int steps, double dt, std::uint64_t seed, std::uint64_t path);

PathRecord simulate_path(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                         const JointState& start, const SchemeParams& p, std::uint64_t path = 0);
PathRecord simulate_path(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                         const JointState& start, const SchemeParams& p, const Matrix& increments);

// discrete running-maximum map for two-player pooling, player 2 controls
PathRecord two_player_explicit(const JointState& start, const Matrix& increments, const BoundarySolution& b,
                               double dt);

struct RankReport {
  Vector rank;
  Index argmax = -1;
  bool consistent = true;  // argmax equals the acting player outside the waiting region
};

RankReport rank_diagnostic(const GameSpec& spec, const BoundarySolution& b, const JointState& s);

// allocation-free stepping used by simulate_path and the Monte Carlo engine
class PathEngine {
 public:
  PathEngine(const GeometryModel& g, const SchemeParams& p, const Deviation& dev = {});

  void reset(const JointState& s);
  // x += dw, then reflect; dw has N entries
  void step(const double* dw);

  const JointState& state() const { return s_; }
  const Vector& relative() const { return xt_; }
  const Vector& xi_plus() const { return xi_p_; }
  const Vector& xi_minus() const { return xi_m_; }
  const Vector& eta() const { return eta_; }
  int last_pushes() const { return pushes_; }
  Index last_top_face() const { return top_face_; }

 private:
  void refresh_thresholds();
  void update_relative();
  void reflect();
  // push player k's face by lam, side = sign of x~
  void push(Index k, int side, double lam);
  double exact_push(Index k) const;

  const GeometryModel& g_;
  const GameSpec& spec_;
  const BoundarySolution& b_;
  SchemeParams p_;
  Deviation dev_;
  Index n_, m_;
  double cap_, corr_;
  bool coincident_;
  JointState s_;
  Vector xt_, acc_, thr_, thr_ne_, xi_p_, xi_m_, eta_, e_, e_ne_;
  Eigen::Array<bool, Eigen::Dynamic, 1> active_;
  int pushes_ = 0;
  Index top_face_ = -1;
};

}  // namespace fuelgame
