#pragma once

#include <string>
#include <vector>

#include "fuelgame/core.hpp"
#include "fuelgame/dynamics.hpp"

namespace fuelgame {

struct RunConfig {
  // [game]
  Index players = 0;
  Matrix adjacency;
  double alpha = 0;
  std::string cost = "quadratic";
  double cost_weight = 0.1;  // logcosh only
  Variant variant = Variant::General;

  // [numerics]
  SchemeParams scheme;
  long paths = 10000;
  double y_max = 0;  // 0: max(10, 1.2 * largest accessible total)
  double compare_tol = 1e-12;

  // [run]
  std::string subcommand;
  std::string output = "out";
  Vector x;  // start positions, default 0
  Vector y;  // start resources, default 1
  std::vector<double> shifts{-0.3, -0.1, -0.05, 0.05, 0.1, 0.3};
  std::vector<double> roundtrips{0.1};
  long sim_paths = 1;
  int record_every = 10;

  GameSpec game() const;
  JointState start() const;
  double table_y_max() const;
};

// [game] / [numerics] / [run] key = value document, '#' comments
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"boundary", "value", "simulate", "verify", "compare"};
  return s;
}

// 0 success, 2 acceptance failure; throws on usage errors
int dispatch(const RunConfig& cfg);

// full command line handling, returns the process exit code
int run_cli(int argc, char** argv);

// shortest round-trip decimal
std::string format_double(double v);

}  // namespace fuelgame
