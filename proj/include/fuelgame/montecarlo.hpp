#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fuelgame/dynamics.hpp"

namespace fuelgame {

// Welford accumulator with Chan's merge
struct RunningStats {
  long n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double v);
  void merge(const RunningStats& o);
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / double(n)) : 0.0; }
};

RunningStats summary_stats(const std::vector<RunningStats>& records);
std::string summary_header();
std::string summary_row(const std::string& name, const RunningStats& s);

// FUELGAME_THREADS, else hardware concurrency
int worker_threads();

struct PathCosts {
  Matrix cost;          // paths x players, discounted cost over [0, T]
  Matrix terminal_h;    // paths x players, running cost at T
  double sup_h = 0;     // largest running cost seen
  double horizon = 0;
};

PathCosts simulate_costs(const GeometryModel& g, const JointState& start, const SchemeParams& p, long n_paths,
                         const Deviation& dev = {});

struct EstimateReport {
  double mean = 0;
  double std_error = 0;
  long n_paths = 0;
  double horizon_bias_bound = 0;
  double analytic = 0;
  double z_score = 0;
};

EstimateReport estimate_value(const GameSpec& spec, const BoundarySolution& b, const GeometryModel& g,
                              const JointState& start, const SchemeParams& p, Index player, long n_paths);
// every player from one set of paths
std::vector<EstimateReport> estimate_values(const GameSpec& spec, const BoundarySolution& b,
                                            const GeometryModel& g, const JointState& start,
                                            const SchemeParams& p, long n_paths);

struct Perturbation {
  enum Kind { Shift, RoundTrip } kind = Shift;
  double size = 0;  // threshold shift, or round-trip push length
};

std::string to_string(const Perturbation& q);

struct DeviationRow {
  Perturbation perturbation;
  bool admissible = true;
  std::string reason;
  double j_dev = 0, se_dev = 0;
  double j_ne = 0, se_ne = 0;
  double se_combined = 0;
  double se_paired = 0;
  bool pass = true;  // j_dev >= j_ne - 3 se_combined
};

std::vector<DeviationRow> deviation_test(const GameSpec& spec, const BoundarySolution& b, const JointState& start,
                                         const SchemeParams& p, Index player,
                                         const std::vector<Perturbation>& perturbations, long n_paths);

}  // namespace fuelgame
