#include "fuelgame/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuelgame/montecarlo.hpp"
#include "fuelgame/value.hpp"

namespace fuelgame {

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

double to_number(const Entry& e, const std::string& key) {
  const std::string s = trim(e.value);
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(e.line, key + ": '" + s + "' is not a number");
  return v;
}

long to_integer(const Entry& e, const std::string& key) {
  const double v = to_number(e, key);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(e.line, key + " must be an integer");
  return long(v);
}

bool to_bool(const Entry& e, const std::string& key) {
  const std::string s = trim(e.value);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(e.line, key + ": expected true or false");
}

std::vector<double> to_list(const std::string& text, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_number({item, line}, key));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), Index(v.size())); }

const std::set<std::string> game_keys{"players", "resources", "adjacency", "alpha", "cost", "cost_weight", "variant"};
const std::set<std::string> numerics_keys{"dt",     "delta",    "horizon",      "seed",
                                          "paths",  "y_max",    "boundary_tol", "monitoring_correction",
                                          "max_pushes", "compare_tol"};
const std::set<std::string> run_keys{"subcommand", "output",      "x",           "y",
                                     "shifts",     "roundtrips",  "sim_paths",   "record_every"};

}  // namespace

GameSpec RunConfig::game() const {
  CostFunction c = cost == "logcosh" ? logcosh_cost(cost_weight) : cost_by_name(cost);
  return GameSpec(adjacency, alpha, std::move(c), variant);
}

JointState RunConfig::start() const {
  JointState s;
  s.x = x.size() ? x : Vector::Zero(players);
  s.y = y.size() ? y : Vector::Ones(adjacency.cols());
  return s;
}

double RunConfig::table_y_max() const {
  if (y_max > 0) return y_max;
  const JointState s = start();
  const double top = (adjacency * s.y).maxCoeff();
  return std::max(10.0, 1.2 * top);
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> doc;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "malformed section header");
      current = trim(s.substr(1, s.size() - 2));
      if (current != "game" && current != "numerics" && current != "run")
        throw ConfigError(line, "unknown section [" + current + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    if (current.empty()) throw ConfigError(line, "key outside of a section");
    const std::string key = trim(s.substr(0, eq));
    const auto& allowed = current == "game" ? game_keys : current == "numerics" ? numerics_keys : run_keys;
    if (!allowed.count(key)) throw ConfigError(line, "unknown key '" + key + "' in [" + current + "]");
    if (doc[current].count(key)) throw ConfigError(line, "duplicate key '" + key + "'");
    doc[current][key] = {trim(s.substr(eq + 1)), line};
  }

  RunConfig cfg;
  Section& g = doc["game"];
  auto need = [&](const char* key) -> const Entry& {
    auto it = g.find(key);
    if (it == g.end()) throw ConfigError(0, std::string("missing required key [game] ") + key);
    return it->second;
  };

  const Entry& pe = need("players");
  const long n = to_integer(pe, "players");
  if (n < 2) throw ConfigError(pe.line, "players must be at least 2");
  cfg.players = n;
  const Entry& ae = need("alpha");
  cfg.alpha = to_number(ae, "alpha");
  if (!(cfg.alpha > 0) || !std::isfinite(cfg.alpha)) throw ConfigError(ae.line, "alpha must be positive");
  const Entry& ve = need("variant");
  try {
    cfg.variant = variant_from_string(ve.value);
  } catch (const ModelError& e) {
    throw ConfigError(ve.line, e.what());
  }
  if (g.count("cost")) {
    cfg.cost = g["cost"].value;
    if (cfg.cost != "quadratic" && cfg.cost != "logcosh")
      throw ConfigError(g["cost"].line, "unknown cost '" + cfg.cost + "'");
  }
  if (g.count("cost_weight")) cfg.cost_weight = to_number(g["cost_weight"], "cost_weight");

  if (g.count("adjacency")) {
    const Entry& e = g["adjacency"];
    std::vector<std::vector<double>> rows;
    std::stringstream ss(e.value);
    std::string row;
    while (std::getline(ss, row, ';')) rows.push_back(to_list(row, e.line, "adjacency"));
    if (Index(rows.size()) != n) throw ConfigError(e.line, "adjacency needs one row per player");
    const std::size_t m = rows.front().size();
    if (m == 0) throw ConfigError(e.line, "adjacency rows are empty");
    cfg.adjacency.resize(n, Index(m));
    for (Index i = 0; i < n; ++i) {
      if (rows[i].size() != m) throw ConfigError(e.line, "adjacency rows have different lengths");
      for (std::size_t k = 0; k < m; ++k) {
        const double a = rows[i][k];
        if (a != 0 && a != 1) throw ConfigError(e.line, "adjacency entries must be 0 or 1");
        cfg.adjacency(i, Index(k)) = a;
      }
    }
  } else if (cfg.variant == Variant::Pooling) {
    cfg.adjacency = Matrix::Ones(n, 1);
  } else if (cfg.variant == Variant::Dividing) {
    cfg.adjacency = Matrix::Identity(n, n);
  } else {
    throw ConfigError(0, "missing required key [game] adjacency");
  }
  if (g.count("resources")) {
    const Entry& e = g["resources"];
    if (to_integer(e, "resources") != cfg.adjacency.cols())
      throw ConfigError(e.line, "resources does not match the adjacency width");
  }
  try {
    cfg.game();
  } catch (const Error& err) {
    const int at = g.count("adjacency") ? g["adjacency"].line : ve.line;
    throw ConfigError(at, err.what());
  }

  Section& nm = doc["numerics"];
  SchemeParams& sp = cfg.scheme;
  sp.monitoring_correction = true;
  auto positive = [&](const char* key, double& dst) {
    if (!nm.count(key)) return;
    dst = to_number(nm[key], key);
    if (!(dst > 0)) throw ConfigError(nm[key].line, std::string(key) + " must be positive");
  };
  positive("dt", sp.dt);
  positive("delta", sp.delta);
  positive("horizon", sp.horizon);
  positive("boundary_tol", sp.boundary_tol);
  positive("y_max", cfg.y_max);
  positive("compare_tol", cfg.compare_tol);
  if (nm.count("seed")) {
    const long s = to_integer(nm["seed"], "seed");
    if (s < 0) throw ConfigError(nm["seed"].line, "seed must be non-negative");
    sp.seed = std::uint64_t(s);
  }
  if (nm.count("paths")) {
    cfg.paths = to_integer(nm["paths"], "paths");
    if (cfg.paths < 2) throw ConfigError(nm["paths"].line, "paths must be at least 2");
  }
  if (nm.count("max_pushes")) {
    const long v = to_integer(nm["max_pushes"], "max_pushes");
    if (v < 1) throw ConfigError(nm["max_pushes"].line, "max_pushes must be positive");
    sp.max_pushes = int(v);
  }
  if (nm.count("monitoring_correction"))
    sp.monitoring_correction = to_bool(nm["monitoring_correction"], "monitoring_correction");

  Section& r = doc["run"];
  if (r.count("subcommand")) {
    cfg.subcommand = r["subcommand"].value;
    const auto& sc = subcommands();
    if (std::find(sc.begin(), sc.end(), cfg.subcommand) == sc.end())
      throw ConfigError(r["subcommand"].line, "unknown subcommand '" + cfg.subcommand + "'");
  }
  if (r.count("output")) cfg.output = r["output"].value;
  if (r.count("x")) {
    cfg.x = to_vector(to_list(r["x"].value, r["x"].line, "x"));
    if (cfg.x.size() != n) throw ConfigError(r["x"].line, "x needs one entry per player");
  }
  if (r.count("y")) {
    cfg.y = to_vector(to_list(r["y"].value, r["y"].line, "y"));
    if (cfg.y.size() != cfg.adjacency.cols()) throw ConfigError(r["y"].line, "y needs one entry per resource");
    if ((cfg.y.array() < 0).any()) throw ConfigError(r["y"].line, "resource levels must be non-negative");
  }
  if (r.count("shifts")) cfg.shifts = to_list(r["shifts"].value, r["shifts"].line, "shifts");
  if (r.count("roundtrips")) cfg.roundtrips = to_list(r["roundtrips"].value, r["roundtrips"].line, "roundtrips");
  if (r.count("sim_paths")) {
    cfg.sim_paths = to_integer(r["sim_paths"], "sim_paths");
    if (cfg.sim_paths < 1) throw ConfigError(r["sim_paths"].line, "sim_paths must be positive");
  }
  if (r.count("record_every")) {
    const long v = to_integer(r["record_every"], "record_every");
    if (v < 1) throw ConfigError(r["record_every"].line, "record_every must be positive");
    cfg.record_every = int(v);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace {

namespace fs = std::filesystem;

class Output {
 public:
  Output(const RunConfig& cfg) : dir_(cfg.output), sub_(cfg.subcommand), seed_(cfg.scheme.seed) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error("cannot write '" + (dir_ / name).string() + "'");
    return f;
  }

  void write_manifest() {
    std::ofstream f(dir_ / "manifest.csv", std::ios::binary);
    f << "file,subcommand,seed\n";
    for (const auto& name : files_) f << name << "," << sub_ << "," << seed_ << "\n";
    f << "manifest.csv," << sub_ << "," << seed_ << "\n";
  }

 private:
  fs::path dir_;
  std::string sub_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
};

std::string join(const Vector& v) {
  std::string s;
  for (Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

std::string columns(const std::string& stem, Index n) {
  std::string s;
  for (Index k = 0; k < n; ++k) s += (k ? "," : "") + stem + std::to_string(k + 1);
  return s;
}

int run_boundary(const RunConfig& cfg, const GameSpec& spec, const BoundarySolution& b, Output& out) {
  auto f = out.open("boundary.csv");
  f << "x,f_N,f_N_prime,A_N_at_fN,p,p1,p2,p3\n";
  const FrontierTable& t = b.table();
  for (std::size_t k = t.x.size(); k-- > 0;) {
    const double x = t.x[k];
    const Jet p = b.p().jet(x);
    f << format_double(x) << "," << format_double(t.f[k]) << "," << format_double(t.df[k]) << ","
      << format_double(a_coefficient(b.p(), x)) << "," << format_double(p[0]) << "," << format_double(p[1]) << ","
      << format_double(p[2]) << "," << format_double(p[3]) << "\n";
  }
  auto s = out.open("boundary_summary.csv");
  s << "players,alpha,cost,x0,beta,y_max,nodes,quadrature_nodes\n";
  s << spec.players() << "," << format_double(cfg.alpha) << "," << spec.cost().name << "," << format_double(b.x0())
    << "," << format_double(b.beta()) << "," << format_double(b.y_max()) << "," << t.x.size() << ","
    << b.p().nodes() << "\n";
  return 0;
}

int run_value(const GameSpec& spec, const BoundarySolution& b, const JointState& s, Output& out) {
  const Vector xt = relative_positions(s.x);
  const Vector acc = accessible_totals(spec, s.y);
  const Vector v = value_game(spec, b, s);
  const RegionLabel label = classify_region(spec, b, s);
  auto f = out.open("value.csv");
  f << "player,x_tilde,accessible,threshold,region,value\n";
  for (Index i = 0; i < spec.players(); ++i)
    f << i + 1 << "," << format_double(xt[i]) << "," << format_double(acc[i]) << ","
      << format_double(acc[i] > 0 ? b.f_inverse(acc[i]) : 0.0) << "," << to_string(label) << ","
      << format_double(v[i]) << "\n";
  return 0;
}

int run_simulate(const RunConfig& cfg, const GameSpec& spec, const BoundarySolution& b, const JointState& s,
                 Output& out) {
  const GeometryModel g = build_geometry(spec, b);
  const Index n = spec.players(), m = spec.resources();
  auto jf = out.open("jumps.jsonl");
  const int width = int(std::to_string(cfg.sim_paths - 1).size());
  for (long k = 0; k < cfg.sim_paths; ++k) {
    const PathRecord rec = simulate_path(spec, b, g, s, cfg.scheme, std::uint64_t(k));
    std::string id = std::to_string(k);
    id.insert(0, std::size_t(std::max(0, width - int(id.size()))), '0');
    auto f = out.open("path_" + id + ".csv");
    f << "t," << columns("x", n) << "," << columns("y", m) << "," << columns("xi_plus", n) << ","
      << columns("xi_minus", n) << ",region\n";
    const std::size_t last = rec.times.size() - 1;
    for (std::size_t r = 0; r <= last; ++r) {
      if (r % std::size_t(cfg.record_every) != 0 && r != last) continue;
      f << format_double(rec.times[r]) << "," << join(rec.states[r].x) << "," << join(rec.states[r].y) << ","
        << join(rec.xi_plus.row(Index(r)).transpose()) << "," << join(rec.xi_minus.row(Index(r)).transpose()) << ","
        << to_string(rec.labels[r]) << "\n";
    }
    for (const PathJump& pj : rec.jumps) {
      nlohmann::json j;
      j["path"] = k;
      j["time"] = pj.time;
      j["player"] = pj.jump.player + 1;
      j["side"] = pj.jump.side;
      j["size"] = pj.jump.size;
      j["consumed"] = std::vector<double>(pj.jump.consumed.data(), pj.jump.consumed.data() + pj.jump.consumed.size());
      jf << j.dump() << "\n";
    }
  }
  return 0;
}

int run_verify(const RunConfig& cfg, const GameSpec& spec, const BoundarySolution& b, JointState s, Output& out) {
  if (waiting_distance(spec, b, s) > 0) s = jump_cascade(spec, b, s).state;
  const GeometryModel g = build_geometry(spec, b);
  const auto est = estimate_values(spec, b, g, s, cfg.scheme, cfg.paths);

  std::vector<Perturbation> grid;
  for (double e : cfg.shifts) grid.push_back({Perturbation::Shift, e});
  for (double e : cfg.roundtrips) grid.push_back({Perturbation::RoundTrip, e});

  auto f = out.open("verify.csv");
  f << "suite,player,perturbation,estimate,reference,std_error,statistic,pass,note\n";
  int checks = 0, failures = 0;
  std::ostringstream text;
  for (Index i = 0; i < spec.players(); ++i) {
    const EstimateReport& r = est[std::size_t(i)];
    const bool pass = std::abs(r.z_score) <= 3;
    ++checks;
    failures += !pass;
    f << "value," << i + 1 << ",," << format_double(r.mean) << "," << format_double(r.analytic) << ","
      << format_double(r.std_error) << "," << format_double(r.z_score) << "," << (pass ? "true" : "false")
      << ",horizon_bias_bound=" << format_double(r.horizon_bias_bound) << "\n";
    text << "value player " << i + 1 << ": mc " << r.mean << " +- " << r.std_error << ", analytic " << r.analytic
         << ", z " << r.z_score << (pass ? "  PASS" : "  FAIL") << "\n";
  }
  for (Index i = 0; i < spec.players(); ++i) {
    for (const DeviationRow& row : deviation_test(spec, b, s, cfg.scheme, i, grid, cfg.paths)) {
      const std::string name = to_string(row.perturbation);
      if (!row.admissible) {
        f << "deviation," << i + 1 << "," << name << ",,,,,skipped," << row.reason << "\n";
        text << "deviation player " << i + 1 << " " << name << ": rejected (" << row.reason << ")\n";
        continue;
      }
      ++checks;
      failures += !row.pass;
      const double stat = row.se_combined > 0 ? (row.j_dev - row.j_ne) / row.se_combined : 0.0;
      f << "deviation," << i + 1 << "," << name << "," << format_double(row.j_dev) << "," << format_double(row.j_ne)
        << "," << format_double(row.se_combined) << "," << format_double(stat) << ","
        << (row.pass ? "true" : "false") << ",se_paired=" << format_double(row.se_paired) << "\n";
      text << "deviation player " << i + 1 << " " << name << ": J_dev " << row.j_dev << ", J_NE " << row.j_ne
           << ", combined se " << row.se_combined << (row.pass ? "  PASS" : "  FAIL") << "\n";
    }
  }

  const PathCosts pc = simulate_costs(g, s, cfg.scheme, cfg.paths);
  auto sf = out.open("summary.csv");
  sf << summary_header() << "\n";
  for (Index i = 0; i < spec.players(); ++i) {
    std::vector<RunningStats> shards(16);
    for (Index r = 0; r < pc.cost.rows(); ++r) shards[std::size_t(r % 16)].add(pc.cost(r, i));
    sf << summary_row("cost_player" + std::to_string(i + 1), summary_stats(shards)) << "\n";
  }

  auto tf = out.open("verify_summary.txt");
  tf << "paths " << cfg.paths << ", dt " << cfg.scheme.dt << ", seed " << cfg.scheme.seed << "\n";
  tf << text.str();
  tf << checks - failures << "/" << checks << " checks passed\n";
  std::cout << checks - failures << "/" << checks << " checks passed\n";
  return failures ? 2 : 0;
}

int run_compare(const RunConfig& cfg, const GameSpec& spec, const BoundarySolution& b, const JointState& s,
                Output& out) {
  if (spec.variant() != Variant::Sharing) throw ModelError("compare needs a sharing variant");
  const GameComparison c = compare_games(spec, b, s.x, s.y, cfg.compare_tol);
  auto f = out.open("compare.csv");
  f << "player,pooled,shared,divided,ordered,pooled_eq_shared,shared_eq_divided\n";
  for (Index i = 0; i < spec.players(); ++i)
    f << i + 1 << "," << format_double(c.pooled[i]) << "," << format_double(c.shared[i]) << ","
      << format_double(c.divided[i]) << "," << (c.ordered ? "true" : "false") << ","
      << (c.pooled_eq_shared[i] ? "true" : "false") << "," << (c.shared_eq_divided[i] ? "true" : "false") << "\n";
  return c.ordered ? 0 : 2;
}

}  // namespace

int dispatch(const RunConfig& cfg) {
  const auto& sc = subcommands();
  if (std::find(sc.begin(), sc.end(), cfg.subcommand) == sc.end())
    throw ConfigError(0, "unknown subcommand '" + cfg.subcommand + "'");
  const GameSpec spec = cfg.game();
  const JointState s = cfg.start();
  check_state(spec, s);
  const BoundarySolution b =
      BoundarySolution::solve(spec.cost(), spec.players(), spec.discount(), cfg.table_y_max());
  Output out(cfg);
  int code = 0;
  if (cfg.subcommand == "boundary") code = run_boundary(cfg, spec, b, out);
  else if (cfg.subcommand == "value") code = run_value(spec, b, s, out);
  else if (cfg.subcommand == "simulate") code = run_simulate(cfg, spec, b, s, out);
  else if (cfg.subcommand == "verify") code = run_verify(cfg, spec, b, s, out);
  else code = run_compare(cfg, spec, b, s, out);
  out.write_manifest();
  return code;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"finite-fuel N-player game solver"};
  std::string config, sub, output;
  double dt = 0, delta = 0, horizon = 0;
  long long seed = -1, paths = 0;
  app.add_option("subcommand", sub, "boundary | value | simulate | verify | compare");
  app.add_option("--config", config, "config file")->required();
  app.add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
  app.add_option("--delta", delta, "push cap per step")->check(CLI::PositiveNumber);
  app.add_option("--horizon", horizon, "simulation horizon")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "RNG seed")->check(CLI::NonNegativeNumber);
  app.add_option("--paths", paths, "Monte Carlo paths")->check(CLI::Range(2LL, 1000000000LL));
  app.add_option("--output", output, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    RunConfig cfg = load_config(config);
    if (!sub.empty()) cfg.subcommand = sub;
    if (dt > 0) cfg.scheme.dt = dt;
    if (delta > 0) cfg.scheme.delta = delta;
    if (horizon > 0) cfg.scheme.horizon = horizon;
    if (seed >= 0) cfg.scheme.seed = std::uint64_t(seed);
    if (paths > 0) cfg.paths = long(paths);
    if (!output.empty()) cfg.output = output;
    if (cfg.subcommand.empty()) throw ConfigError(0, "no subcommand given");
    return dispatch(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fuelgame
