#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fuelgame/cli.hpp"

using namespace fuelgame;
namespace fs = std::filesystem;

namespace {

const char* kPooling = R"([game]
players = 2
alpha = 1
variant = pooling
[numerics]
seed = 3
paths = 50
horizon = 0.5
[run]
x = 0.2, 0
y = 1
)";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("fuelgame_test_" + name);
  fs::remove_all(d);
  return d;
}

int run(std::vector<std::string> args) {
  std::vector<char*> argv;
  static std::string prog = "fuelgame";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(int(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("minimal pooling config") {
  const RunConfig c = parse_config(kPooling);
  const GameSpec g = c.game();
  CHECK(g.variant() == Variant::Pooling);
  CHECK(g.players() == 2);
  CHECK(g.resources() == 1);
  CHECK(c.scheme.seed == 3);
  CHECK(c.paths == 50);
  CHECK(c.start().x[0] == 0.2);
  CHECK(c.scheme.monitoring_correction);
}

TEST_CASE("config errors carry line numbers") {
  auto error_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of("[game]\nplayers = 2\nalpha = -1\nvariant = pooling\n") == "line 3: alpha must be positive");
  CHECK(error_of("[game]\nplayers = 2\nalpha = 1\nvariant = general\nadjacency = 1,1; 0,0\n") ==
        "line 5: each player has access to at least one resource");
  CHECK(error_of("[game]\nplayers = 2\nalpha = 1\nvariant = general\nadjacency = 1,2; 0,1\n") ==
        "line 5: adjacency entries must be 0 or 1");
  CHECK(error_of("[game]\nplayers = 3\nalpha = 1\nvariant = general\nadjacency = 1,1; 0,1\n") ==
        "line 5: adjacency needs one row per player");
  CHECK(error_of("[game]\nplayers = 2\nalpha = 1\nvariant = general\nadjacency = 1,1; 1\n") ==
        "line 5: adjacency rows have different lengths");
  CHECK(error_of("[game]\nplayers = 2\nalpha = 1\nvariant = pooling\ncolour = red\n") ==
        "line 5: unknown key 'colour' in [game]");
  CHECK(error_of("[game]\nplayers = 2\nvariant = pooling\n") == "missing required key [game] alpha");
  CHECK(error_of("[fuel]\n") == "line 1: unknown section [fuel]");
  CHECK(error_of("players = 2\n") == "line 1: key outside of a section");
  CHECK(error_of(std::string(kPooling) + "y = 2\n") == "line 12: duplicate key 'y'");
  CHECK(error_of(std::string(kPooling) + "subcommand = plot\n") == "line 12: unknown subcommand 'plot'");
  CHECK(error_of("[game]\nplayers = two\n") == "line 2: players: 'two' is not a number");
}

TEST_CASE("boundary output and manifest") {
  const fs::path dir = scratch("boundary");
  RunConfig c = parse_config(kPooling);
  c.subcommand = "boundary";
  c.output = dir.string();
  CHECK(dispatch(c) == 0);
  const std::string csv = slurp(dir / "boundary.csv");
  CHECK(csv.rfind("x,f_N,f_N_prime,A_N_at_fN,p,p1,p2,p3\n", 0) == 0);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    const double x = std::stod(line.substr(0, line.find(',')));
    CHECK(x < prev);
    prev = x;
    ++rows;
  }
  CHECK(rows > 100);
  const std::string manifest = slurp(dir / "manifest.csv");
  for (const auto& entry : fs::directory_iterator(dir))
    CHECK(manifest.find(entry.path().filename().string() + ",boundary,3\n") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical outputs") {
  for (const std::string sub : {"simulate", "value"}) {
    const fs::path a = scratch(sub + "_a"), b = scratch(sub + "_b");
    RunConfig c = parse_config(kPooling);
    c.subcommand = sub;
    c.sim_paths = 2;
    c.output = a.string();
    CHECK(dispatch(c) == 0);
    c.output = b.string();
    CHECK(dispatch(c) == 0);
    for (const auto& entry : fs::directory_iterator(a))
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "game.ini";
  std::ofstream(cfg) << kPooling;
  CHECK(run({"value", "--config", cfg.string(), "--output", (dir / "v").string()}) == 0);
  CHECK(fs::exists(dir / "v" / "value.csv"));
  CHECK(run({"plot", "--config", cfg.string()}) == 1);
  CHECK(run({"value"}) == 1);
  CHECK(run({"value", "--config", (dir / "missing.ini").string()}) == 1);
  CHECK(run({"value", "--config", cfg.string(), "--dt", "-1"}) == 1);
  // truncated horizon cannot reach the infinite-horizon value
  CHECK(run({"verify", "--config", cfg.string(), "--paths", "40", "--output", (dir / "short").string()}) == 2);
  CHECK(run({"verify", "--config", cfg.string(), "--paths", "300", "--horizon", "10", "--dt", "0.004", "--output",
             (dir / "ver").string()}) == 0);
  CHECK(fs::exists(dir / "ver" / "verify_summary.txt"));
}

TEST_CASE("shortest round-trip formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456.789}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.1) == "0.1");
}
