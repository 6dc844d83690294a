#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "mfg/config.hpp"
#include "mfg/error.hpp"
#include "mfg/io.hpp"
#include "mfg/run.hpp"

using namespace mfg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfg_test_cli_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trajectory random_trajectory(const TorusGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  Trajectory t(g);
  for (std::size_t k = 0; k < t.frame_count(); ++k)
    for (auto& v : t[k].values()) v = U(rng);
  return t;
}

bool bitwise_equal(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid() == b.grid()) || a.frame_count() != b.frame_count()) return false;
  for (std::size_t k = 0; k < a.frame_count(); ++k) {
    if (std::memcmp(a[k].values().data(), b[k].values().data(), a[k].size() * sizeof(double)) != 0) return false;
  }
  return true;
}

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

// 1-d problem small enough to solve in well under a second.
const char* kSmallConfig = R"({
  "grid": {"d": 1, "n": 32, "T": 0.1, "dt": 0.002},
  "model": {"gamma": 1.7, "a": {"type": "cosine", "base": 1.0, "terms": [{"amplitude": 0.2, "mode": [1]}]}},
  "data": {"m0": {"type": "cosine", "base": 1.0, "terms": [{"amplitude": 0.3, "mode": [1]}]}},
  "solver": {"omega": 1.0},
  "audit": {"samples": 500},
  "monitor": {"a3_c": 0.2}
})";

}  // namespace

TEST_CASE("defaults") {
  const RunConfig cfg = parse_config("{}");
  CHECK(cfg.d == 2);
  CHECK(cfg.n == 64);
  CHECK(cfg.T == 0.5);
  CHECK(cfg.grid().time_step() == doctest::Approx(0.002));
  CHECK(cfg.grid().steps() == 250);
  CHECK(cfg.gamma == 1.5);
  CHECK(cfg.coupling.alpha == 0.5);
  CHECK(cfg.coupling.eps == 0.05);
  CHECK(cfg.solver.omega == 0.5);
  CHECK(cfg.solver.tol == 1e-8);
  CHECK(cfg.solver.max_iters == 200);
  CHECK(cfg.kappa0 == 1e-6);
  CHECK(cfg.audit.radius == 20.0);
  CHECK(cfg.audit.samples == 10000);
  CHECK(cfg.output.directory == "out");
  CHECK(cfg.log.empty());

  const RunConfig cfl = parse_config(R"({"grid": {"n": 32, "cfl_target": 0.1}})");
  CHECK(cfl.grid().time_step() == doctest::Approx(0.1 / 32));
}

TEST_CASE("field specs") {
  const RunConfig cfg = parse_config(R"({"grid": {"d": 2, "n": 8},
    "model": {"a": {"type": "cosine", "base": 2.0, "terms": [{"amplitude": 0.5, "mode": [1, 2], "phase": 0.25}]},
              "V": {"type": "constant", "value": 3.0}}})");
  const auto g = cfg.grid();
  const Field a = cfg.a.sample(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.position(i, 0), y = g.position(i, 1);
    CHECK(a[i] == doctest::Approx(2.0 + 0.5 * std::cos(2 * std::numbers::pi * (x + 2 * y) + 0.25)).epsilon(1e-14));
  }
  CHECK(cfg.V.sample(g).min() == 3.0);

  const RunConfig tab = parse_config(R"({"grid": {"d": 1, "n": 4}, "model": {"gamma": 1.7},
    "data": {"u_T": {"type": "table", "values": [0, 1, 2, 3]}}})");
  const Field u = tab.u_T.sample(tab.grid());
  CHECK(u[3] == 3.0);
  CHECK(any_contains(issues_of(R"({"grid": {"d": 1, "n": 4}, "model": {"gamma": 1.7},
    "data": {"u_T": {"type": "table", "values": [0, 1]}}})"), "data.u_T"));
}

TEST_CASE("m0 renormalization and positivity floor") {
  const RunConfig cfg = parse_config(R"({"data": {"m0": 1.0001}})");
  REQUIRE(cfg.log.size() == 1);
  CHECK(cfg.log[0].find("renormalized") != std::string::npos);
  const auto pb = build_problem(parse_config(R"({"grid": {"n": 16}, "data": {"m0": 1.0001}})"));
  CHECK(pb.m0.integral() == doctest::Approx(1.0).epsilon(1e-14));

  const auto issues = issues_of(R"({"grid": {"d": 1, "n": 4}, "model": {"gamma": 1.7},
    "data": {"m0": {"type": "table", "values": [1, 0, 1, 2]}}})");
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("data.m0") != std::string::npos);
  CHECK(issues[0].find("kappa0") != std::string::npos);
}

TEST_CASE("every error is reported") {
  const auto issues = issues_of(R"({"grid": {"n": 0}, "model": {"gamma": 3.0}, "solver": {"omega": 2.0},
    "surprise": 1})");
  CHECK(issues.size() >= 4);
  CHECK(any_contains(issues, "grid.n"));
  CHECK(any_contains(issues, "gamma"));
  CHECK(any_contains(issues, "solver.omega"));
  CHECK(any_contains(issues, "surprise"));

  const auto syntax = issues_of("{\n  \"grid\": {\"d\": 2,,}\n}");
  REQUIRE(syntax.size() == 1);
  CHECK(syntax[0].find("line 2") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/mfg.json"), IoError);
}

TEST_CASE("config echo round trip") {
  const RunConfig a = parse_config(kSmallConfig);
  const std::string echo = config_to_json(a);
  CHECK(config_to_json(parse_config(echo)) == echo);
}

TEST_CASE("trajectory files") {
  const auto dir = scratch("traj");
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    const auto g = TorusGrid::with_time_step(d, 6, 0.3, 0.1);
    const Trajectory t = random_trajectory(g, rng);
    const auto path = (dir / ("r" + std::to_string(d) + ".traj")).string();
    write_trajectory(path, t);
    CHECK(fs::file_size(path) == kTrajectoryHeaderBytes + t.frame_count() * g.size() * 8);
    CHECK(bitwise_equal(read_trajectory(path), t));
  }

  // Header layout.
  const auto g = TorusGrid::with_steps(2, 4, 0.5, 5);
  const auto path = (dir / "h.traj").string();
  write_trajectory(path, random_trajectory(g, rng));
  const std::string bytes = slurp(path);
  CHECK(bytes.substr(0, 8) == "MFGTRAJ1");
  const auto u8 = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  CHECK(u8(8) == 2);
  CHECK(u8(12) == 4);
  CHECK(u8(16) == 5);
  double T = 0.0;
  std::memcpy(&T, bytes.data() + 24, 8);  // host is little-endian here
  CHECK(T == 0.5);

  // steps = 0: header plus one frame.
  const auto g0 = TorusGrid::with_steps(1, 8, 0.0, 0);
  const auto p0 = (dir / "zero.traj").string();
  write_trajectory(p0, random_trajectory(g0, rng));
  CHECK(read_trajectory(p0).frame_count() == 1);

  // Truncated file names both sizes.
  {
    std::ofstream out(dir / "cut.traj", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
  }
  try {
    read_trajectory((dir / "cut.traj").string());
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(bytes.size())) != std::string::npos);
    CHECK(msg.find(std::to_string(bytes.size() - 8)) != std::string::npos);
  }
  std::string bad = bytes;
  bad[3] = 'X';
  {
    std::ofstream out(dir / "magic.traj", std::ios::binary);
    out << bad;
  }
  CHECK_THROWS_AS(read_trajectory((dir / "magic.traj").string()), FormatError);
  {
    std::ofstream out(dir / "short.traj", std::ios::binary);
    out << "MFG";
  }
  CHECK_THROWS_AS(read_trajectory((dir / "short.traj").string()), FormatError);
  CHECK_THROWS_AS(read_trajectory((dir / "missing.traj").string()), IoError);
}

TEST_CASE("plots are binary PPM") {
  const auto dir = scratch("ppm");
  const auto g = TorusGrid::spatial(2, 8);
  write_field_ppm((dir / "f.ppm").string(), Field::from_function(g, [](auto x) { return x[0] - x[1]; }));
  write_series_ppm((dir / "s.ppm").string(), {1.0, 0.1, 1e-3});
  CHECK(slurp(dir / "f.ppm").substr(0, 2) == "P6");
  CHECK(slurp(dir / "s.ppm").substr(0, 2) == "P6");
}

TEST_CASE("solve, determinism and monitor") {
  const auto dir = scratch("solve");
  RunConfig cfg = parse_config(kSmallConfig);
  cfg.output.directory = dir.string();
  const RunResult r = run_solve(cfg);
  CHECK(r.converged);
  CHECK(r.checks_failed == 0);
  for (const char* f : {"u.traj", "m.traj", "report.json", "report.csv", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const std::string first = slurp(dir / "summary.json");
  run_solve(cfg);
  CHECK(slurp(dir / "summary.json") == first);
  CHECK(nlohmann::json::parse(first).at("command") == "solve");

  // Monitoring the stored trajectories reproduces the solve's verdicts.
  const auto mon = scratch("monitor");
  RunConfig mcfg = cfg;
  mcfg.output.directory = mon.string();
  const auto u_path = (dir / "u.traj").string(), m_path = (dir / "m.traj").string();
  CHECK(run_monitor(mcfg, u_path, m_path).checks_failed == 0);

  // Corrupted density: entries fail, the run itself succeeds.
  Trajectory m = read_trajectory(m_path);
  m[10][5] += 1e-3;
  const auto bad_path = (mon / "bad_m.traj").string();
  write_trajectory(bad_path, m);
  const RunResult broken = run_monitor(mcfg, u_path, bad_path);
  CHECK(broken.checks_failed > 0);
  const auto report = nlohmann::json::parse(slurp(mon / "report.json"));
  CHECK(report.at("checks_failed").get<std::size_t>() == broken.checks_failed);

  // Trajectories from a different grid are a configuration error.
  RunConfig other = mcfg;
  other.n = 16;
  CHECK_THROWS_AS(run_monitor(other, u_path, m_path), ConfigError);
}

TEST_CASE("exponents table") {
  const auto dir = scratch("exponents");
  ExponentsRequest req;
  req.gammas = {1.5};
  req.dims = {3};
  req.alpha = 0.5;
  req.directory = dir.string();
  const RunResult r = run_exponents(req);
  CHECK(r.checks_failed == 0);
  std::ifstream in(dir / "exponents.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header.rfind("gamma,d,alpha_formula,alpha_max", 0) == 0);
  std::vector<std::string> cols;
  std::stringstream ss(row);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  REQUIRE(cols.size() >= 4);
  CHECK(std::stod(cols[3]) >= 2.562);
  const auto w = nlohmann::json::parse(slurp(dir / "witnesses.json"));
  CHECK(w.dump().find("query") != std::string::npos);

  req.dims = {2};
  CHECK_THROWS_AS(run_exponents(req), DomainError);
}

TEST_CASE("shipped configs load") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(MFG_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++count;
  }
  CHECK(count >= 6);
}
