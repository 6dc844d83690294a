// Exit-code contract of the mfg executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "mfg_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MFG_CLI_PATH + "\" " + args + " > \"" + (kWork / "stdout.txt").string() +
                          "\" 2> \"" + (kWork / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string stderr_text() {
  std::ifstream in(kWork / "stderr.txt");
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Setup {
  Setup() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
} setup;

const char* kSmall = R"({"grid": {"d": 1, "n": 16, "T": 0.05, "dt": 0.005}, "model": {"gamma": 1.7},
  "audit": {"samples": 200}, "monitor": {"a3_c": 0.2}})";

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run("") == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("solve") == 2);
  CHECK(run("solve -c " + (kWork / "absent.json").string()) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("configuration errors exit 2 with every issue on stderr") {
  const auto bad = write_config("bad.json", R"({"grid": {"n": 0}, "solver": {"omega": 3}})");
  CHECK(run("solve -c " + bad) == 2);
  const auto err = stderr_text();
  CHECK(err.find("grid.n") != std::string::npos);
  CHECK(err.find("solver.omega") != std::string::npos);
  CHECK(run("exponents --gamma 1.5 --dim 2 -o " + (kWork / "e").string()) == 2);
  CHECK(run("exponents --gamma 2.5 --dim 3 -o " + (kWork / "e").string()) == 2);
}

TEST_CASE("numerical failure exits 3") {
  // A steep terminal cost with a coarse step violates the CFL bound.
  const auto steep = write_config("steep.json", R"({"grid": {"d": 1, "n": 64, "T": 0.1, "dt": 0.01},
    "model": {"gamma": 1.7},
    "data": {"u_T": {"type": "cosine", "base": 0, "terms": [{"amplitude": 5, "mode": [1]}]}}})");
  CHECK(run("solve -c " + steep + " -o " + (kWork / "steep").string()) == 3);
  CHECK(stderr_text().find("CFL") != std::string::npos);
}

TEST_CASE("successful runs and artifacts") {
  const auto cfg = write_config("small.json", kSmall);
  const auto out = kWork / "solve";
  CHECK(run("solve -c " + cfg + " -o " + out.string()) == 0);
  for (const char* f : {"u.traj", "m.traj", "report.json", "report.csv", "summary.json", "run.log"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  CHECK(run("audit -c " + cfg + " -o " + (kWork / "audit").string()) == 0);
  CHECK(fs::exists(kWork / "audit" / "audit.json"));
  CHECK(run("exponents --gamma 1.5 --dim 3 --alpha 0.5 -o " + (kWork / "exp").string()) == 0);
  CHECK(fs::exists(kWork / "exp" / "exponents.csv"));

  // Non-convergence is a result, not an error.
  const auto few = write_config("few.json", R"({"grid": {"d": 1, "n": 16, "T": 0.05, "dt": 0.005},
    "model": {"gamma": 1.7}, "data": {"m0": {"type": "cosine", "base": 1, "terms": [{"amplitude": 0.5, "mode": [1]}]}},
    "solver": {"max_iters": 1}, "monitor": {"a3_c": 0.2}})");
  CHECK(run("solve -c " + few + " -o " + (kWork / "few").string()) == 0);
  std::ifstream in(kWork / "stdout.txt");
  std::string line;
  std::getline(in, line);
  CHECK(line.find("converged=false") != std::string::npos);
}

TEST_CASE("monitor on a corrupted density still exits 0") {
  const auto cfg = write_config("small.json", kSmall);
  const auto out = kWork / "solve";
  REQUIRE(fs::exists(out / "m.traj"));
  fs::copy_file(out / "m.traj", kWork / "bad_m.traj", fs::copy_options::overwrite_existing);
  {
    std::fstream f(kWork / "bad_m.traj", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40 + 8 * 20);
    const double spike = 5.0;
    f.write(reinterpret_cast<const char*>(&spike), sizeof spike);
  }
  CHECK(run("monitor -c " + cfg + " --u " + (out / "u.traj").string() + " --m " + (kWork / "bad_m.traj").string() +
            " -o " + (kWork / "mon").string()) == 0);
  std::ifstream in(kWork / "stdout.txt");
  std::string line;
  std::getline(in, line);
  CHECK(line.find("checks_failed=0") == std::string::npos);

  // Truncated trajectory: a format error, exit 1.
  fs::resize_file(kWork / "bad_m.traj", 100);
  CHECK(run("monitor -c " + cfg + " --u " + (out / "u.traj").string() + " --m " + (kWork / "bad_m.traj").string() +
            " -o " + (kWork / "mon").string()) == 1);
}
