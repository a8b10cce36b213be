// Drives the vofc binary on the fixture problem files. CSV outputs are compared
// against tests/golden; set VOFC_UPDATE_GOLDEN=1 to rewrite them.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kExe = VOFC_EXE;
const fs::path kFixtures = VOFC_FIXTURES;
const fs::path kGolden = VOFC_GOLDEN;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vofc_e2e_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run vofc(const std::vector<std::string>& args, const fs::path& cwd, const std::string& env = {}) {
  std::string cmd = "cd " + quote(cwd.string()) + " && " + env + " " + quote(kExe.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote((cwd / "stdout.txt").string()) + " 2>" + quote((cwd / "stderr.txt").string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(cwd / "stdout.txt");
  r.err = slurp(cwd / "stderr.txt");
  return r;
}

std::string fixture(const std::string& name) { return (kFixtures / name).string(); }

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

bool as_number(const std::string& s, double& v) {
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

/// Numeric cells agree within rel * max(1, |golden|); other cells exactly.
void check_golden(const fs::path& produced, const std::string& golden_name, double rel = 1e-9) {
  REQUIRE(fs::exists(produced));
  const auto golden = kGolden / golden_name;
  if (const char* up = std::getenv("VOFC_UPDATE_GOLDEN"); up && std::string(up) == "1") {
    fs::copy_file(produced, golden, fs::copy_options::overwrite_existing);
    return;
  }
  REQUIRE_MESSAGE(fs::exists(golden), golden.string());
  const auto got = split_csv(slurp(produced));
  const auto want = split_csv(slurp(golden));
  REQUIRE(got.size() == want.size());
  REQUIRE(!want.empty());
  CHECK(got[0] == want[0]);
  int mismatches = 0;
  for (std::size_t i = 1; i < want.size(); ++i) {
    REQUIRE(got[i].size() == want[i].size());
    for (std::size_t j = 0; j < want[i].size(); ++j) {
      double g = 0.0, w = 0.0;
      const bool ok = as_number(got[i][j], g) && as_number(want[i][j], w)
                          ? std::abs(g - w) <= rel * std::max(1.0, std::abs(w))
                          : got[i][j] == want[i][j];
      if (!ok && ++mismatches <= 5)
        FAIL_CHECK(golden_name << " row " << i << " col " << j << ": " << got[i][j] << " vs " << want[i][j]);
    }
  }
  CHECK(mismatches == 0);
}

}  // namespace

TEST_CASE("deriv") {
  const auto dir = scratch("deriv");
  SUBCASE("combined, variable order") {
    const auto r = vofc({"deriv", fixture("varorder.ini"), "--which", "combined", "--x", "t^2", "--at",
                         "0.1,0.25,0.5,0.75,0.9", "--out", "combined.csv"},
                        dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("csv: combined.csv") != std::string::npos);
    check_golden(dir / "combined.csv", "deriv_combined.csv");
  }
  SUBCASE("dual, constant order") {
    const auto r = vofc({"deriv", fixture("half.ini"), "--which", "dual", "--x", "t^2", "--at", "0.25,0.5,0.75",
                         "--out", "dual.csv"},
                        dir);
    REQUIRE(r.code == 0);
    check_golden(dir / "dual.csv", "deriv_dual.csv");
  }
  SUBCASE("default path from the environment") {
    const auto target = scratch("deriv_env");
    const auto r = vofc({"deriv", fixture("half.ini"), "--which", "left-caputo", "--x", "t", "--at", "0.5"}, dir,
                        "VOFC_OUTPUT_DIR=" + quote(target.string()));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(target / "deriv.csv"));
  }
  SUBCASE("stdout") {
    const auto r = vofc({"deriv", fixture("half.ini"), "--which", "right-rl", "--x", "1", "--at", "0.5", "--out", "-"},
                        dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("t,value,nodes,scheme\n", 0) == 0);
  }
}

TEST_CASE("check-ibp") {
  const auto dir = scratch("ibp");
  auto r = vofc({"check-ibp", fixture("half.ini"), "--x", "t", "--y", "t", "--side", "left", "--nodes", "128",
                 "--refine", "3", "--out", "left.csv"},
                dir);
  REQUIRE(r.code == 0);
  check_golden(dir / "left.csv", "ibp_left.csv");
  r = vofc({"check-ibp", fixture("half.ini"), "--x", "t^2", "--y", "1 - t", "--side", "right", "--nodes", "128",
            "--refine", "3", "--out", "right.csv"},
           dir);
  REQUIRE(r.code == 0);
  check_golden(dir / "right.csv", "ibp_right.csv");
}

TEST_CASE("residuals") {
  const auto dir = scratch("residuals");
  SUBCASE("isoperimetric") {
    const auto r = vofc({"residuals", fixture("iso.ini"), "--candidate", "t", "--T", "0.5", "--lambda", "2", "--out",
                         "iso.csv"},
                        dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("el_interior") != std::string::npos);
    check_golden(dir / "iso.csv", "residuals_iso.csv");
  }
  SUBCASE("holonomic, resolved x2") {
    const auto r =
        vofc({"residuals", fixture("holonomic.ini"), "--candidate", "t", "--nodes", "128", "--out", "hol.csv"}, dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("cth1_5") != std::string::npos);
    check_golden(dir / "hol.csv", "residuals_holonomic.csv");
  }
  SUBCASE("candidate from a CSV") {
    auto r = vofc({"solve", fixture("holonomic.ini"), "--nodes", "21", "--out", "traj.csv"}, dir);
    REQUIRE(r.code == 0);
    r = vofc({"residuals", fixture("holonomic.ini"), "--candidate", "traj.csv", "--nodes", "64", "--out", "-"}, dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("t,family,value") != std::string::npos);
  }
}

TEST_CASE("solve") {
  const auto dir = scratch("solve");
  SUBCASE("holonomic") {
    const auto r = vofc({"solve", fixture("holonomic.ini"), "--nodes", "21", "--out", "hol.csv"}, dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("converged: yes") != std::string::npos);
    check_golden(dir / "hol.csv", "solve_holonomic.csv", 1e-6);
  }
  SUBCASE("vacuous constraint") {
    const auto r = vofc({"solve", fixture("vacuous.ini"), "--nodes", "17", "--out", "vac.csv"}, dir);
    REQUIRE(r.code == 0);
    check_golden(dir / "vac.csv", "solve_vacuous.csv", 1e-6);
  }
}

TEST_CASE("example") {
  const auto dir = scratch("example");
  auto r = vofc({"example", "paper-iso", "--nodes", "256", "--out", "iso"}, dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("summary (derived): PASS") != std::string::npos);
  CHECK(r.out.find("summary (paper): FAIL") != std::string::npos);
  check_golden(dir / "iso" / "paper-iso-derived-residuals.csv", "example_iso_derived_residuals.csv");
  check_golden(dir / "iso" / "paper-iso-derived-sweep.csv", "example_iso_derived_sweep.csv");
  r = vofc({"example", "paper-holonomic", "--nodes", "128", "--sign-convention", "derived", "--out", "hol"}, dir);
  REQUIRE(r.code == 0);
  check_golden(dir / "hol" / "paper-holonomic-derived-residuals.csv", "example_holonomic_derived_residuals.csv");
}

TEST_CASE("byte-identical CSV across runs") {
  const std::vector<std::vector<std::string>> commands = {
      {"deriv", fixture("varorder.ini"), "--which", "dual", "--x", "sin(t)", "--at", "0.2,0.4,0.6", "--out", "o.csv"},
      {"check-ibp", fixture("varorder.ini"), "--x", "t", "--y", "exp(t)", "--refine", "2", "--out", "o.csv"},
      {"residuals", fixture("iso.ini"), "--candidate", "t", "--T", "0.5", "--lambda", "2", "--out", "o.csv"},
      {"solve", fixture("holonomic.ini"), "--nodes", "21", "--out", "o.csv"},
  };
  int k = 0;
  for (const auto& args : commands) {
    CAPTURE(args[0]);
    const auto one = scratch("repeat" + std::to_string(k) + "a");
    const auto two = scratch("repeat" + std::to_string(k) + "b");
    ++k;
    REQUIRE(vofc(args, one).code == 0);
    REQUIRE(vofc(args, two).code == 0);
    const auto first = slurp(one / "o.csv");
    CHECK(!first.empty());
    CHECK(first == slurp(two / "o.csv"));
  }
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  SUBCASE("0 on success") {
    CHECK(vofc({"deriv", fixture("half.ini"), "--x", "t", "--at", "0.5", "--out", "-"}, dir).code == 0);
  }
  SUBCASE("2 on a malformed expression, without output") {
    const auto r = vofc({"deriv", fixture("half.ini"), "--x", "t+", "--at", "0.5", "--out", "bad.csv"}, dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("position") != std::string::npos);
    CHECK(!fs::exists(dir / "bad.csv"));
  }
  SUBCASE("2 on a malformed problem file") {
    const auto r = vofc({"deriv", fixture("malformed.ini"), "--x", "t", "--at", "0.5"}, dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("malformed.ini") != std::string::npos);
  }
  SUBCASE("2 on bad arguments") {
    CHECK(vofc({"deriv", fixture("half.ini"), "--x", "t", "--at", "0.5", "--which", "middle"}, dir).code == 2);
    CHECK(vofc({"no-such-command"}, dir).code == 2);
  }
  SUBCASE("3 on a numeric failure") {
    const auto r = vofc({"deriv", fixture("half.ini"), "--which", "left-rl", "--x", "t^2", "--at", "0"}, dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("EndpointUndefined") != std::string::npos);
  }
  SUBCASE("4 on a violated holonomic constraint") {
    const auto r = vofc({"residuals", fixture("holonomic.ini"), "--candidate", "0", "--candidate2", "1", "--nodes",
                         "128"},
                        dir);
    CHECK(r.code == 4);
    CHECK(r.err.find("ConstraintViolated") != std::string::npos);
  }
  SUBCASE("5 on an unreachable constraint, with the partial trajectory") {
    const auto r = vofc({"solve", fixture("unreachable.ini"), "--nodes", "17", "--out", "partial.csv"}, dir);
    CHECK(r.code == 5);
    CHECK(r.err.find("NoConvergence: constraint gap") != std::string::npos);
    CHECK(fs::exists(dir / "partial.csv"));
  }
}
