#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "gammaflow/scenario.hpp"
#include "gammaflow/trajectory.hpp"

using namespace gammaflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("gf_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string sphere_scenario(const fs::path& out_dir, int grid,
                            double stop = 0.2) {
  std::ostringstream os;
  os << "# shrinking round sphere\n"
     << "speed.id = mean\n"
     << "speed.n = 2\n"
     << "initial.spec = sphere:1\n"
     << "solver.grid = " << grid << "\n"
     << "solver.stop_radius = " << stop << "\n"
     << "solver.snapshot_stride = 200\n"
     << "diagnostics.list = type1,envelope,umbilicity\n"
     << "seed = 42\n"
     << "output.dir = " << out_dir.string() << "\n";
  return os.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(GF_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto sc = parse_scenario_text(
      "speed.id = mean\nspeed.n = 2\ninitial.spec = sphere:1\n"
      "solver.grid = 64   # comment\n");
  CHECK(sc.get("speed.id", "") == "mean");
  CHECK(sc.get_int("solver.grid", 0) == 64);
  CHECK(sc.get_num("solver.cfl_safety", 0.2) == 0.2);

  // canonical text is sorted and stable
  CHECK(sc.canonical_text().find("initial.spec = sphere:1\n") != std::string::npos);

  SUBCASE("unknown key carries line and column") {
    try {
      parse_scenario_text("speed.id = mean\n  solver.gird = 64\n");
      FAIL("expected parse error");
    } catch (const ScenarioParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 3);
    }
  }
  SUBCASE("missing required key") {
    CHECK_THROWS_AS(parse_scenario_text("speed.id = mean\n"), ScenarioParseError);
  }
  SUBCASE("duplicate key") {
    CHECK_THROWS_AS(
        parse_scenario_text("speed.id = mean\nspeed.id = mean\n"
                            "speed.n = 2\ninitial.spec = sphere:1\n"),
        ScenarioParseError);
  }
}

TEST_CASE("run_scenario produces artifacts and the expected diagnostics") {
  const fs::path dir = fresh_dir("sphere");
  const Scenario sc = parse_scenario_text(sphere_scenario(dir, 128));
  CHECK(run_scenario(sc) == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "diagnostics.json"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "run.log"));

  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["run"]["stop_reason"] == "stop_radius");
  const double t1 = manifest["diagnostics"]["type1"]["value"].get<double>();
  CHECK(t1 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(manifest["diagnostics"]["envelope"]["pass"].get<bool>());
  CHECK(manifest["invariants"]["bodies_move_inward"].get<bool>());
  CHECK(manifest["invariants"]["sphere_max_rel_radius_error"].get<double>() <
        1e-6);

  // the trajectory round-trips through CSV
  const Trajectory traj = read_trajectory_csv((dir / "trajectory.csv").string());
  CHECK(traj.n == 2);
  CHECK(traj.speed_id == "mean");
  CHECK(traj.snapshots.size() ==
        manifest["run"]["snapshots"].get<size_t>());
}

TEST_CASE("identical scenarios reproduce byte-identical artifacts") {
  const fs::path dir = fresh_dir("determinism");
  const Scenario sc = parse_scenario_text(sphere_scenario(dir, 64));
  CHECK(run_scenario(sc) == 0);
  const std::string manifest1 = slurp(dir / "manifest.json");
  const std::string traj1 = slurp(dir / "trajectory.csv");
  CHECK(run_scenario(sc) == 0);
  CHECK(slurp(dir / "manifest.json") == manifest1);
  CHECK(slurp(dir / "trajectory.csv") == traj1);
}

TEST_CASE("manifest round-trip reproduces the diagnostics") {
  const fs::path dir_a = fresh_dir("round_a");
  const Scenario sc = parse_scenario_text(sphere_scenario(dir_a, 64));
  CHECK(run_scenario(sc) == 0);

  const json manifest = json::parse(slurp(dir_a / "manifest.json"));
  Scenario again = parse_scenario_text(manifest["scenario_text"].get<std::string>());
  const fs::path dir_b = fresh_dir("round_b");
  again.values["output.dir"] = dir_b.string();
  CHECK(run_scenario(again) == 0);

  const CompareReport rep = compare_runs((dir_a / "manifest.json").string(),
                                         (dir_b / "manifest.json").string());
  CHECK(rep.compatible);
  for (const auto& [key, entry] : rep.entries) {
    INFO(key);
    CHECK(entry.delta <= 1e-12);
  }
}

TEST_CASE("compare_runs flags refinement and refuses different speeds") {
  const fs::path dir_a = fresh_dir("cmp_a");
  const fs::path dir_b = fresh_dir("cmp_b");
  CHECK(run_scenario(parse_scenario_text(sphere_scenario(dir_a, 64))) == 0);
  CHECK(run_scenario(parse_scenario_text(sphere_scenario(dir_b, 128))) == 0);

  const CompareReport rep = compare_runs((dir_a / "manifest.json").string(),
                                         (dir_b / "manifest.json").string());
  CHECK(rep.compatible);
  bool grid_flagged = false;
  for (const auto& k : rep.overridden_keys) grid_flagged |= (k == "solver.grid");
  CHECK(grid_flagged);
  CHECK(rep.entries.count("invariants.sphere_max_rel_radius_error") == 1);

  // different speed: refused
  const fs::path dir_c = fresh_dir("cmp_c");
  std::string other = sphere_scenario(dir_c, 64);
  other.replace(other.find("speed.id = mean"), 15, "speed.id = mean ");
  Scenario sc = parse_scenario_text(sphere_scenario(dir_c, 64));
  sc.values["speed.id"] = "two-harmonic";
  sc.values["speed.n"] = "3";
  CHECK(run_scenario(sc) == 0);
  const CompareReport bad = compare_runs((dir_a / "manifest.json").string(),
                                         (dir_c / "manifest.json").string());
  CHECK_FALSE(bad.compatible);
}

TEST_CASE("invariant failure mid-run exits 3 with truncated artifacts") {
  const fs::path dir = fresh_dir("unstable");
  // deliberately under-damped explicit step: the run loses convexity and the
  // event is recorded rather than crashing
  Scenario sc = parse_scenario_text(sphere_scenario(dir, 128, 0.05));
  sc.values["initial.spec"] = "ellipsoid:1,2";
  sc.values["solver.cfl_safety"] = "1.5";
  CHECK(run_scenario(sc) == 3);
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["run"]["truncated"].get<bool>());
  CHECK(manifest["run"]["stop_reason"] == "convexity_loss");
  CHECK(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("support-file initial data") {
  const fs::path dir = fresh_dir("supportfile");
  // a mildly aspherical convex body sampled on the uniform theta grid
  const int N = 64;
  std::ostringstream rows;
  for (int i = 0; i <= N; ++i) {
    const double th = M_PI * i / N;
    rows << std::setprecision(15) << th << "," << 1.0 + 0.05 * std::cos(2.0 * th) << "\n";
  }
  spit(dir / "body.csv", rows.str());

  Scenario sc = parse_scenario_text(sphere_scenario(dir / "out", N, 0.5));
  sc.values["initial.spec"] = "support-file:" + (dir / "body.csv").string();
  sc.values["diagnostics.list"] = "type1,umbilicity";
  CHECK(run_scenario(sc) == 0);
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["run"]["stop_reason"] == "stop_radius");

  // non-uniform grids are rejected up front
  spit(dir / "bad.csv", "0,1\n0.5,1\n3.14159,1\n1,1\n2,1\n");
  sc.values["initial.spec"] = "support-file:" + (dir / "bad.csv").string();
  CHECK(run_scenario(sc) == 2);
}

TEST_CASE("sweep runs every scenario") {
  const fs::path dir1 = fresh_dir("sweep1");
  const fs::path dir2 = fresh_dir("sweep2");
  const fs::path f1 = dir1 / "scenario.txt";
  const fs::path f2 = dir2 / "scenario.txt";
  spit(f1, sphere_scenario(dir1 / "out", 48, 0.5));
  spit(f2, sphere_scenario(dir2 / "out", 48, 0.5));
  setenv("GAMMAFLOW_THREADS", "2", 1);
  CHECK(sweep({f1.string(), f2.string()}) == 0);
  CHECK(fs::exists(dir1 / "out" / "manifest.json"));
  CHECK(fs::exists(dir2 / "out" / "manifest.json"));
}

TEST_CASE("command line round trip") {
  const fs::path dir = fresh_dir("cli");

  // scenario file with a malformed key: exit 2
  const fs::path bad = dir / "bad.scenario";
  spit(bad, "speed.id = mean\nbogus.key = 1\n");
  CHECK(run_tool("simulate --scenario " + bad.string()) == 2);

  // a good run via flags
  const fs::path traj = dir / "traj.csv";
  CHECK(run_tool("simulate --speed mean --n 2 --initial sphere:1 --grid 64"
                 " --stop-radius 0.5 --stride 100 --out " +
                 traj.string()) == 0);
  CHECK(fs::exists(traj));

  CHECK(run_tool("analyze --traj " + traj.string() +
                 " --report type1,envelope --json " +
                 (dir / "report.json").string()) == 0);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["type1"]["value"].get<double>() ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-2));

  CHECK(run_tool("analyze --traj " + traj.string() +
                 " --report interior --interior-r 0.3 --interior-L 2"
                 " --interior-K 0.5 --json " +
                 (dir / "interior.json").string()) == 0);
  const json interior = json::parse(slurp(dir / "interior.json"));
  CHECK(interior["interior"]["value"].get<double>() > 0.0);

  CHECK(run_tool("rescale --traj " + traj.string() + " --a 0.5 --T 0.25 --out " +
                 (dir / "rescaled.csv").string()) == 0);
  CHECK(fs::exists(dir / "rescaled.csv"));

  // the rescaled-curvature supremum survives the rescale + CSV round trip
  CHECK(run_tool("analyze --traj " + (dir / "rescaled.csv").string() +
                 " --report type1 --T 0 --json " +
                 (dir / "rescaled_type1.json").string()) == 0);
  const json t1a = json::parse(slurp(dir / "report.json"));
  const json t1b = json::parse(slurp(dir / "rescaled_type1.json"));
  CHECK(t1a["type1"]["value"].get<double>() ==
        doctest::Approx(t1b["type1"]["value"].get<double>()).epsilon(1e-6));

  CHECK(run_tool("certify --speed two-harmonic --n 3 --property concave"
                 " --samples 400 --seed 7 --json " +
                 (dir / "cert.json").string()) == 0);
  const json cert = json::parse(slurp(dir / "cert.json"));
  CHECK(cert["verdict"] == "pass");

  CHECK(run_tool("barrier-check --speed two-harmonic --n 3 --m 1 --json " +
                 (dir / "barrier.json").string()) == 0);
  const json barrier = json::parse(slurp(dir / "barrier.json"));
  CHECK(barrier["min_residual"].get<double>() >= -1e-12);

  CHECK(run_tool("models --list") == 0);
  CHECK(run_tool("compare --a " + dir.string() + "/manifest.json --b " +
                 dir.string() + "/manifest.json") == 0);
}
