// Command-line front end: simulate / analyze / rescale / certify /
// barrier-check / models / sweep / compare.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gammaflow/analysis.hpp"
#include "gammaflow/certify.hpp"
#include "gammaflow/common.hpp"
#include "gammaflow/models.hpp"
#include "gammaflow/scenario.hpp"
#include "gammaflow/support_profile.hpp"

namespace gf = gammaflow;
using nlohmann::json;

namespace {

struct CatalogEntry {
  const char* id;
  int n;
};

constexpr CatalogEntry kCatalog[] = {
    {"mean", 2},         {"mean", 3},        {"harmonic-k:1", 3},
    {"two-harmonic", 3}, {"power-mean:2", 3}, {"power-mean:-2", 3},
};

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(path);
  out << content << "\n";
}

int cmd_models() {
  std::cout << "catalog speeds (c_m = inverse unit-cylinder speed):\n";
  for (const auto& entry : kCatalog) {
    const gf::SpeedFunction speed = gf::make_speed(entry.id, entry.n);
    const int mb = gf::mbar(speed);
    std::cout << "  " << entry.id << " (n=" << entry.n << ", cone "
              << speed.cone().name() << ", mbar=" << mb << ")\n";
    for (int m = 0; m <= mb; ++m) {
      gf::ShrinkingCylinder cyl{speed, m};
      std::cout << "    m=" << m
                << "  c_m=" << gf::cylinder_constant(speed, m)
                << "  sqrt(-t)|A|=" << gf::cylinder_type1_constant(cyl) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"axisymmetric curvature-flow laboratory"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "evolve an initial profile");
  std::string sim_scenario, sim_speed = "mean", sim_initial = "sphere:1";
  std::string sim_out = "trajectory.csv";
  int sim_n = 2, sim_grid = 256, sim_stride = 50;
  double sim_stop = 0.1, sim_safety = 0.2;
  uint64_t sim_seed = 0;
  sim->add_option("--scenario", sim_scenario, "scenario file (overrides flags)");
  sim->add_option("--speed", sim_speed, "speed id");
  sim->add_option("--n", sim_n, "hypersurface dimension");
  sim->add_option("--initial", sim_initial, "sphere:r | ellipsoid:a,b | support-file:path");
  sim->add_option("--grid", sim_grid, "theta intervals N");
  sim->add_option("--stop-radius", sim_stop, "stop when min rho1 falls below");
  sim->add_option("--stride", sim_stride, "snapshot stride (steps)");
  sim->add_option("--cfl", sim_safety, "CFL safety factor");
  sim->add_option("--seed", sim_seed, "seed recorded in metadata");
  sim->add_option("--out", sim_out, "trajectory CSV path");

  // analyze
  auto* ana = app.add_subcommand("analyze", "diagnostics over a trajectory CSV");
  std::string ana_traj, ana_report = "type1,envelope,umbilicity", ana_json;
  double ana_t0 = std::nan("");
  double ana_T = std::nan("");
  double ana_ir = 0.5, ana_iL = 4.0, ana_iK = 2.0, ana_ipz = 0.0, ana_lsL = 2.0;
  ana->add_option("--traj", ana_traj, "trajectory CSV")->required();
  ana->add_option("--report", ana_report, "comma list: type1,envelope,umbilicity,interior,inner-ball,lower-speed");
  ana->add_option("--json", ana_json, "report output path (stdout if empty)");
  ana->add_option("--t0", ana_t0, "treat the last snapshot at or before this time as final");
  ana->add_option("--T", ana_T, "reference time for the rescaled-curvature supremum "
                  "(defaults to the extinction estimate)");
  ana->add_option("--interior-r", ana_ir, "interior estimate r");
  ana->add_option("--interior-L", ana_iL, "interior estimate L");
  ana->add_option("--interior-K", ana_iK, "interior estimate K");
  ana->add_option("--interior-pz", ana_ipz, "interior estimate center (axis)");
  ana->add_option("--lower-speed-L", ana_lsL, "lower speed window L");

  // rescale
  auto* res = app.add_subcommand("rescale", "parabolic rescaling of a trajectory");
  std::string res_in, res_out;
  double res_a = 1.0, res_T = 0.0, res_center = 0.0;
  res->add_option("--traj", res_in, "input CSV")->required();
  res->add_option("--a", res_a, "scale factor")->required();
  res->add_option("--T", res_T, "reference time");
  res->add_option("--center-z", res_center, "axis recentering");
  res->add_option("--out", res_out, "output CSV")->required();

  // certify
  auto* cert = app.add_subcommand("certify", "sampled structural certificates");
  std::string cert_speed = "two-harmonic", cert_prop = "concave", cert_json;
  int cert_n = 3, cert_samples = 10000;
  uint64_t cert_seed = 1;
  double cert_tol = 1e-8;
  cert->add_option("--speed", cert_speed, "speed id");
  cert->add_option("--n", cert_n, "dimension");
  cert->add_option("--property", cert_prop,
                   "admissible|convex|concave|inverse-concave|strict-on-boundary:<m>");
  cert->add_option("--samples", cert_samples, "sample count");
  cert->add_option("--seed", cert_seed, "RNG seed");
  cert->add_option("--tolerance", cert_tol, "certificate tolerance");
  cert->add_option("--json", cert_json, "report output path");

  // barrier-check
  auto* bar = app.add_subcommand("barrier-check", "paraboloid subsolution residual sweep");
  std::string bar_speed = "mean", bar_json;
  int bar_n = 3, bar_m = 1;
  bar->add_option("--speed", bar_speed, "speed id");
  bar->add_option("--n", bar_n, "dimension");
  bar->add_option("--m", bar_m, "flat factor count (>= 1)");
  bar->add_option("--json", bar_json, "report output path");

  // models
  auto* mod = app.add_subcommand("models", "exact model constants");
  bool mod_list = false;
  mod->add_flag("--list", mod_list, "print catalog constants");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run several scenarios");
  std::vector<std::string> sw_paths;
  sw->add_option("scenarios", sw_paths, "scenario files")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "diff two run manifests");
  std::string cmp_a, cmp_b, cmp_json;
  cmp->add_option("--a", cmp_a, "manifest A")->required();
  cmp->add_option("--b", cmp_b, "manifest B")->required();
  cmp->add_option("--json", cmp_json, "report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      if (!sim_scenario.empty()) return gf::run_scenario_file(sim_scenario);
      const gf::SpeedFunction speed = gf::make_speed(sim_speed, sim_n);
      gf::Scenario sc;
      sc.values["speed.id"] = sim_speed;
      sc.values["speed.n"] = std::to_string(sim_n);
      sc.values["initial.spec"] = sim_initial;
      sc.values["solver.grid"] = std::to_string(sim_grid);
      std::ostringstream stop, cfl;
      stop << sim_stop; cfl << sim_safety;
      sc.values["solver.stop_radius"] = stop.str();
      sc.values["solver.cfl_safety"] = cfl.str();
      sc.values["solver.snapshot_stride"] = std::to_string(sim_stride);
      sc.values["seed"] = std::to_string(sim_seed);
      // artifacts land next to the requested CSV
      std::string dir = ".";
      const auto slash = sim_out.find_last_of('/');
      if (slash != std::string::npos) dir = sim_out.substr(0, slash);
      sc.values["output.dir"] = dir;
      const int rc = gf::run_scenario(sc);
      if (rc == 0 && dir + "/trajectory.csv" != sim_out) {
        std::ifstream src(dir + "/trajectory.csv", std::ios::binary);
        std::ofstream dst(sim_out, std::ios::binary);
        dst << src.rdbuf();
      }
      return rc;
    }

    if (ana->parsed()) {
      gf::Trajectory traj = gf::read_trajectory_csv(ana_traj);
      if (!std::isnan(ana_t0)) {
        // treat the last snapshot at or before t0 as the final time
        while (traj.snapshots.size() > 1 && traj.snapshots.back().time > ana_t0) {
          traj.snapshots.pop_back();
        }
      }
      json out = json::object();
      for (const auto& name : [&] {
            std::vector<std::string> v;
            std::istringstream is(ana_report);
            std::string tok;
            while (std::getline(is, tok, ',')) v.push_back(tok);
            return v;
          }()) {
        if (name == "type1") {
          const double T = std::isnan(ana_T) ? traj.extinction_estimate : ana_T;
          out["type1"] = {{"T", T}, {"value", gf::type1_sup(traj, T)}};
        } else if (name == "envelope") {
          const double K = 2.0 * gf::type1_speed_sup(traj);
          const auto rep = gf::displacement_envelope_check(traj, K);
          out["envelope"] = {{"K", K},
                             {"max_violation", rep.max_violation},
                             {"pass", rep.pass}};
        } else if (name == "umbilicity") {
          const auto series = gf::umbilicity_gap(traj);
          json times = json::array(), gaps = json::array();
          for (const auto& [t, g] : series) { times.push_back(t); gaps.push_back(g); }
          out["umbilicity"] = {{"final_gap", series.back().second},
                               {"times", times}, {"gaps", gaps}};
        } else if (name == "interior") {
          out["interior"] = {{"value", gf::interior_estimate_statistic(
                                           traj, ana_ipz, ana_ir, ana_iL, ana_iK)},
                             {"r", ana_ir}, {"L", ana_iL}, {"K", ana_iK}};
        } else if (name == "inner-ball") {
          const auto rep = gf::inner_ball_check(traj, 0.0, 0.0);
          out["inner-ball"] = {{"empirical_c", rep.empirical_constant}};
        } else if (name == "lower-speed") {
          const auto r = gf::lower_speed_check(traj, ana_lsL);
          out["lower-speed"] = {{"c_L", r.c_L},
                                {"skipped_snapshots", r.skipped_snapshots}};
        }
      }
      write_or_print(ana_json, out.dump(2));
      return 0;
    }

    if (res->parsed()) {
      gf::Trajectory traj = gf::read_trajectory_csv(res_in);
      gf::RescalingSpec spec{res_center, res_a, res_T};
      gf::write_trajectory_csv(gf::parabolic_rescale(traj, spec), res_out);
      return 0;
    }

    if (cert->parsed()) {
      const gf::SpeedFunction speed = gf::make_speed(cert_speed, cert_n);
      gf::CertificateReport rep;
      if (cert_prop.rfind("strict-on-boundary:", 0) == 0) {
        const int m = std::stoi(cert_prop.substr(19));
        rep = gf::certify_strict_on_boundary(speed, m, cert_samples, cert_seed,
                                             cert_tol);
      } else {
        rep = gf::certify(speed, gf::parse_property(cert_prop), cert_samples,
                          cert_seed, cert_tol);
      }
      write_or_print(cert_json, rep.to_json());
      return 0;  // the verdict lives in the report
    }

    if (bar->parsed()) {
      const gf::SpeedFunction speed = gf::make_speed(bar_speed, bar_n);
      gf::TranslatingParaboloid bowl{speed, bar_m};
      json j;
      j["speed"] = bar_speed;
      j["n"] = bar_n;
      j["m"] = bar_m;
      json ss = json::array(), rr = json::array();
      double worst = std::numeric_limits<double>::infinity();
      for (double s : gf::residual_s_grid()) {
        const double r = gf::paraboloid_subsolution_residual(bowl, s);
        ss.push_back(s);
        rr.push_back(r);
        worst = std::min(worst, r);
      }
      j["s"] = ss;
      j["residual"] = rr;
      j["min_residual"] = worst;
      j["vertex_residual"] = gf::paraboloid_subsolution_residual(bowl, 0.0);
      write_or_print(bar_json, j.dump(2));
      return 0;
    }

    if (mod->parsed()) return cmd_models();

    if (sw->parsed()) return gf::sweep(sw_paths);

    if (cmp->parsed()) {
      const gf::CompareReport rep = gf::compare_runs(cmp_a, cmp_b);
      write_or_print(cmp_json, rep.to_json());
      return rep.compatible ? 0 : 2;
    }
  } catch (const gf::ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gf::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
