#include "gammaflow/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "gammaflow/analysis.hpp"
#include "gammaflow/common.hpp"
#include "gammaflow/errors.hpp"
#include "gammaflow/support_profile.hpp"

#include "json.hpp"

namespace gammaflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::set<std::string> kKnownKeys = {
    "speed.id",
    "speed.n",
    "initial.spec",
    "solver.grid",
    "solver.cfl_safety",
    "solver.stop_radius",
    "solver.snapshot_stride",
    "solver.max_steps",
    "diagnostics.list",
    "diagnostics.interior.r",
    "diagnostics.interior.L",
    "diagnostics.interior.K",
    "diagnostics.interior.p_z",
    "diagnostics.lower_speed.L",
    "diagnostics.inner_ball.c",
    "diagnostics.inner_ball.origin_z",
    "output.dir",
    "seed",
};

// Keys that refinement or relocation studies may override without breaking
// comparability.
const std::set<std::string> kVolatileKeys = {
    "solver.grid",
    "solver.snapshot_stride",
    "output.dir",
};

std::string to_hex(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, sep)) {
    if (!tok.empty()) parts.push_back(tok);
  }
  return parts;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string Scenario::get(const std::string& key,
                          const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double Scenario::get_num(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : std::stod(it->second);
}

long Scenario::get_int(const std::string& key, long fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : std::stol(it->second);
}

std::string Scenario::canonical_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values) os << k << " = " << v << "\n";
  return os.str();
}

std::string Scenario::base_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : values) {
    if (kVolatileKeys.count(k)) continue;
    os << k << " = " << v << "\n";
  }
  return os.str();
}

Scenario parse_scenario_text(const std::string& text) {
  Scenario sc;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScenarioParseError("expected 'key = value'", lineno,
                               static_cast<int>(line.find_first_not_of(" \t")) + 1);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const int keycol = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (key.empty()) throw ScenarioParseError("empty key", lineno, keycol);
    if (value.empty()) throw ScenarioParseError("empty value for key '" + key + "'",
                                                lineno, static_cast<int>(eq) + 2);
    if (!kKnownKeys.count(key)) {
      throw ScenarioParseError("unknown key '" + key + "'", lineno, keycol);
    }
    if (sc.values.count(key)) {
      throw ScenarioParseError("duplicate key '" + key + "'", lineno, keycol);
    }
    sc.values[key] = value;
  }
  for (const char* required : {"speed.id", "speed.n", "initial.spec"}) {
    if (!sc.values.count(required)) {
      throw ScenarioParseError(std::string("missing required key '") + required +
                                   "'", lineno + 1, 1);
    }
  }
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  return parse_scenario_text(read_file(path));
}

namespace {

SupportProfile build_initial(const Scenario& sc, int n, int N) {
  const std::string spec = sc.get("initial.spec", "");
  if (spec.rfind("sphere:", 0) == 0) {
    return make_sphere_profile(n, N, std::stod(spec.substr(7)));
  }
  if (spec.rfind("ellipsoid:", 0) == 0) {
    const auto parts = split(spec.substr(10), ',');
    if (parts.size() != 2) throw DomainError("ellipsoid spec needs a,b");
    return make_ellipsoid_profile(n, N, std::stod(parts[0]), std::stod(parts[1]));
  }
  if (spec.rfind("support-file:", 0) == 0) {
    const std::string path = spec.substr(13);
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open support file: " + path);
    std::vector<double> thetas, hs;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto parts = split(line, ',');
      if (parts.size() != 2) throw DomainError("support file rows are theta,h");
      thetas.push_back(std::stod(parts[0]));
      hs.push_back(std::stod(parts[1]));
    }
    if (hs.size() < 5) throw DomainError("support file too short");
    for (size_t i = 0; i < thetas.size(); ++i) {
      const double expect = M_PI * i / (thetas.size() - 1);
      if (std::abs(thetas[i] - expect) > 1e-6) {
        throw DomainError("support file must sample theta uniformly on [0, pi]");
      }
    }
    SupportProfile p;
    p.n = n;
    p.h = hs;
    return p;
  }
  throw DomainError("unknown initial spec: " + spec);
}

struct SphereReference {
  bool active = false;
  double r0 = 0.0;
  double c0 = 0.0;
};

json diagnostics_json(const Scenario& sc, const SpeedFunction& speed,
                      const Trajectory& traj) {
  json diags = json::object();
  for (const std::string& name : split(sc.get("diagnostics.list", "type1,envelope"), ',')) {
    if (name == "type1") {
      json d;
      if (std::isnan(traj.extinction_estimate)) {
        d["note"] = "no extinction estimate";
        d["value"] = nullptr;
      } else {
        d["T"] = traj.extinction_estimate;
        d["value"] = type1_sup(traj);
      }
      diags["type1"] = d;
    } else if (name == "envelope") {
      const double K = 2.0 * type1_speed_sup(traj);
      const EnvelopeReport rep = displacement_envelope_check(traj, K);
      diags["envelope"] = {{"K", K},
                           {"max_violation", rep.max_violation},
                           {"pass", rep.pass}};
    } else if (name == "umbilicity") {
      const auto series = umbilicity_gap(traj);
      double worst_backstep = 0.0;
      for (size_t i = 1; i < series.size(); ++i) {
        worst_backstep =
            std::max(worst_backstep, series[i - 1].second - series[i].second);
      }
      json times = json::array(), gaps = json::array();
      for (const auto& [t, g] : series) {
        times.push_back(t);
        gaps.push_back(g);
      }
      diags["umbilicity"] = {{"final_gap", series.back().second},
                             {"worst_backstep", worst_backstep},
                             {"times", times},
                             {"gaps", gaps}};
    } else if (name == "interior") {
      const double r = sc.get_num("diagnostics.interior.r", 0.5);
      const double L = sc.get_num("diagnostics.interior.L", 4.0);
      const double K = sc.get_num("diagnostics.interior.K", 2.0);
      const double pz = sc.get_num("diagnostics.interior.p_z", 0.0);
      json d;
      try {
        d["value"] = interior_estimate_statistic(traj, pz, r, L, K);
        d["r"] = r; d["L"] = L; d["K"] = K; d["p_z"] = pz;
      } catch (const DomainError& e) {
        d["error"] = e.what();
      }
      diags["interior"] = d;
    } else if (name == "inner-ball") {
      const double c = sc.get_num("diagnostics.inner_ball.c", 0.0);
      const double oz = sc.get_num("diagnostics.inner_ball.origin_z", 0.0);
      json d;
      try {
        const EnvelopeReport rep = inner_ball_check(traj, c, oz);
        d["pass"] = rep.pass;
        d["empirical_c"] = rep.empirical_constant;
        if (!rep.note.empty()) d["note"] = rep.note;
      } catch (const DomainError& e) {
        d["error"] = e.what();
      }
      diags["inner-ball"] = d;
    } else if (name == "lower-speed") {
      const double L = sc.get_num("diagnostics.lower_speed.L", 2.0);
      const LowerSpeedResult res = lower_speed_check(traj, L);
      diags["lower-speed"] = {{"c_L", res.c_L},
                              {"skipped_snapshots", res.skipped_snapshots},
                              {"L", L}};
    } else {
      diags[name] = {{"error", "unknown diagnostic"}};
    }
  }
  (void)speed;
  return diags;
}

json invariants_json(const SpeedFunction& speed, const Trajectory& traj,
                     const SphereReference& ref) {
  json inv = json::object();
  double max_support_increase = -std::numeric_limits<double>::infinity();
  for (size_t k = 1; k < traj.snapshots.size(); ++k) {
    const auto& prev = traj.snapshots[k - 1];
    const auto& cur = traj.snapshots[k];
    for (size_t i = 0; i < cur.nodes.size(); ++i) {
      max_support_increase = std::max(
          max_support_increase, cur.nodes[i].h - prev.nodes[i].h);
    }
  }
  inv["max_support_increase"] = max_support_increase;
  inv["bodies_move_inward"] = max_support_increase < 0.0;

  double min_dist = std::numeric_limits<double>::infinity();
  const int n = traj.n;
  Eigen::VectorXd lam(n);
  for (const auto& snap : traj.snapshots) {
    for (const auto& nd : snap.nodes) {
      if (std::isnan(nd.rho1)) continue;
      lam[0] = 1.0 / nd.rho1;
      for (int k = 1; k < n; ++k) lam[k] = 1.0 / nd.rho2;
      const ConeDistance cd = cone_distance(speed.cone(), speed, lam);
      min_dist = std::min(min_dist, cd.value);
    }
  }
  if (std::isinf(min_dist)) {
    inv["min_cone_distance"] = "inf";
  } else {
    inv["min_cone_distance"] = min_dist;
  }

  if (ref.active) {
    double err = 0.0;
    for (const auto& snap : traj.snapshots) {
      const double rex =
          std::sqrt(ref.r0 * ref.r0 - 2.0 * snap.time / ref.c0);
      for (const auto& nd : snap.nodes) {
        err = std::max(err, std::abs(nd.h - rex) / rex);
      }
    }
    inv["sphere_max_rel_radius_error"] = err;
  }
  return inv;
}

}  // namespace

int run_scenario(const Scenario& sc) {
  const auto t_start = std::chrono::steady_clock::now();

  const std::string out_dir = sc.get("output.dir", "");
  if (out_dir.empty()) {
    std::cerr << "scenario missing output.dir\n";
    return 2;
  }
  fs::create_directories(out_dir);

  const int n = static_cast<int>(sc.get_int("speed.n", 2));
  const std::string speed_id = sc.get("speed.id", "mean");
  SpeedFunction speed;
  try {
    speed = make_speed(speed_id, n);
  } catch (const DomainError& e) {
    std::cerr << "speed: " << e.what() << "\n";
    return 2;
  }

  const int N = static_cast<int>(sc.get_int("solver.grid", 256));
  SupportProfile initial;
  try {
    initial = build_initial(sc, n, N);
  } catch (const std::exception& e) {
    std::cerr << "initial data: " << e.what() << "\n";
    return 2;
  }

  SphereReference ref;
  const std::string ispec = sc.get("initial.spec", "");
  if (ispec.rfind("sphere:", 0) == 0) {
    ref.active = true;
    ref.r0 = std::stod(ispec.substr(7));
    ref.c0 = cylinder_constant(speed, 0);
  }

  RunOptions opts;
  opts.safety = sc.get_num("solver.cfl_safety", 0.2);
  opts.max_steps = sc.get_int("solver.max_steps", 50'000'000);
  opts.seed = static_cast<uint64_t>(sc.get_int("seed", 0));

  RunResult run =
      run_to_extinction(initial, speed, sc.get_num("solver.stop_radius", 0.1),
                        static_cast<int>(sc.get_int("solver.snapshot_stride", 50)),
                        opts);
  Trajectory& traj = run.trajectory;
  traj.seed = opts.seed;

  const std::string traj_path = out_dir + "/trajectory.csv";
  write_trajectory_csv(traj, traj_path);

  const json diags = diagnostics_json(sc, speed, traj);
  write_file(out_dir + "/diagnostics.json", diags.dump(2) + "\n");

  json manifest;
  manifest["version"] = kVersion;
  manifest["scenario_hash"] = to_hex(fnv1a64(sc.canonical_text()));
  manifest["base_hash"] = to_hex(fnv1a64(sc.base_text()));
  manifest["scenario_text"] = sc.canonical_text();
  manifest["seed"] = opts.seed;
  manifest["artifacts"] = {
      {"trajectory_csv", "trajectory.csv"},
      {"trajectory_fnv", to_hex(fnv1a64(read_file(traj_path)))}};
  manifest["run"] = {{"steps", run.steps},
                     {"stop_reason", run.stop_reason},
                     {"truncated", run.truncated},
                     {"snapshots", traj.snapshots.size()},
                     {"extinction_estimate", traj.extinction_estimate}};
  manifest["diagnostics"] = diags;
  manifest["invariants"] = invariants_json(speed, traj, ref);
  write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

  const auto t_end = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration<double, std::milli>(t_end - t_start).count();
  {
    std::ostringstream os;
    os << "wall_time_ms = " << ms << "\n"
       << "steps = " << run.steps << "\n"
       << "stop_reason = " << run.stop_reason << "\n";
    write_file(out_dir + "/run.log", os.str());
  }

  if (run.truncated && (run.stop_reason == "convexity_loss" ||
                        run.stop_reason == "cone_exit")) {
    std::cerr << "run truncated: " << run.stop_reason << " (artifacts in "
              << out_dir << ")\n";
    return 3;
  }
  return 0;
}

int run_scenario_file(const std::string& path) {
  Scenario sc;
  try {
    sc = parse_scenario_file(path);
  } catch (const ScenarioParseError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  }
  try {
    return run_scenario(sc);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 3;
  }
}

namespace {

void flatten_numeric(const json& j, const std::string& prefix,
                     std::map<std::string, double>& out) {
  if (j.is_number()) {
    out[prefix] = j.get<double>();
  } else if (j.is_boolean()) {
    out[prefix] = j.get<bool>() ? 1.0 : 0.0;
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_array()) continue;  // series stay in diagnostics.json
      flatten_numeric(v, prefix.empty() ? k : prefix + "." + k, out);
    }
  }
}

}  // namespace

std::string CompareReport::to_json() const {
  json j;
  j["compatible"] = compatible;
  if (!reason.empty()) j["reason"] = reason;
  j["overridden_keys"] = overridden_keys;
  json e = json::object();
  for (const auto& [k, v] : entries) {
    e[k] = {{"a", v.a}, {"b", v.b}, {"delta", v.delta}, {"ratio", v.ratio}};
  }
  j["entries"] = e;
  return j.dump(2);
}

CompareReport compare_runs(const std::string& manifest_a,
                           const std::string& manifest_b) {
  CompareReport rep;
  const json a = json::parse(read_file(manifest_a));
  const json b = json::parse(read_file(manifest_b));

  if (a.value("base_hash", "") != b.value("base_hash", "")) {
    rep.compatible = false;
    rep.reason = "scenarios differ beyond refinement overrides";
    return rep;
  }
  rep.compatible = true;

  const Scenario sa = parse_scenario_text(a.value("scenario_text", ""));
  const Scenario sb = parse_scenario_text(b.value("scenario_text", ""));
  for (const auto& [k, v] : sa.values) {
    const auto it = sb.values.find(k);
    if (it == sb.values.end() || it->second != v) rep.overridden_keys.push_back(k);
  }
  for (const auto& [k, v] : sb.values) {
    if (!sa.values.count(k)) rep.overridden_keys.push_back(k);
  }

  std::map<std::string, double> fa, fb;
  for (const char* section : {"diagnostics", "invariants", "run"}) {
    if (a.contains(section)) flatten_numeric(a[section], section, fa);
    if (b.contains(section)) flatten_numeric(b[section], section, fb);
  }
  for (const auto& [k, va] : fa) {
    const auto it = fb.find(k);
    if (it == fb.end()) continue;
    CompareEntry e;
    e.a = va;
    e.b = it->second;
    e.delta = std::abs(va - it->second);
    e.ratio = (it->second != 0.0) ? va / it->second : 0.0;
    rep.entries[k] = e;
  }
  return rep;
}

int sweep(const std::vector<std::string>& scenario_paths) {
  int workers = 1;
  if (const char* env = std::getenv("GAMMAFLOW_THREADS")) {
    workers = std::max(1, std::atoi(env));
  }
  workers = std::min<int>(workers, std::max<size_t>(1, scenario_paths.size()));

  std::atomic<size_t> next{0};
  std::atomic<int> worst{0};
  std::mutex io_mu;
  auto work = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= scenario_paths.size()) break;
      const int rc = run_scenario_file(scenario_paths[i]);
      {
        std::lock_guard<std::mutex> lock(io_mu);
        std::cout << scenario_paths[i] << ": exit " << rc << "\n";
      }
      int cur = worst.load();
      while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {}
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return worst.load();
}

}  // namespace gammaflow
