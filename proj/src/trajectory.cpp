#include "gammaflow/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gammaflow {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# n=" << traj.n << " speed=" << traj.speed_id
      << " grid=" << traj.grid << " cfl_safety=" << fmt(traj.cfl_safety)
      << " stride=" << traj.snapshot_stride << " seed=" << traj.seed << "\n";
  out << "# truncated=" << (traj.truncated ? 1 : 0) << " stop_reason="
      << (traj.stop_reason.empty() ? "none" : traj.stop_reason)
      << " extinction_estimate=" << fmt(traj.extinction_estimate) << "\n";
  out << "time,node,theta,h,rho1,rho2,G,normA\n";
  for (const auto& snap : traj.snapshots) {
    for (size_t i = 0; i < snap.nodes.size(); ++i) {
      const TrajNode& nd = snap.nodes[i];
      out << fmt(snap.time) << ',' << i << ',' << fmt(nd.theta) << ','
          << fmt(nd.h) << ',' << fmt(nd.rho1) << ',' << fmt(nd.rho2) << ','
          << fmt(nd.G) << ',' << fmt(nd.normA) << "\n";
    }
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Trajectory traj;
  std::string line;
  bool have_time = false;
  double cur_time = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "n") traj.n = std::stoi(val);
        else if (key == "speed") traj.speed_id = val;
        else if (key == "grid") traj.grid = std::stoi(val);
        else if (key == "cfl_safety") traj.cfl_safety = std::stod(val);
        else if (key == "stride") traj.snapshot_stride = std::stoi(val);
        else if (key == "seed") traj.seed = std::stoull(val);
        else if (key == "truncated") traj.truncated = (val == "1");
        else if (key == "stop_reason" && val != "none") traj.stop_reason = val;
        else if (key == "extinction_estimate") traj.extinction_estimate = std::stod(val);
      }
      continue;
    }
    if (line.rfind("time,", 0) == 0) continue;  // header
    std::istringstream row(line);
    std::string cell;
    TrajNode nd;
    double t = 0.0;
    int col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      switch (col) {
        case 0: t = v; break;
        case 1: break;
        case 2: nd.theta = v; break;
        case 3: nd.h = v; break;
        case 4: nd.rho1 = v; break;
        case 5: nd.rho2 = v; break;
        case 6: nd.G = v; break;
        case 7: nd.normA = v; break;
        default: break;
      }
      ++col;
    }
    if (col < 8) throw std::runtime_error("malformed trajectory row: " + line);
    if (!have_time || t != cur_time) {
      traj.snapshots.push_back(Snapshot{t, {}});
      cur_time = t;
      have_time = true;
    }
    // Positions are implied by (theta, h) up to the h' term; rebuilt below.
    traj.snapshots.back().nodes.push_back(nd);
  }
  // Rebuild meridian positions from the support values (central h').
  for (auto& snap : traj.snapshots) {
    const size_t count = snap.nodes.size();
    if (count < 3) continue;
    const auto& nodes = snap.nodes;
    for (size_t i = 0; i < count; ++i) {
      const size_t ip = (i + 1 < count) ? i + 1 : i;
      const size_t im = (i > 0) ? i - 1 : i;
      const double dth = nodes[ip].theta - nodes[im].theta;
      const double hp = (dth != 0.0) ? (nodes[ip].h - nodes[im].h) / dth : 0.0;
      auto& nd = snap.nodes[i];
      nd.r = nd.h * std::sin(nd.theta) + hp * std::cos(nd.theta);
      nd.z = nd.h * std::cos(nd.theta) - hp * std::sin(nd.theta);
    }
  }
  return traj;
}

}  // namespace gammaflow
