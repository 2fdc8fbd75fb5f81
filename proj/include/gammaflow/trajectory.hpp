#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gammaflow {

// One boundary sample of an axisymmetric snapshot. theta parameterizes the
// unit normal (angle from the symmetry axis), h is the support value in that
// direction, (r, z) the corresponding boundary point in the meridian plane.
// rho1 is the profile curvature radius, rho2 the rotational one (multiplicity
// n-1). Synthetic model samples may carry NaN radii and set G/normA directly.
struct TrajNode {
  double theta = 0.0;
  double h = 0.0;
  double rho1 = std::numeric_limits<double>::quiet_NaN();
  double rho2 = std::numeric_limits<double>::quiet_NaN();
  double G = 0.0;
  double normA = 0.0;
  double r = 0.0;
  double z = 0.0;
};

struct Snapshot {
  double time = 0.0;
  std::vector<TrajNode> nodes;
};

struct Trajectory {
  int n = 2;  // hypersurface dimension (curvature count per node)
  std::string speed_id;
  int grid = 0;
  double cfl_safety = 0.0;
  int snapshot_stride = 1;
  uint64_t seed = 0;

  std::vector<Snapshot> snapshots;

  bool truncated = false;
  std::string stop_reason;
  double extinction_estimate = std::numeric_limits<double>::quiet_NaN();

  bool empty() const { return snapshots.empty(); }
  double first_time() const { return snapshots.front().time; }
  double last_time() const { return snapshots.back().time; }
};

// CSV with one row per (snapshot, node):
//   time,node,theta,h,rho1,rho2,G,normA
// preceded by '#' metadata lines. Deterministic formatting.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace gammaflow
