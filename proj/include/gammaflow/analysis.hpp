#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gammaflow/models.hpp"
#include "gammaflow/trajectory.hpp"

namespace gammaflow {

// Parabolic rescaling about an axis point: x -> a (x - center), t -> a^2 (t - T).
struct RescalingSpec {
  double center_z = 0.0;
  double a = 1.0;
  double T = 0.0;
};

struct EnvelopeReport {
  double constant = 0.0;       // the K or c tested
  double max_violation = 0.0;  // <= 0 means pass
  bool pass = false;
  double empirical_constant = 0.0;  // largest passing value where applicable
  std::vector<std::pair<double, double>> per_snapshot;  // (time, margin)
  std::string note;
};

// max over snapshots and nodes of sqrt(T - t) |A|. T defaults to the
// trajectory's extinction estimate; every snapshot must predate T.
double type1_sup(const Trajectory& traj, double T);
double type1_sup(const Trajectory& traj);

Trajectory parabolic_rescale(const Trajectory& traj, const RescalingSpec& spec);

// Fattening envelope: h(theta, t) - h(theta, t0) <= K sqrt(t0 - t) for every
// earlier snapshot. Margins are reported per snapshot.
EnvelopeReport displacement_envelope_check(const Trajectory& traj, double K);

// Run-supremum of sqrt(t0 - t) max G; twice this value is the integrated
// displacement constant the envelope check is guaranteed to satisfy.
double type1_speed_sup(const Trajectory& traj);

// Inner ball: recentered support min >= c sqrt(t0 - t) for snapshots with
// t0 - t >= 3. Also reports the largest empirical c.
EnvelopeReport inner_ball_check(const Trajectory& traj, double c,
                                double origin_z);

struct LowerSpeedResult {
  double c_L = 0.0;
  int skipped_snapshots = 0;
};

// min over nodes within L sqrt(t0 - t) of the origin of sqrt(1 + t0 - t) G.
LowerSpeedResult lower_speed_check(const Trajectory& traj, double L);

// Per snapshot, min over nodes of lambda_min / H - 1/n; in [-1/n, 0], zero
// exactly on round spheres. Requires valid radii and H > 0.
std::vector<std::pair<double, double>> umbilicity_gap(const Trajectory& traj);

// Empirical interior-estimate constant over the window [t0 - K^2 r^2, t0]:
//   sup (L^2 r^2 - |x-p|^2) (t - t_w)^(1/2) G / ((1+K) L^2 theta_eff^-3 r^2)
// with theta_eff the measured radial graphicality inf nu.(x-p)/|x-p| over
// the doubled ball. Requires B(p, r) inside every body of the window.
double interior_estimate_statistic(const Trajectory& traj, double p_z,
                                   double r, double L, double K);

struct BarrierPlacement {
  double a = 1.0;         // scale
  double z_offset = 0.0;  // axial shift of the barrier
  double t_offset = 0.0;  // barrier time at the first snapshot
};

// Containment of every snapshot inside the moving paraboloid barrier
//   z >= (c/2a) r^2 + (t + t_offset)/a + z_offset.
EnvelopeReport barrier_comparison(const Trajectory& traj,
                                  const TranslatingParaboloid& bowl,
                                  const BarrierPlacement& placement,
                                  double eps_grid = 1e-9);

// Heuristic recession-cone dimension of a sampled convex body: directions
// whose gauge (radial) function exceeds threshold times its median indicate
// unbounded factors; axis hits count 1, equatorial hits count n.
int recession_dimension(const Snapshot& body, int n, double threshold = 50.0);

}  // namespace gammaflow
