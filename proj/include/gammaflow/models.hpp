#pragma once

#include <Eigen/Core>
#include <vector>

#include "gammaflow/speed.hpp"
#include "gammaflow/trajectory.hpp"

namespace gammaflow {

// Homothetically shrinking R^m x S^(n-m); m = 0 is the sphere. Exists for
// t < 0 with radius sqrt(-2 t / c_m).
struct ShrinkingCylinder {
  SpeedFunction speed;
  int m = 0;

  int n() const { return speed.dimension(); }
};

// Vertically translating paraboloid subsolution with m flat factors,
// 1 <= m <= mbar.
struct TranslatingParaboloid {
  SpeedFunction speed;
  int m = 1;

  int n() const { return speed.dimension(); }
};

double cylinder_radius(const ShrinkingCylinder& cyl, double t);

// sqrt(-t) |A| along the exact solution: sqrt((n-m) c_m / 2).
double cylinder_type1_constant(const ShrinkingCylinder& cyl);

Eigen::VectorXd cylinder_spectrum(const ShrinkingCylinder& cyl, double t);

// Principal curvatures of the paraboloid boundary at horizontal distance s
// from its axis: prefactor c/sqrt(1+c^2 s^2), entries (m-1 zeros,
// 1/(1+c^2 s^2), ones).
Eigen::VectorXd paraboloid_curvatures(const TranslatingParaboloid& bowl,
                                      double s);

// G(lambda(s)) - 1/sqrt(1+c^2 s^2): the margin by which the surface's speed
// exceeds its vertical translation rate. Nonnegative for admissible speeds.
double paraboloid_subsolution_residual(const TranslatingParaboloid& bowl,
                                       double s);

// The sweep grid used by residual checks: s = 0 plus 512 log-spaced points
// in [1e-3, 1e3].
std::vector<double> residual_s_grid();

// Hausdorff distance between the boundary of a * B_{t/a^2} and the boundary
// of the shrinking cylinder at time t, restricted to the slab
// |x_{n+1}| <= region_radius, computed from the two meridian profiles.
// Monotone in a and -> 0 as a -> 0.
double rescaled_paraboloid_gap(const TranslatingParaboloid& bowl, double a,
                               double t, double region_radius);

// --- exact-solution samplers (oracle trajectories) --------------------------

// Support-function samples of the shrinking sphere of the given speed with
// extinction time T, on a closed theta grid of N intervals.
Trajectory exact_sphere_trajectory(const SpeedFunction& speed, double T,
                                   const std::vector<double>& times, int N,
                                   double center_z = 0.0);

// Synthetic samples along an exact cylinder: node spectra are the cylinder's,
// positions spread along the axis. Radii fields are NaN for m >= 2.
Trajectory sample_cylinder_trajectory(const ShrinkingCylinder& cyl,
                                      const std::vector<double>& times,
                                      int nodes_per_snapshot = 17,
                                      double axis_window = 10.0);

}  // namespace gammaflow
