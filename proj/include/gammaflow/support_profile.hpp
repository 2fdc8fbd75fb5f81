#pragma once

#include <string>
#include <vector>

#include "gammaflow/speed.hpp"
#include "gammaflow/trajectory.hpp"

namespace gammaflow {

// Discretized support function h(theta), theta in [0, pi] on a uniform grid
// of N intervals, of a closed convex hypersurface of revolution in R^(n+1).
// Poles are regularized by even reflection.
struct SupportProfile {
  int n = 2;
  double time = 0.0;
  std::vector<double> h;  // N+1 samples

  int intervals() const { return static_cast<int>(h.size()) - 1; }
  double dtheta() const { return M_PI / intervals(); }
  double theta(int i) const { return M_PI * i / intervals(); }
};

SupportProfile make_sphere_profile(int n, int N, double radius);
// Ellipsoid of revolution: equatorial semi-axis a, polar semi-axis b.
SupportProfile make_ellipsoid_profile(int n, int N, double a, double b);

struct PrincipalRadii {
  double rho1;  // profile direction, h'' + h
  double rho2;  // rotational direction, h' cot(theta) + h; = rho1 at poles
};

// Fourth-order central differences with even reflection across the poles.
double support_derivative(const SupportProfile& p, int i);
double support_second_derivative(const SupportProfile& p, int i);

// Radii at a node. Throws SolverError (convexity loss) if a radius fails to
// be positive when `checked`.
PrincipalRadii principal_radii(const SupportProfile& p, int i,
                               bool checked = true);

// Failure inside a step: the event carries the last valid profile.
class SolverError : public std::runtime_error {
 public:
  enum class Kind { ConvexityLoss, ConeExit };

  SolverError(Kind kind, int node, double theta, std::vector<double> lambda,
              SupportProfile last_valid, const std::string& msg)
      : std::runtime_error(msg),
        kind_(kind),
        node_(node),
        theta_(theta),
        lambda_(std::move(lambda)),
        last_valid_(std::move(last_valid)) {}

  Kind kind() const { return kind_; }
  int node() const { return node_; }
  double theta() const { return theta_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const SupportProfile& last_valid() const { return last_valid_; }

 private:
  Kind kind_;
  int node_;
  double theta_;
  std::vector<double> lambda_;
  SupportProfile last_valid_;
};

// Explicit Heun step of dh/dt = -gamma(1/rho1, 1/rho2, ...). dt must respect
// cfl_dt. Throws SolverError on convexity loss or cone exit.
SupportProfile step_support(const SupportProfile& profile,
                            const SpeedFunction& speed, double dt);

// dt = safety * dtheta^2 * (min radius)^2 / max gradient entry.
double cfl_dt(const SupportProfile& profile, const SpeedFunction& speed,
              double safety = 0.2);

struct RunOptions {
  double safety = 0.2;
  long max_steps = 50'000'000;
  uint64_t seed = 0;
};

struct RunResult {
  Trajectory trajectory;
  long steps = 0;
  std::string stop_reason;
  bool truncated = false;
};

// Steps until min rho1 < stop_radius, convexity loss, or cone exit;
// snapshots every `snapshot_stride` steps plus the final state. The
// extinction estimate extrapolates the squared inradius over the last ten
// snapshots.
RunResult run_to_extinction(const SupportProfile& initial,
                            const SpeedFunction& speed, double stop_radius,
                            int snapshot_stride, RunOptions opts = {});

// Snapshot of a profile with all derived fields.
Snapshot profile_snapshot(const SupportProfile& p, const SpeedFunction& speed);

double min_support(const SupportProfile& p);

}  // namespace gammaflow
