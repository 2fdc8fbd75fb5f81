#include "gammaflow/models.hpp"

#include <algorithm>
#include <cmath>

#include "gammaflow/errors.hpp"

namespace gammaflow {

namespace {

void require_valid_m(const SpeedFunction& speed, int m, int lo) {
  const int mb = mbar(speed);
  if (m < lo || m > mb) {
    throw DomainError("model: m=" + std::to_string(m) + " out of range [" +
                      std::to_string(lo) + ", " + std::to_string(mb) + "]");
  }
}

}  // namespace

double cylinder_radius(const ShrinkingCylinder& cyl, double t) {
  require_valid_m(cyl.speed, cyl.m, 0);
  if (!(t < 0.0)) throw DomainError("cylinder extinct at t >= 0");
  const double c = cylinder_constant(cyl.speed, cyl.m);
  return std::sqrt(-2.0 * t / c);
}

double cylinder_type1_constant(const ShrinkingCylinder& cyl) {
  require_valid_m(cyl.speed, cyl.m, 0);
  const double c = cylinder_constant(cyl.speed, cyl.m);
  return std::sqrt(0.5 * (cyl.n() - cyl.m) * c);
}

Eigen::VectorXd cylinder_spectrum(const ShrinkingCylinder& cyl, double t) {
  const double r = cylinder_radius(cyl, t);
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(cyl.n(), 1.0 / r);
  lam.head(cyl.m).setZero();
  return lam;
}

Eigen::VectorXd paraboloid_curvatures(const TranslatingParaboloid& bowl,
                                      double s) {
  require_valid_m(bowl.speed, bowl.m, 1);
  if (s < 0.0) throw DomainError("paraboloid: s must be >= 0");
  const int n = bowl.n();
  const double c = cylinder_constant(bowl.speed, bowl.m);
  const double w2 = 1.0 + c * c * s * s;
  const double pref = c / std::sqrt(w2);
  Eigen::VectorXd lam = Eigen::VectorXd::Constant(n, pref);
  lam.head(bowl.m - 1).setZero();
  lam[bowl.m - 1] = pref / w2;  // the profile direction flattens off-vertex
  return lam;
}

double paraboloid_subsolution_residual(const TranslatingParaboloid& bowl,
                                       double s) {
  const Eigen::VectorXd lam = paraboloid_curvatures(bowl, s);
  const double c = cylinder_constant(bowl.speed, bowl.m);
  const double speed_val = bowl.speed.value_unchecked(
      {lam.data(), static_cast<size_t>(lam.size())});
  return speed_val - 1.0 / std::sqrt(1.0 + c * c * s * s);
}

std::vector<double> residual_s_grid() {
  std::vector<double> grid;
  grid.reserve(513);
  grid.push_back(0.0);
  const int count = 512;
  for (int i = 0; i < count; ++i) {
    const double e = -3.0 + 6.0 * i / (count - 1);
    grid.push_back(std::pow(10.0, e));
  }
  return grid;
}

namespace {

struct ProfilePoint {
  double rho;
  double h;
};

double point_segment_gap(const ProfilePoint& p, double seg_rho, double h_lo,
                         double h_hi) {
  const double hc = std::clamp(p.h, h_lo, h_hi);
  const double dr = p.rho - seg_rho;
  const double dh = p.h - hc;
  return std::sqrt(dr * dr + dh * dh);
}

}  // namespace

double rescaled_paraboloid_gap(const TranslatingParaboloid& bowl, double a,
                               double t, double region_radius) {
  require_valid_m(bowl.speed, bowl.m, 1);
  if (!(a > 0.0)) throw DomainError("rescale factor a must be > 0");
  if (!(t < 0.0)) throw DomainError("gap defined for t < 0");
  if (region_radius < 0.0) throw DomainError("region radius must be >= 0");

  const double c = cylinder_constant(bowl.speed, bowl.m);
  const double R = std::sqrt(-2.0 * t / c);
  const double L = region_radius;

  // Meridian profiles in the (rho, height) half-plane. The cylinder is the
  // vertical segment rho = R; the rescaled paraboloid boundary is
  // rho_a(hgt) = sqrt(R^2 + 2 a hgt / c) above its vertex height t/a. Both
  // pass through (R, 0) for every a.
  auto par_rho = [&](double hgt) { return std::sqrt(R * R + 2.0 * a * hgt / c); };
  const double vertex = t / a;
  const double par_lo = std::max(-L, vertex);
  const double par_hi = L;
  if (par_lo > par_hi) return 0.0;

  const int kSamples = 1024;
  std::vector<ProfilePoint> par_pts(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    const double hgt = par_lo + (par_hi - par_lo) * i / kSamples;
    par_pts[i] = {par_rho(hgt), hgt};
  }

  double gap = 0.0;

  // Paraboloid points against the cylinder segment (exact distance).
  for (const auto& p : par_pts) {
    gap = std::max(gap, point_segment_gap(p, R, -L, L));
  }

  // Cylinder points against the paraboloid curve: bracket on the dense
  // sampling, then ternary refinement in the height parameter.
  auto dist_to_par = [&](double hgt_c) {
    auto d2 = [&](double hg) {
      const double dr = par_rho(hg) - R;
      const double dh = hg - hgt_c;
      return dr * dr + dh * dh;
    };
    int best = 0;
    double bestv = d2(par_pts[0].h);
    for (int i = 1; i <= kSamples; ++i) {
      const double v = d2(par_pts[i].h);
      if (v < bestv) {
        bestv = v;
        best = i;
      }
    }
    double lo = par_pts[std::max(0, best - 1)].h;
    double hi = par_pts[std::min(kSamples, best + 1)].h;
    for (int it = 0; it < 80; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (d2(m1) < d2(m2)) hi = m2; else lo = m1;
    }
    return std::sqrt(d2(0.5 * (lo + hi)));
  };

  const int kCyl = 1024;
  for (int i = 0; i <= kCyl; ++i) {
    const double hgt = -L + 2.0 * L * i / kCyl;
    gap = std::max(gap, dist_to_par(hgt));
  }
  return gap;
}

Trajectory exact_sphere_trajectory(const SpeedFunction& speed, double T,
                                   const std::vector<double>& times, int N,
                                   double center_z) {
  const int n = speed.dimension();
  const double c0 = cylinder_constant(speed, 0);
  Trajectory traj;
  traj.n = n;
  traj.speed_id = speed.id();
  traj.grid = N;
  traj.stop_reason = "exact-model";
  traj.extinction_estimate = T;
  for (double t : times) {
    if (!(t < T)) throw DomainError("sphere sample at or after extinction");
    const double R = std::sqrt(2.0 * (T - t) / c0);
    Snapshot snap;
    snap.time = t;
    snap.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
      const double theta = M_PI * i / N;
      TrajNode& nd = snap.nodes[i];
      nd.theta = theta;
      nd.h = R + center_z * std::cos(theta);
      nd.rho1 = R;
      nd.rho2 = R;
      nd.G = 1.0 / (c0 * R);
      nd.normA = std::sqrt(static_cast<double>(n)) / R;
      nd.r = R * std::sin(theta);
      nd.z = R * std::cos(theta) + center_z;
    }
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

Trajectory sample_cylinder_trajectory(const ShrinkingCylinder& cyl,
                                      const std::vector<double>& times,
                                      int nodes_per_snapshot,
                                      double axis_window) {
  require_valid_m(cyl.speed, cyl.m, 0);
  const int n = cyl.n();
  const double c = cylinder_constant(cyl.speed, cyl.m);
  Trajectory traj;
  traj.n = n;
  traj.speed_id = cyl.speed.id();
  traj.stop_reason = "exact-model";
  traj.extinction_estimate = 0.0;
  for (double t : times) {
    const double R = cylinder_radius(cyl, t);
    Snapshot snap;
    snap.time = t;
    snap.nodes.resize(nodes_per_snapshot);
    for (int i = 0; i < nodes_per_snapshot; ++i) {
      TrajNode& nd = snap.nodes[i];
      nd.theta = 0.5 * M_PI;
      nd.h = R;
      if (cyl.m == 0) {
        nd.rho1 = R;
        nd.rho2 = R;
      } else if (cyl.m == 1) {
        nd.rho1 = std::numeric_limits<double>::infinity();
        nd.rho2 = R;
      }  // m >= 2 spectra are not radii-representable; leave NaN
      nd.G = 1.0 / (c * R);
      nd.normA = std::sqrt(static_cast<double>(n - cyl.m)) / R;
      nd.r = R;
      nd.z = (nodes_per_snapshot > 1)
                 ? axis_window * (2.0 * i / (nodes_per_snapshot - 1) - 1.0)
                 : 0.0;
    }
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

}  // namespace gammaflow
