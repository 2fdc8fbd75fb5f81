#include "gammaflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gammaflow/errors.hpp"

namespace gammaflow {

namespace {

double recentered_support(const TrajNode& nd, double origin_z) {
  // Support of the shifted body in direction theta.
  return nd.h - origin_z * std::cos(nd.theta);
}

double node_distance(const TrajNode& nd, double p_z) {
  const double dz = nd.z - p_z;
  return std::sqrt(nd.r * nd.r + dz * dz);
}

}  // namespace

double type1_sup(const Trajectory& traj, double T) {
  if (traj.empty()) throw DomainError("empty trajectory");
  double sup = 0.0;
  for (const auto& snap : traj.snapshots) {
    if (!(snap.time < T)) {
      throw DomainError("snapshot at t=" + std::to_string(snap.time) +
                        " not before reference time " + std::to_string(T));
    }
    const double w = std::sqrt(T - snap.time);
    for (const auto& nd : snap.nodes) sup = std::max(sup, w * nd.normA);
  }
  return sup;
}

double type1_sup(const Trajectory& traj) {
  if (std::isnan(traj.extinction_estimate)) {
    throw DomainError("trajectory has no extinction estimate; pass T");
  }
  return type1_sup(traj, traj.extinction_estimate);
}

Trajectory parabolic_rescale(const Trajectory& traj, const RescalingSpec& spec) {
  if (!(spec.a > 0.0)) throw DomainError("rescale factor must be positive");
  Trajectory out = traj;
  const double a = spec.a;
  for (auto& snap : out.snapshots) {
    snap.time = a * a * (snap.time - spec.T);
    for (auto& nd : snap.nodes) {
      nd.h = a * (nd.h - spec.center_z * std::cos(nd.theta));
      nd.rho1 *= a;
      nd.rho2 *= a;
      nd.G /= a;
      nd.normA /= a;
      nd.r *= a;
      nd.z = a * (nd.z - spec.center_z);
    }
  }
  if (!std::isnan(out.extinction_estimate)) {
    out.extinction_estimate = a * a * (out.extinction_estimate - spec.T);
  }
  return out;
}

double type1_speed_sup(const Trajectory& traj) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const double t0 = traj.last_time();
  double sup = 0.0;
  for (const auto& snap : traj.snapshots) {
    const double w = std::sqrt(std::max(0.0, t0 - snap.time));
    for (const auto& nd : snap.nodes) sup = std::max(sup, w * nd.G);
  }
  return sup;
}

EnvelopeReport displacement_envelope_check(const Trajectory& traj, double K) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const Snapshot& last = traj.snapshots.back();
  const double t0 = last.time;
  EnvelopeReport rep;
  rep.constant = K;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& snap : traj.snapshots) {
    double disp = -std::numeric_limits<double>::infinity();
    const size_t count = std::min(snap.nodes.size(), last.nodes.size());
    for (size_t i = 0; i < count; ++i) {
      disp = std::max(disp, snap.nodes[i].h - last.nodes[i].h);
    }
    const double margin = disp - K * std::sqrt(std::max(0.0, t0 - snap.time));
    rep.per_snapshot.emplace_back(snap.time, margin);
    rep.max_violation = std::max(rep.max_violation, margin);
  }
  rep.pass = rep.max_violation <= 0.0;
  return rep;
}

EnvelopeReport inner_ball_check(const Trajectory& traj, double c,
                                double origin_z) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const Snapshot& last = traj.snapshots.back();
  const double t0 = last.time;
  {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& nd : last.nodes) {
      m = std::min(m, recentered_support(nd, origin_z));
    }
    if (!(m > 0.0)) {
      throw DomainError("origin lies outside the final body (margin " +
                        std::to_string(m) + ")");
    }
  }
  EnvelopeReport rep;
  rep.constant = c;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.empirical_constant = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& snap : traj.snapshots) {
    const double window = t0 - snap.time;
    if (window < 3.0) continue;
    any = true;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& nd : snap.nodes) {
      m = std::min(m, recentered_support(nd, origin_z));
    }
    const double w = std::sqrt(window);
    rep.per_snapshot.emplace_back(snap.time, c * w - m);
    rep.max_violation = std::max(rep.max_violation, c * w - m);
    rep.empirical_constant = std::min(rep.empirical_constant, m / w);
  }
  if (!any) {
    rep.max_violation = 0.0;
    rep.empirical_constant = 0.0;
    rep.note = "no snapshot with window >= 3";
  }
  rep.pass = rep.max_violation <= 0.0;
  return rep;
}

LowerSpeedResult lower_speed_check(const Trajectory& traj, double L) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const double t0 = traj.last_time();
  LowerSpeedResult res;
  res.c_L = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& snap : traj.snapshots) {
    const double window = t0 - snap.time;
    const double ball = L * std::sqrt(std::max(0.0, window));
    double m = std::numeric_limits<double>::infinity();
    bool in_ball = false;
    for (const auto& nd : snap.nodes) {
      if (node_distance(nd, 0.0) <= ball) {
        in_ball = true;
        m = std::min(m, std::sqrt(1.0 + window) * nd.G);
      }
    }
    if (!in_ball) {
      ++res.skipped_snapshots;
      continue;
    }
    any = true;
    res.c_L = std::min(res.c_L, m);
  }
  if (!any) res.c_L = 0.0;
  return res;
}

std::vector<std::pair<double, double>> umbilicity_gap(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  const int n = traj.n;
  for (const auto& snap : traj.snapshots) {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& nd : snap.nodes) {
      const double k1 = 1.0 / nd.rho1;
      const double k2 = 1.0 / nd.rho2;
      const double H = k1 + (n - 1) * k2;
      if (!(H > 0.0)) {
        throw DomainError("nonpositive mean curvature in snapshot at t=" +
                          std::to_string(snap.time));
      }
      const double lmin = std::min(k1, k2);
      gap = std::min(gap, lmin / H - 1.0 / n);
    }
    out.emplace_back(snap.time, gap);
  }
  return out;
}

double interior_estimate_statistic(const Trajectory& traj, double p_z,
                                   double r, double L, double K) {
  if (traj.empty()) throw DomainError("empty trajectory");
  if (!(r > 0.0) || !(L > 1.0) || !(K > 0.0)) {
    throw DomainError("interior estimate requires r > 0, L > 1, K > 0");
  }
  const double t0 = traj.last_time();
  const double tw = t0 - K * K * r * r;
  if (traj.first_time() > tw + 1e-12) {
    throw DomainError("trajectory does not cover the window [t0 - K^2 r^2, t0]");
  }

  // Containment of B(p, r) in every body of the window, checked via the
  // recentered support function.
  for (const auto& snap : traj.snapshots) {
    if (snap.time < tw - 1e-12) continue;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& nd : snap.nodes) {
      m = std::min(m, recentered_support(nd, p_z));
    }
    if (m < r - 1e-9) {
      throw DomainError("ball not contained in body at t=" +
                        std::to_string(snap.time) + " (support margin " +
                        std::to_string(m - r) + ")");
    }
  }

  double theta_eff = 1.0;
  double sup = 0.0;
  for (const auto& snap : traj.snapshots) {
    if (snap.time < tw - 1e-12) continue;
    const double w = std::sqrt(std::max(0.0, snap.time - tw));
    for (const auto& nd : snap.nodes) {
      const double d = node_distance(nd, p_z);
      if (d < 2.0 * L * r && d > 0.0) {
        // nu.(x - p)/|x - p| in the meridian plane
        const double quality =
            (std::sin(nd.theta) * nd.r + std::cos(nd.theta) * (nd.z - p_z)) / d;
        theta_eff = std::min(theta_eff, quality);
      }
      if (d < L * r) {
        sup = std::max(sup, (L * L * r * r - d * d) * w * nd.G);
      }
    }
  }
  theta_eff = std::max(theta_eff, 1e-9);
  const double norm = (1.0 + K) * L * L * r * r / (theta_eff * theta_eff * theta_eff);
  return sup / norm;
}

EnvelopeReport barrier_comparison(const Trajectory& traj,
                                  const TranslatingParaboloid& bowl,
                                  const BarrierPlacement& placement,
                                  double eps_grid) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const double c = cylinder_constant(bowl.speed, bowl.m);
  const double a = placement.a;
  if (!(a > 0.0)) throw DomainError("barrier scale must be positive");
  const double t_first = traj.first_time();

  auto snapshot_margin = [&](const Snapshot& snap) {
    const double tb = (snap.time - t_first) + placement.t_offset;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& nd : snap.nodes) {
      const double barrier_z =
          (c / (2.0 * a)) * nd.r * nd.r + tb / a + placement.z_offset;
      m = std::min(m, nd.z - barrier_z);
    }
    return m;
  };

  const double initial_margin = snapshot_margin(traj.snapshots.front());
  if (initial_margin < 0.0) {
    throw DomainError("initial snapshot not contained in the placed barrier "
                      "(margin " + std::to_string(initial_margin) + ")");
  }

  EnvelopeReport rep;
  rep.constant = a;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& snap : traj.snapshots) {
    const double m = snapshot_margin(snap);
    rep.per_snapshot.emplace_back(snap.time, m);
    rep.max_violation = std::max(rep.max_violation, -m);
  }
  rep.pass = rep.max_violation <= eps_grid;
  return rep;
}

int recession_dimension(const Snapshot& body, int n, double threshold) {
  // Gauge (radial) function rho(e) = min over sampled normals of
  // h(nu) / (e.nu); exact for convex bodies in the sampling limit.
  const auto& nodes = body.nodes;
  if (nodes.empty()) return 0;
  const size_t count = nodes.size();
  std::vector<double> gauge(count, std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < count; ++i) {
    const double ti = nodes[i].theta;
    for (size_t j = 0; j < count; ++j) {
      const double tj = nodes[j].theta;
      const double d = std::sin(ti) * std::sin(tj) + std::cos(ti) * std::cos(tj);
      if (d > 1e-12) gauge[i] = std::min(gauge[i], nodes[j].h / d);
    }
  }
  std::vector<double> sorted = gauge;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[count / 2];
  bool axis_hit = false, equatorial_hit = false;
  for (size_t i = 0; i < count; ++i) {
    if (gauge[i] > threshold * median) {
      if (std::abs(std::cos(nodes[i].theta)) > M_SQRT1_2) axis_hit = true;
      else equatorial_hit = true;
    }
  }
  int dim = 0;
  if (equatorial_hit) dim += n;
  if (axis_hit) dim += 1;
  return std::min(dim, n + 1);
}

}  // namespace gammaflow
