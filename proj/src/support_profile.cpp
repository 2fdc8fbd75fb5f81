#include "gammaflow/support_profile.hpp"

#include <algorithm>
#include <cmath>

#include "gammaflow/errors.hpp"

namespace gammaflow {

namespace {

// Reflected index for even extension across theta = 0 and theta = pi.
inline int reflect(int i, int N) {
  if (i < 0) return -i;
  if (i > N) return 2 * N - i;
  return i;
}

inline double d1(const std::vector<double>& h, int i, int N, double dth) {
  const double a = h[reflect(i - 2, N)];
  const double b = h[reflect(i - 1, N)];
  const double c = h[reflect(i + 1, N)];
  const double d = h[reflect(i + 2, N)];
  return (a - 8.0 * b + 8.0 * c - d) / (12.0 * dth);
}

inline double d2(const std::vector<double>& h, int i, int N, double dth) {
  const double a = h[reflect(i - 2, N)];
  const double b = h[reflect(i - 1, N)];
  const double c = h[i];
  const double d = h[reflect(i + 1, N)];
  const double e = h[reflect(i + 2, N)];
  return (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * dth * dth);
}

constexpr int kMaxN = 16;

struct NodeEval {
  double rho1;
  double rho2;
  double G;
};

}  // namespace

SupportProfile make_sphere_profile(int n, int N, double radius) {
  SupportProfile p;
  p.n = n;
  p.h.assign(N + 1, radius);
  return p;
}

SupportProfile make_ellipsoid_profile(int n, int N, double a, double b) {
  SupportProfile p;
  p.n = n;
  p.h.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double th = M_PI * i / N;
    const double s = std::sin(th), c = std::cos(th);
    p.h[i] = std::sqrt(a * a * s * s + b * b * c * c);
  }
  return p;
}

double support_derivative(const SupportProfile& p, int i) {
  return d1(p.h, i, p.intervals(), p.dtheta());
}

double support_second_derivative(const SupportProfile& p, int i) {
  return d2(p.h, i, p.intervals(), p.dtheta());
}

PrincipalRadii principal_radii(const SupportProfile& p, int i, bool checked) {
  const int N = p.intervals();
  const double dth = p.dtheta();
  const double rho1 = d2(p.h, i, N, dth) + p.h[i];
  double rho2;
  if (i == 0 || i == N) {
    rho2 = rho1;  // L'Hopital at the poles
  } else {
    const double th = p.theta(i);
    rho2 = d1(p.h, i, N, dth) * std::cos(th) / std::sin(th) + p.h[i];
  }
  if (checked) {
    if (!(rho1 > 0.0) || (p.n > 1 && !(rho2 > 0.0))) {
      throw SolverError(SolverError::Kind::ConvexityLoss, i, p.theta(i),
                        {1.0 / rho1, 1.0 / rho2}, p,
                        "convexity loss at node " + std::to_string(i) +
                            " (theta=" + std::to_string(p.theta(i)) +
                            ", rho1=" + std::to_string(rho1) +
                            ", rho2=" + std::to_string(rho2) + ")");
    }
  }
  return {rho1, rho2};
}

namespace {

// Evaluates radii and the speed at every node, throwing SolverError with
// `origin` as the last valid profile on failure.
void eval_speed_field(const SupportProfile& p, const SpeedFunction& speed,
                      const SupportProfile& origin, std::vector<NodeEval>& out) {
  const int N = p.intervals();
  const int n = p.n;
  double lam[kMaxN];
  out.resize(N + 1);
  const auto& cone = speed.cone();
  for (int i = 0; i <= N; ++i) {
    PrincipalRadii rr;
    try {
      rr = principal_radii(p, i, true);
    } catch (const SolverError& e) {
      throw SolverError(e.kind(), e.node(), e.theta(), e.lambda(), origin,
                        e.what());
    }
    lam[0] = 1.0 / rr.rho1;
    for (int k = 1; k < n; ++k) lam[k] = 1.0 / rr.rho2;
    const std::span<const double> lspan(lam, static_cast<size_t>(n));
    if (cone.facet_count() > 0) {
      Eigen::Map<const Eigen::VectorXd> lv(lam, n);
      if (!cone.contains(lv)) {
        throw SolverError(SolverError::Kind::ConeExit, i, p.theta(i),
                          std::vector<double>(lam, lam + n), origin,
                          "cone exit at node " + std::to_string(i));
      }
    }
    out[i] = {rr.rho1, rr.rho2, speed.value_unchecked(lspan)};
  }
}

}  // namespace

SupportProfile step_support(const SupportProfile& profile,
                            const SpeedFunction& speed, double dt) {
  if (profile.n != speed.dimension()) {
    throw DomainError("profile dimension does not match speed");
  }
  if (profile.n > kMaxN) throw DomainError("dimension too large");
  const int N = profile.intervals();

  std::vector<NodeEval> g1, g2;
  eval_speed_field(profile, speed, profile, g1);
  if (dt == 0.0) return profile;

  SupportProfile stage = profile;
  for (int i = 0; i <= N; ++i) stage.h[i] = profile.h[i] - dt * g1[i].G;
  stage.time = profile.time + dt;
  eval_speed_field(stage, speed, profile, g2);

  SupportProfile next = profile;
  for (int i = 0; i <= N; ++i) {
    next.h[i] = profile.h[i] - 0.5 * dt * (g1[i].G + g2[i].G);
  }
  next.time = profile.time + dt;

  std::vector<NodeEval> check;
  eval_speed_field(next, speed, profile, check);
  return next;
}

double cfl_dt(const SupportProfile& profile, const SpeedFunction& speed,
              double safety) {
  const int N = profile.intervals();
  const int n = profile.n;
  double lam[kMaxN];
  SpeedJet jet;
  jet.grad.resize(n);
  jet.hess.resize(n, n);
  double min_rho = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  for (int i = 0; i <= N; ++i) {
    const PrincipalRadii rr = principal_radii(profile, i, true);
    min_rho = std::min(min_rho, rr.rho1);
    if (n > 1) min_rho = std::min(min_rho, rr.rho2);
    lam[0] = 1.0 / rr.rho1;
    for (int k = 1; k < n; ++k) lam[k] = 1.0 / rr.rho2;
    speed.jet_into({lam, static_cast<size_t>(n)}, jet);
    max_grad = std::max(max_grad, jet.grad.maxCoeff());
  }
  const double dth = profile.dtheta();
  return safety * dth * dth * min_rho * min_rho / std::max(max_grad, 1e-300);
}

Snapshot profile_snapshot(const SupportProfile& p, const SpeedFunction& speed) {
  const int N = p.intervals();
  const int n = p.n;
  Snapshot snap;
  snap.time = p.time;
  snap.nodes.resize(N + 1);
  double lam[kMaxN];
  for (int i = 0; i <= N; ++i) {
    const PrincipalRadii rr = principal_radii(p, i, false);
    const double th = p.theta(i);
    const double hp = support_derivative(p, i);
    TrajNode& nd = snap.nodes[i];
    nd.theta = th;
    nd.h = p.h[i];
    nd.rho1 = rr.rho1;
    nd.rho2 = rr.rho2;
    lam[0] = 1.0 / rr.rho1;
    double a2 = lam[0] * lam[0];
    for (int k = 1; k < n; ++k) {
      lam[k] = 1.0 / rr.rho2;
      a2 += lam[k] * lam[k];
    }
    nd.G = speed.value_unchecked({lam, static_cast<size_t>(n)});
    nd.normA = std::sqrt(a2);
    nd.r = p.h[i] * std::sin(th) + hp * std::cos(th);
    nd.z = p.h[i] * std::cos(th) - hp * std::sin(th);
  }
  return snap;
}

double min_support(const SupportProfile& p) {
  return *std::min_element(p.h.begin(), p.h.end());
}

namespace {

// Shared per-step state for the run loop: one radii/speed pass per stage and
// the CFL ingredients from the same sweep.
struct StageField {
  std::vector<double> g;
  double min_rho1 = 0.0;
  double min_rho = 0.0;
  double max_grad = 0.0;
};

// Evaluates radii, validity, cone membership, speed and (optionally) the
// gradient bound in a single sweep.
void eval_stage(const SupportProfile& p, const SpeedFunction& speed,
                const SupportProfile& origin, bool with_jets, SpeedJet& jet,
                StageField& out) {
  const int N = p.intervals();
  const int n = p.n;
  out.g.resize(N + 1);
  out.min_rho1 = std::numeric_limits<double>::infinity();
  out.min_rho = std::numeric_limits<double>::infinity();
  out.max_grad = 0.0;
  double lam[kMaxN];
  const auto& cone = speed.cone();
  for (int i = 0; i <= N; ++i) {
    PrincipalRadii rr;
    try {
      rr = principal_radii(p, i, true);
    } catch (const SolverError& e) {
      throw SolverError(e.kind(), e.node(), e.theta(), e.lambda(), origin,
                        e.what());
    }
    out.min_rho1 = std::min(out.min_rho1, rr.rho1);
    out.min_rho = std::min(out.min_rho, rr.rho1);
    if (n > 1) out.min_rho = std::min(out.min_rho, rr.rho2);
    lam[0] = 1.0 / rr.rho1;
    for (int k = 1; k < n; ++k) lam[k] = 1.0 / rr.rho2;
    const std::span<const double> lspan(lam, static_cast<size_t>(n));
    if (cone.facet_count() > 0) {
      Eigen::Map<const Eigen::VectorXd> lv(lam, n);
      if (!cone.contains(lv)) {
        throw SolverError(SolverError::Kind::ConeExit, i, p.theta(i),
                          std::vector<double>(lam, lam + n), origin,
                          "cone exit at node " + std::to_string(i));
      }
    }
    if (with_jets) {
      speed.jet_into(lspan, jet);
      out.g[i] = jet.value;
      out.max_grad = std::max(out.max_grad, jet.grad.maxCoeff());
    } else {
      out.g[i] = speed.value_unchecked(lspan);
    }
  }
}

// Least-squares linear fit of inradius^2 against time over the last few
// snapshots; the root is the extinction estimate. Exact for homothetic
// shrinkers, whose squared radius is linear in t.
double extrapolate_extinction(const Trajectory& traj) {
  const int count = static_cast<int>(traj.snapshots.size());
  const int use = std::min(count, 10);
  if (use < 2) return std::numeric_limits<double>::quiet_NaN();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int k = count - use; k < count; ++k) {
    const auto& snap = traj.snapshots[k];
    double rin = std::numeric_limits<double>::infinity();
    for (const auto& nd : snap.nodes) rin = std::min(rin, nd.h);
    const double t = snap.time;
    const double y = rin * rin;
    st += t; sy += y; stt += t * t; sty += t * y;
  }
  const double denom = use * stt - st * st;
  if (std::abs(denom) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
  const double beta = (use * sty - st * sy) / denom;
  const double alpha = (sy - beta * st) / use;
  if (beta >= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -alpha / beta;
}

}  // namespace

RunResult run_to_extinction(const SupportProfile& initial,
                            const SpeedFunction& speed, double stop_radius,
                            int snapshot_stride, RunOptions opts) {
  if (snapshot_stride < 1) snapshot_stride = 1;
  if (initial.n > kMaxN) throw DomainError("dimension too large");
  RunResult res;
  Trajectory& traj = res.trajectory;
  traj.n = initial.n;
  traj.speed_id = speed.id();
  traj.grid = initial.intervals();
  traj.cfl_safety = opts.safety;
  traj.snapshot_stride = snapshot_stride;
  traj.seed = opts.seed;

  const int N = initial.intervals();
  const double dth = initial.dtheta();
  const int n = initial.n;

  SupportProfile cur = initial;
  SupportProfile stage = initial;
  SupportProfile next = initial;
  StageField f1, f2;
  SpeedJet jet;
  jet.grad.resize(n);
  jet.hess.resize(n, n);

  long since_snapshot = 0;
  try {
    // One jet-bearing sweep per step supplies the speed field, the stop
    // check, and the CFL bound; the Heun corrector costs a second sweep.
    eval_stage(cur, speed, cur, true, jet, f1);
    traj.snapshots.push_back(profile_snapshot(cur, speed));
    while (res.steps < opts.max_steps) {
      if (f1.min_rho1 < stop_radius) {
        res.stop_reason = "stop_radius";
        break;
      }
      const double dt = opts.safety * dth * dth * f1.min_rho * f1.min_rho /
                        std::max(f1.max_grad, 1e-300);
      for (int i = 0; i <= N; ++i) stage.h[i] = cur.h[i] - dt * f1.g[i];
      stage.time = cur.time + dt;
      eval_stage(stage, speed, cur, false, jet, f2);
      for (int i = 0; i <= N; ++i) {
        next.h[i] = cur.h[i] - 0.5 * dt * (f1.g[i] + f2.g[i]);
      }
      next.time = cur.time + dt;
      eval_stage(next, speed, cur, true, jet, f1);  // validates the update
      std::swap(cur, next);
      ++res.steps;
      if (++since_snapshot >= snapshot_stride) {
        traj.snapshots.push_back(profile_snapshot(cur, speed));
        since_snapshot = 0;
      }
    }
  } catch (const SolverError& e) {
    res.stop_reason = (e.kind() == SolverError::Kind::ConvexityLoss)
                          ? "convexity_loss"
                          : "cone_exit";
    res.truncated = true;
    cur = e.last_valid();
  }
  if (res.stop_reason.empty()) {
    res.stop_reason = "max_steps";
    res.truncated = true;
  }
  if (traj.snapshots.empty() || traj.snapshots.back().time != cur.time) {
    traj.snapshots.push_back(profile_snapshot(cur, speed));
  }
  traj.truncated = res.truncated;
  traj.stop_reason = res.stop_reason;
  traj.extinction_estimate = extrapolate_extinction(traj);
  return res;
}

}  // namespace gammaflow
