#include "gammaflow/graph_patch.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gammaflow/errors.hpp"

namespace gammaflow {

namespace {

// Depth-2 interior nodes use fourth-order centered stencils, the depth-1
// band second-order.
double dx1(const GraphPatch& p, int i, int j, bool along_x) {
  auto v = [&](int di, int dj) { return p.at(i + di, j + dj); };
  const int depth = along_x ? std::min(i, p.nx - 1 - i) : std::min(j, p.ny - 1 - j);
  const int sx = along_x ? 1 : 0, sy = along_x ? 0 : 1;
  if (depth >= 2) {
    return (v(-2 * sx, -2 * sy) - 8.0 * v(-sx, -sy) + 8.0 * v(sx, sy) -
            v(2 * sx, 2 * sy)) /
           (12.0 * p.dx);
  }
  return (v(sx, sy) - v(-sx, -sy)) / (2.0 * p.dx);
}

double dx2(const GraphPatch& p, int i, int j, bool along_x) {
  auto v = [&](int di, int dj) { return p.at(i + di, j + dj); };
  const int depth = along_x ? std::min(i, p.nx - 1 - i) : std::min(j, p.ny - 1 - j);
  const int sx = along_x ? 1 : 0, sy = along_x ? 0 : 1;
  if (depth >= 2) {
    return (-v(-2 * sx, -2 * sy) + 16.0 * v(-sx, -sy) - 30.0 * v(0, 0) +
            16.0 * v(sx, sy) - v(2 * sx, 2 * sy)) /
           (12.0 * p.dx * p.dx);
  }
  return (v(sx, sy) - 2.0 * v(0, 0) + v(-sx, -sy)) / (p.dx * p.dx);
}

double dxy(const GraphPatch& p, int i, int j) {
  const int depth = std::min({i, p.nx - 1 - i, j, p.ny - 1 - j});
  auto v = [&](int di, int dj) { return p.at(i + di, j + dj); };
  if (depth >= 2) {
    // composition of two fourth-order first derivatives
    auto dy_at = [&](int di) {
      return (v(di, -2) - 8.0 * v(di, -1) + 8.0 * v(di, 1) - v(di, 2)) /
             (12.0 * p.dx);
    };
    return (dy_at(-2) - 8.0 * dy_at(-1) + 8.0 * dy_at(1) - dy_at(2)) /
           (12.0 * p.dx);
  }
  return (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * p.dx * p.dx);
}

struct LocalGeometry {
  Eigen::VectorXd eigs;
  double vol;  // sqrt(1+|Du|^2)
};

LocalGeometry local_geometry(const GraphPatch& p, int i, int j) {
  const int n = p.n;
  LocalGeometry out;
  if (n == 1) {
    const double ux = dx1(p, i, j, true);
    const double uxx = dx2(p, i, j, true);
    const double w2 = 1.0 + ux * ux;
    out.vol = std::sqrt(w2);
    const double pp = 1.0 - ux * ux / (out.vol * (1.0 + out.vol));
    out.eigs = Eigen::VectorXd::Constant(1, pp * uxx * pp / out.vol);
    return out;
  }
  const double ux = dx1(p, i, j, true);
  const double uy = dx1(p, i, j, false);
  const double uxx = dx2(p, i, j, true);
  const double uyy = dx2(p, i, j, false);
  const double uxy = dxy(p, i, j);
  const double w2 = 1.0 + ux * ux + uy * uy;
  const double sq = std::sqrt(w2);
  out.vol = sq;
  Eigen::Matrix2d P;
  const double denom = sq * (1.0 + sq);
  P << 1.0 - ux * ux / denom, -ux * uy / denom, -ux * uy / denom,
      1.0 - uy * uy / denom;
  Eigen::Matrix2d H;
  H << uxx, uxy, uxy, uyy;
  const Eigen::Matrix2d What = (P * H * P) / sq;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(What);
  out.eigs = es.eigenvalues();
  return out;
}

}  // namespace

GraphPatch make_graph_patch(int n, int nodes_per_side, double half_width,
                            const std::function<double(double, double)>& fn) {
  GraphPatch p;
  p.n = n;
  p.nx = nodes_per_side;
  p.ny = (n == 1) ? 1 : nodes_per_side;
  p.dx = 2.0 * half_width / (nodes_per_side - 1);
  p.x0 = -half_width;
  p.y0 = (n == 1) ? 0.0 : -half_width;
  p.u.resize(static_cast<size_t>(p.nx) * p.ny);
  for (int j = 0; j < p.ny; ++j) {
    for (int i = 0; i < p.nx; ++i) {
      const double x = p.x0 + i * p.dx;
      const double y = (n == 1) ? 0.0 : p.y0 + j * p.dx;
      p.at(i, j) = fn(x, y);
    }
  }
  return p;
}

Eigen::VectorXd graph_weingarten_eigenvalues(const GraphPatch& patch, int i,
                                             int j) {
  if (i < 1 || i >= patch.nx - 1 || (patch.n == 2 && (j < 1 || j >= patch.ny - 1))) {
    throw DomainError("weingarten requires an interior node");
  }
  return local_geometry(patch, i, j).eigs;
}

double graph_gradient_bound(const GraphPatch& patch) {
  const int jlo = (patch.n == 1) ? 0 : 1;
  const int jhi = (patch.n == 1) ? 1 : patch.ny - 1;
  double bound = 0.0;
  for (int j = jlo; j < jhi; ++j) {
    for (int i = 1; i < patch.nx - 1; ++i) {
      const double ux = dx1(patch, i, j, true);
      const double uy = (patch.n == 1) ? 0.0 : dx1(patch, i, j, false);
      bound = std::max(bound, std::sqrt(ux * ux + uy * uy));
    }
  }
  return bound;
}

GraphPatch step_graph(const GraphPatch& patch, const SpeedFunction& speed,
                      double dt) {
  if (patch.n != speed.dimension()) {
    throw DomainError("patch dimension does not match speed");
  }
  GraphPatch next = patch;
  const int jlo = (patch.n == 1) ? 0 : 1;
  const int jhi = (patch.n == 1) ? 1 : patch.ny - 1;
  const auto& cone = speed.cone();
  for (int j = jlo; j < jhi; ++j) {
    for (int i = 1; i < patch.nx - 1; ++i) {
      const LocalGeometry g = local_geometry(patch, i, j);
      if (cone.facet_count() > 0 && !cone.contains(g.eigs)) {
        throw DomainError(
            "cone exit at graph node (" + std::to_string(i) + ", " +
                std::to_string(j) + ")",
            std::vector<double>(g.eigs.data(), g.eigs.data() + g.eigs.size()),
            cone.nearest_facet(g.eigs), {});
      }
      const double G = speed.value_unchecked(
          {g.eigs.data(), static_cast<size_t>(g.eigs.size())});
      next.at(i, j) = patch.at(i, j) + dt * g.vol * G;
    }
  }
  next.time = patch.time + dt;
  return next;
}

double graph_cfl_dt(const GraphPatch& patch, const SpeedFunction& speed,
                    double safety) {
  const int jlo = (patch.n == 1) ? 0 : 1;
  const int jhi = (patch.n == 1) ? 1 : patch.ny - 1;
  double max_grad = 1e-300;
  SpeedJet jet;
  jet.grad.resize(patch.n);
  jet.hess.resize(patch.n, patch.n);
  for (int j = jlo; j < jhi; ++j) {
    for (int i = 1; i < patch.nx - 1; ++i) {
      const LocalGeometry g = local_geometry(patch, i, j);
      if (speed.cone().facet_count() > 0 && !speed.cone().contains(g.eigs)) {
        continue;
      }
      speed.jet_into({g.eigs.data(), static_cast<size_t>(g.eigs.size())}, jet);
      max_grad = std::max(max_grad, jet.grad.maxCoeff());
    }
  }
  return safety * patch.dx * patch.dx / (patch.n * max_grad);
}

}  // namespace gammaflow
