#pragma once

#include <Eigen/Core>
#include <vector>

#include "gammaflow/speed.hpp"

namespace gammaflow {

// Graphical patch u(x, t) over a uniform grid on a box, n in {1, 2}. The
// surface is the lower boundary of a region lying above the graph, with the
// outward (downward) normal; convex patches then have nonnegative curvature
// eigenvalues and move upward under the flow. Boundary values are Dirichlet,
// frozen at their initial data.
struct GraphPatch {
  int n = 2;
  int nx = 0, ny = 1;  // ny == 1 when n == 1
  double dx = 0.0;
  double x0 = 0.0, y0 = 0.0;
  double time = 0.0;
  std::vector<double> u;  // row-major, u[j*nx + i]

  double& at(int i, int j) { return u[static_cast<size_t>(j) * nx + i]; }
  double at(int i, int j) const { return u[static_cast<size_t>(j) * nx + i]; }
};

GraphPatch make_graph_patch(int n, int nodes_per_side, double half_width,
                            const std::function<double(double, double)>& fn);

// Curvature eigenvalues of the patch at an interior node, from the projected
// Hessian with the same spectrum as the Weingarten map.
Eigen::VectorXd graph_weingarten_eigenvalues(const GraphPatch& patch, int i,
                                             int j);

// max |Du| over interior nodes.
double graph_gradient_bound(const GraphPatch& patch);

// Explicit Euler update of interior nodes: du/dt = sqrt(1+|Du|^2) gamma(W).
// Throws DomainError naming the node on cone exit.
GraphPatch step_graph(const GraphPatch& patch, const SpeedFunction& speed,
                      double dt);

double graph_cfl_dt(const GraphPatch& patch, const SpeedFunction& speed,
                    double safety = 0.2);

}  // namespace gammaflow
