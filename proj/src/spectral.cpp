#include "gammaflow/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gammaflow/errors.hpp"

namespace gammaflow {

Eigen::MatrixXd require_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DomainError("matrix is not square");
  const double asym = (a - a.transpose()).norm();
  if (asym > 1e-10 * (1.0 + a.norm())) {
    throw DomainError("matrix is not symmetric (|A - A^T| = " +
                      std::to_string(asym) + ")");
  }
  return 0.5 * (a + a.transpose());
}

EigenDecomposition sym_eigs(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(require_symmetric(a));
  if (es.info() != Eigen::Success) {
    throw DomainError("eigendecomposition failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

double matrix_speed(const SpeedFunction& speed, const Eigen::MatrixXd& a) {
  const auto ed = sym_eigs(a);
  return speed(ed.lam);
}

double spectral_quadform(const SpeedJet& jet, const Eigen::VectorXd& lam,
                         const Eigen::MatrixXd& bt) {
  const int n = static_cast<int>(lam.size());
  const double gap_tol = 1e-8 * (1.0 + lam.norm());
  double q = 0.0;
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) {
      q += jet.hess(p, r) * bt(p, p) * bt(r, r);
    }
  }
  for (int p = 0; p < n; ++p) {
    for (int r = 0; r < n; ++r) {
      if (p == r) continue;
      const double gap = lam[p] - lam[r];
      const double dd = (std::abs(gap) < gap_tol)
                            ? (jet.hess(p, p) - jet.hess(p, r))
                            : (jet.grad[p] - jet.grad[r]) / gap;
      q += dd * bt(p, r) * bt(p, r);
    }
  }
  return q;
}

double matrix_hessian_quadform(const SpeedFunction& speed,
                               const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b) {
  const auto ed = sym_eigs(a);
  const SpeedJet jet = speed.jet(ed.lam);
  const Eigen::MatrixXd bs = require_symmetric(b);
  const Eigen::MatrixXd bt = ed.vectors.transpose() * bs * ed.vectors;
  return spectral_quadform(jet, ed.lam, bt);
}

}  // namespace gammaflow
