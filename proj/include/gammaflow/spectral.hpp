#pragma once

#include <Eigen/Core>

#include "gammaflow/speed.hpp"

namespace gammaflow {

// Symmetric matrices are plain Eigen matrices; inputs are symmetrized and
// checked to a small relative tolerance.
Eigen::MatrixXd require_symmetric(const Eigen::MatrixXd& a);

struct EigenDecomposition {
  Eigen::VectorXd lam;
  Eigen::MatrixXd vectors;
};

EigenDecomposition sym_eigs(const Eigen::MatrixXd& a);

// gamma evaluated on the eigenvalues of a symmetric matrix.
double matrix_speed(const SpeedFunction& speed, const Eigen::MatrixXd& a);

// Second derivative of A -> gamma(eigenvalues(A)) at `a` in direction `b`:
//   sum_pq hess_pq Bt_pp Bt_qq + sum_{p != q} DD_pq Bt_pq^2
// in the eigenbasis of `a`, where DD is the gradient divided difference with
// the analytic limit hess_pp - hess_pq below the eigenvalue-gap threshold
// 1e-8 (1 + |lambda|).
double matrix_hessian_quadform(const SpeedFunction& speed,
                               const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b);

// Internal shared kernel: quadform given the eigenvalues and the direction
// already rotated into the eigenbasis.
double spectral_quadform(const SpeedJet& jet, const Eigen::VectorXd& lam,
                         const Eigen::MatrixXd& b_eigenbasis);

}  // namespace gammaflow
