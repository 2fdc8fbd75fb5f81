#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "gammaflow/cone.hpp"
#include "gammaflow/errors.hpp"

namespace gammaflow {

// Value, gradient and Hessian of a speed in eigenvalue coordinates.
// For a degree-one homogeneous speed: value = lambda . grad and
// hess * lambda = 0.
struct SpeedJet {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

class SpeedImpl {
 public:
  virtual ~SpeedImpl() = default;
  virtual int dimension() const = 0;
  virtual const ConeSpec& cone() const = 0;
  virtual const std::string& id() const = 0;
  virtual double value_impl(std::span<const double> lam) const = 0;
  // `out` arrives sized n; implementations fill it in place.
  virtual void jet_impl(std::span<const double> lam, SpeedJet& out) const = 0;
};

// A positive, monotone, degree-one homogeneous symmetric function on an open
// symmetric convex cone. Cheap to copy; evaluation is pure and thread-safe.
class SpeedFunction {
 public:
  SpeedFunction() = default;
  explicit SpeedFunction(std::shared_ptr<const SpeedImpl> impl)
      : impl_(std::move(impl)) {}

  bool valid() const noexcept { return impl_ != nullptr; }
  int dimension() const { return impl_->dimension(); }
  const ConeSpec& cone() const { return impl_->cone(); }
  const std::string& id() const { return impl_->id(); }

  // Evaluation with a strict cone-membership check.
  double operator()(const Eigen::VectorXd& lam) const;
  SpeedJet jet(const Eigen::VectorXd& lam) const;

  // Raw-buffer entry points for solver inner loops. No cone check, no
  // allocation (jet_into reuses `out`).
  double value_unchecked(std::span<const double> lam) const {
    return impl_->value_impl(lam);
  }
  void jet_into(std::span<const double> lam, SpeedJet& out) const;

  const SpeedImpl& impl() const { return *impl_; }
  std::shared_ptr<const SpeedImpl> impl_ptr() const { return impl_; }

 private:
  void require_in_cone(const Eigen::VectorXd& lam) const;
  std::shared_ptr<const SpeedImpl> impl_;
};

// --- catalog construction -------------------------------------------------

// Resolves a speed id at dimension n. Built-in ids:
//   "mean"             sum of curvatures on R^n
//   "harmonic-k:<k>"   inverse sum of inverse k-subset sums, on the cone
//                      where all k-subset sums are positive
//   "two-harmonic"     alias for harmonic-k:2
//   "power-mean:<p>"   ((sum lam_i^p)/n)^(1/p) on the positive cone
//   "restrict:<id>:<m>" facet restriction of another speed (parent built at
//                      dimension n+m)
SpeedFunction make_speed(const std::string& id, int n);

// User-supplied speeds: register a factory under an id. Derivatives of
// function-only speeds come from central differences.
using SpeedFactory = std::function<std::shared_ptr<const SpeedImpl>(int n)>;
void register_speed(const std::string& id, SpeedFactory factory);

SpeedFunction make_custom_speed(
    const std::string& id, ConeSpec cone,
    std::function<double(std::span<const double>)> fn);

// --- operations of the speed calculus --------------------------------------

// gamma_*(lambda) = gamma(1/lambda_1, ..., 1/lambda_n)^-1 on the positive cone.
double gamma_star(const SpeedFunction& speed, const Eigen::VectorXd& lam);
SpeedJet gamma_star_jet(const SpeedFunction& speed, const Eigen::VectorXd& lam);

// gamma_dagger(lambda) = -gamma(1/lambda_1, ..., 1/lambda_n) = -1/gamma_*.
double gamma_dagger(const SpeedFunction& speed, const Eigen::VectorXd& lam);

// The (n-m)-variable speed obtained by pinning m arguments to zero.
// Requires 1 <= m <= mbar(speed).
SpeedFunction restrict_speed(const SpeedFunction& speed, int m);

// Largest m in [0, n-1] such that the ray (0,...,0,1,...,1) with m zeros lies
// inside the cone.
int mbar(const SpeedFunction& speed);

// c_m = gamma(0,...,0,1,...,1)^-1 with m zeros; the inverse of the speed of a
// round unit cylinder with m flat factors. Requires 0 <= m <= mbar.
double cylinder_constant(const SpeedFunction& speed, int m);

struct ConeDistance {
  double value = 0.0;
  bool on_boundary = false;
};

// Distance from lambda/gamma(lambda) to the cone boundary (Euclidean, on the
// normalized slice). Returns {0, true} if lambda is not interior; +inf for
// the full-space cone.
ConeDistance cone_distance(const ConeSpec& cone, const SpeedFunction& speed,
                           const Eigen::VectorXd& lam);

}  // namespace gammaflow
