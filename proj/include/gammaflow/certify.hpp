#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gammaflow/speed.hpp"

namespace gammaflow {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

// Empirical certificate of a structural hypothesis. A pass is a sampled
// statement with seed and sample count attached, never a proof.
struct CertificateReport {
  std::string speed_id;
  std::string property;
  Verdict verdict = Verdict::Inconclusive;
  int samples = 0;
  int accepted = 0;
  int rejected = 0;
  double tolerance = 0.0;
  uint64_t seed = 0;

  // Most violating (or least comfortable) sample seen.
  double worst_margin = 0.0;  // negative = violation beyond tolerance
  std::vector<double> worst_lambda;
  std::vector<double> worst_direction;

  // Named sub-margins (e.g. interior vs facet probes).
  std::vector<std::pair<std::string, double>> details;

  std::string to_json() const;
};

enum class SpeedProperty { Admissible, Convex, Concave, InverseConcave };

SpeedProperty parse_property(const std::string& name);
std::string to_string(SpeedProperty p);

// The quadratic form (ddot gamma(A) + 2 dot gamma(A) A^-1)(B,B) whose
// nonnegativity over positive-definite A and symmetric B characterizes
// inverse-concavity; strict positivity for nonzero B is the strict variant.
double inverse_concavity_quadform(const SpeedFunction& speed,
                                  const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b);

// Sampled certification: eigenvalues log-uniform in [1e-2, 1e2] conditioned
// into the cone, Haar orthogonal conjugations, unit test directions.
// Deterministic given the seed; parallel-safe.
CertificateReport certify(const SpeedFunction& speed, SpeedProperty property,
                          int samples, uint64_t seed, double tolerance = 1e-8);

// Strictness certificate at the positive-cone boundary facet of index m:
//  - interior probe: Hessian of (gamma^(m))_* strictly negative on sampled
//    directions orthogonal to the radial one;
//  - facet probe: the same margin for the parent gamma_* evaluated just off
//    the facet, in directions tangent to it. Degenerate speeds (the facet
//    limit of gamma_* flattens) fail here.
CertificateReport certify_strict_on_boundary(const SpeedFunction& speed, int m,
                                             int samples, uint64_t seed,
                                             double tolerance = 1e-8);

// Count of eigenvalues with |x| <= tol (1 + spectral radius). Errors if an
// eigenvalue is below -10 tol (1 + spectral radius).
int kernel_dimension(const Eigen::MatrixXd& w, double tol);

// Sum of the k smallest entries.
double partial_trace_lambda_k(const Eigen::VectorXd& lam, int k);

}  // namespace gammaflow
