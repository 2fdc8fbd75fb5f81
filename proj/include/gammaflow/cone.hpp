#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace gammaflow {

enum class ConeKind { FullSpace, Positive, SubsetSum, Custom };

// Open symmetric convex cone represented as a finite intersection of open
// half-spaces {u·x > 0} through the origin. Every cone used by the built-in
// speeds is polyhedral, so membership and boundary distance are exact.
class ConeSpec {
 public:
  static ConeSpec full_space(int n);
  static ConeSpec positive(int n);
  // {x : sum over every k-subset of entries > 0}; k=1 is the positive cone,
  // k=2 the pairwise-sum cone.
  static ConeSpec subset_sum(int n, int k);
  static ConeSpec custom(int n, std::vector<Eigen::VectorXd> unit_normals,
                         std::string name = "custom");

  int dimension() const noexcept { return n_; }
  ConeKind kind() const noexcept { return kind_; }
  int subset_size() const noexcept { return k_; }
  const std::string& name() const noexcept { return name_; }

  int facet_count() const noexcept { return static_cast<int>(normals_.size()); }
  const Eigen::VectorXd& facet_normal(int i) const { return normals_.at(i); }

  // Strict interior membership.
  bool contains(const Eigen::VectorXd& x) const;

  // min over facets of u·x; exact Euclidean distance to the boundary for
  // interior points, +inf for the full space.
  double boundary_distance(const Eigen::VectorXd& x) const;
  int nearest_facet(const Eigen::VectorXd& x) const;

  std::string describe_facet(int i) const;

 private:
  ConeSpec(int n, ConeKind kind, int k, std::string name,
           std::vector<Eigen::VectorXd> normals);

  int n_;
  ConeKind kind_;
  int k_ = 0;
  std::string name_;
  std::vector<Eigen::VectorXd> normals_;
};

}  // namespace gammaflow
