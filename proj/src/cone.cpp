#include "gammaflow/cone.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gammaflow {

namespace {

void enumerate_subsets(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

ConeSpec::ConeSpec(int n, ConeKind kind, int k, std::string name,
                   std::vector<Eigen::VectorXd> normals)
    : n_(n), kind_(kind), k_(k), name_(std::move(name)),
      normals_(std::move(normals)) {
  if (n_ < 1) throw std::invalid_argument("cone dimension must be >= 1");
}

ConeSpec ConeSpec::full_space(int n) {
  return ConeSpec(n, ConeKind::FullSpace, 0, "full-space", {});
}

ConeSpec ConeSpec::positive(int n) {
  std::vector<Eigen::VectorXd> normals;
  normals.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u[i] = 1.0;
    normals.push_back(u);
  }
  return ConeSpec(n, ConeKind::Positive, 1, "positive", std::move(normals));
}

ConeSpec ConeSpec::subset_sum(int n, int k) {
  if (k < 1 || k > n) throw std::invalid_argument("subset size out of range");
  if (k == 1) return positive(n);
  std::vector<std::vector<int>> subsets;
  enumerate_subsets(n, k, subsets);
  std::vector<Eigen::VectorXd> normals;
  normals.reserve(subsets.size());
  const double inv = 1.0 / std::sqrt(static_cast<double>(k));
  for (const auto& I : subsets) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (int i : I) u[i] = inv;
    normals.push_back(u);
  }
  std::string name = (k == 2) ? "pairwise-sum" : ("subset-sum-" + std::to_string(k));
  return ConeSpec(n, ConeKind::SubsetSum, k, std::move(name), std::move(normals));
}

ConeSpec ConeSpec::custom(int n, std::vector<Eigen::VectorXd> unit_normals,
                          std::string name) {
  for (auto& u : unit_normals) {
    if (u.size() != n) throw std::invalid_argument("facet normal dimension mismatch");
    const double len = u.norm();
    if (len < 1e-14) throw std::invalid_argument("zero facet normal");
    u /= len;
  }
  return ConeSpec(n, ConeKind::Custom, 0, std::move(name), std::move(unit_normals));
}

bool ConeSpec::contains(const Eigen::VectorXd& x) const {
  if (x.size() != n_) return false;
  for (const auto& u : normals_) {
    if (u.dot(x) <= 0.0) return false;
  }
  return true;
}

double ConeSpec::boundary_distance(const Eigen::VectorXd& x) const {
  if (normals_.empty()) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (const auto& u : normals_) d = std::min(d, u.dot(x));
  return d;
}

int ConeSpec::nearest_facet(const Eigen::VectorXd& x) const {
  if (normals_.empty()) return -1;
  int best = 0;
  double d = normals_[0].dot(x);
  for (int i = 1; i < facet_count(); ++i) {
    const double di = normals_[i].dot(x);
    if (di < d) {
      d = di;
      best = i;
    }
  }
  return best;
}

std::string ConeSpec::describe_facet(int i) const {
  if (i < 0 || i >= facet_count()) return "(interior)";
  std::ostringstream os;
  os << "facet " << i << " normal [";
  for (int j = 0; j < n_; ++j) {
    if (j) os << ", ";
    os << normals_[i][j];
  }
  os << "]";
  return os.str();
}

}  // namespace gammaflow
