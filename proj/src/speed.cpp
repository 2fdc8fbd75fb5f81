#include "gammaflow/speed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>

namespace gammaflow {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string format_lambda(std::span<const double> lam) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < lam.size(); ++i) {
    if (i) os << ", ";
    os << lam[i];
  }
  os << "]";
  return os.str();
}

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

class MeanSpeed final : public SpeedImpl {
 public:
  explicit MeanSpeed(int n) : n_(n), cone_(ConeSpec::full_space(n)), id_("mean") {}

  int dimension() const override { return n_; }
  const ConeSpec& cone() const override { return cone_; }
  const std::string& id() const override { return id_; }

  double value_impl(std::span<const double> lam) const override {
    double s = 0.0;
    for (double x : lam) s += x;
    return s;
  }

  void jet_impl(std::span<const double> lam, SpeedJet& out) const override {
    out.value = value_impl(lam);
    out.grad.setOnes();
    out.hess.setZero();
  }

 private:
  int n_;
  ConeSpec cone_;
  std::string id_;
};

// gamma(lambda) = ( sum over k-subsets I of (sum_{i in I} lambda_i)^-1 )^-1.
// k=1 is the harmonic mean, k=2 the two-harmonic mean.
class KHarmonicSpeed final : public SpeedImpl {
 public:
  KHarmonicSpeed(int n, int k, std::string id)
      : n_(n), k_(k), cone_(ConeSpec::subset_sum(n, k)), id_(std::move(id)) {
    if (n > 32) throw DomainError("harmonic-k speeds support n <= 32");
    enumerate_subsets(n, k, subsets_);
  }

  int dimension() const override { return n_; }
  const ConeSpec& cone() const override { return cone_; }
  const std::string& id() const override { return id_; }

  double value_impl(std::span<const double> lam) const override {
    double S = 0.0;
    for (const auto& I : subsets_) {
      double s = 0.0;
      for (int i : I) s += lam[i];
      S += 1.0 / s;
    }
    return 1.0 / S;
  }

  void jet_impl(std::span<const double> lam, SpeedJet& out) const override {
    const int n = n_;
    double S = 0.0;
    double gsum[32] = {0.0};          // sum_{I ni i} s_I^-2
    out.hess.setZero();               // accumulates sum_{I ni i,j} s_I^-3
    for (const auto& I : subsets_) {
      double s = 0.0;
      for (int i : I) s += lam[i];
      const double w1 = 1.0 / s;
      const double w2 = w1 * w1;
      const double w3 = w2 * w1;
      S += w1;
      for (int i : I) {
        gsum[i] += w2;
        for (int j : I) out.hess(i, j) += w3;
      }
    }
    const double S2 = S * S;
    const double c2 = -2.0 / S2;
    const double c3 = 2.0 / (S2 * S);
    out.value = 1.0 / S;
    for (int i = 0; i < n; ++i) out.grad[i] = gsum[i] / S2;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.hess(i, j) = c2 * out.hess(i, j) + c3 * gsum[i] * gsum[j];
      }
    }
  }

 private:
  int n_;
  int k_;
  ConeSpec cone_;
  std::string id_;
  std::vector<std::vector<int>> subsets_;
};

// gamma(lambda) = ((sum lambda_i^p)/n)^(1/p), p != 0, on the positive cone.
class PowerMeanSpeed final : public SpeedImpl {
 public:
  PowerMeanSpeed(int n, double p, std::string id)
      : n_(n), p_(p), cone_(ConeSpec::positive(n)), id_(std::move(id)) {}

  int dimension() const override { return n_; }
  const ConeSpec& cone() const override { return cone_; }
  const std::string& id() const override { return id_; }

  double value_impl(std::span<const double> lam) const override {
    double q = 0.0;
    for (double x : lam) q += std::pow(x, p_);
    return std::pow(q / n_, 1.0 / p_);
  }

  void jet_impl(std::span<const double> lam, SpeedJet& out) const override {
    const int n = n_;
    const double p = p_;
    double q = 0.0;
    for (double x : lam) q += std::pow(x, p);
    const double npow = std::pow(static_cast<double>(n), -1.0 / p);
    const double q1 = std::pow(q, 1.0 / p - 1.0);
    const double q2 = std::pow(q, 1.0 / p - 2.0);
    out.value = npow * std::pow(q, 1.0 / p);
    for (int i = 0; i < n; ++i) {
      out.grad[i] = npow * q1 * std::pow(lam[i], p - 1.0);
    }
    for (int i = 0; i < n; ++i) {
      const double li = std::pow(lam[i], p - 1.0);
      for (int j = 0; j <= i; ++j) {
        double h = npow * (1.0 - p) * q2 * li * std::pow(lam[j], p - 1.0);
        if (i == j) h += npow * (p - 1.0) * q1 * std::pow(lam[i], p - 2.0);
        out.hess(i, j) = h;
        out.hess(j, i) = h;
      }
    }
  }

 private:
  int n_;
  double p_;
  ConeSpec cone_;
  std::string id_;
};

ConeSpec restricted_cone(const ConeSpec& parent, int m) {
  const int n = parent.dimension();
  const int l = n - m;
  if (parent.kind() == ConeKind::FullSpace) return ConeSpec::full_space(l);
  std::vector<Eigen::VectorXd> normals;
  for (int f = 0; f < parent.facet_count(); ++f) {
    Eigen::VectorXd tail = parent.facet_normal(f).tail(l);
    const double len = tail.norm();
    if (len < 1e-14) {
      throw DomainError("facet not in cone: restriction kills facet " +
                        std::to_string(f));
    }
    tail /= len;
    bool dup = false;
    for (const auto& u : normals) {
      if ((u - tail).norm() < 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) normals.push_back(std::move(tail));
  }
  return ConeSpec::custom(l, std::move(normals), parent.name() + "-restricted");
}

class RestrictedSpeed final : public SpeedImpl {
 public:
  RestrictedSpeed(SpeedFunction parent, int m)
      : parent_(std::move(parent)),
        m_(m),
        cone_(restricted_cone(parent_.cone(), m)),
        id_("restrict:" + parent_.id() + ":" + std::to_string(m)) {}

  int dimension() const override { return parent_.dimension() - m_; }
  const ConeSpec& cone() const override { return cone_; }
  const std::string& id() const override { return id_; }

  double value_impl(std::span<const double> lam) const override {
    std::vector<double> full(parent_.dimension(), 0.0);
    std::copy(lam.begin(), lam.end(), full.begin() + m_);
    return parent_.value_unchecked(full);
  }

  void jet_impl(std::span<const double> lam, SpeedJet& out) const override {
    const int np = parent_.dimension();
    const int l = np - m_;
    std::vector<double> full(np, 0.0);
    std::copy(lam.begin(), lam.end(), full.begin() + m_);
    SpeedJet pj;
    pj.grad.resize(np);
    pj.hess.resize(np, np);
    parent_.jet_into(full, pj);
    out.value = pj.value;
    out.grad = pj.grad.tail(l);
    out.hess = pj.hess.bottomRightCorner(l, l);
  }

 private:
  SpeedFunction parent_;
  int m_;
  ConeSpec cone_;
  std::string id_;
};

// Function-only speed; jet by central differences. Accuracy of the
// derivatives is whatever the difference scheme gives, O(h^2).
class CustomSpeed final : public SpeedImpl {
 public:
  CustomSpeed(std::string id, ConeSpec cone,
              std::function<double(std::span<const double>)> fn)
      : cone_(std::move(cone)), id_(std::move(id)), fn_(std::move(fn)) {}

  int dimension() const override { return cone_.dimension(); }
  const ConeSpec& cone() const override { return cone_; }
  const std::string& id() const override { return id_; }

  double value_impl(std::span<const double> lam) const override {
    return fn_(lam);
  }

  void jet_impl(std::span<const double> lam, SpeedJet& out) const override {
    const int n = dimension();
    double scale = 0.0;
    for (double x : lam) scale = std::max(scale, std::abs(x));
    const double h = 1e-5 * (1.0 + scale);
    std::vector<double> w(lam.begin(), lam.end());
    const double f0 = fn_(w);
    out.value = f0;
    for (int i = 0; i < n; ++i) {
      w[i] = lam[i] + h;
      const double fp = fn_(w);
      w[i] = lam[i] - h;
      const double fm = fn_(w);
      w[i] = lam[i];
      out.grad[i] = (fp - fm) / (2.0 * h);
      out.hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        w[i] = lam[i] + h;
        w[j] = lam[j] + h;
        const double fpp = fn_(w);
        w[j] = lam[j] - h;
        const double fpm = fn_(w);
        w[i] = lam[i] - h;
        const double fmm = fn_(w);
        w[j] = lam[j] + h;
        const double fmp = fn_(w);
        w[i] = lam[i];
        w[j] = lam[j];
        const double hij = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        out.hess(i, j) = hij;
        out.hess(j, i) = hij;
      }
    }
  }

 private:
  ConeSpec cone_;
  std::string id_;
  std::function<double(std::span<const double>)> fn_;
};

struct Registry {
  std::mutex mu;
  std::map<std::string, SpeedFactory> factories;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

// --- SpeedFunction ----------------------------------------------------------

void SpeedFunction::require_in_cone(const Eigen::VectorXd& lam) const {
  if (lam.size() != dimension()) {
    throw DomainError("curvature vector has dimension " +
                      std::to_string(lam.size()) + ", speed expects " +
                      std::to_string(dimension()));
  }
  const ConeSpec& c = cone();
  if (!c.contains(lam)) {
    const int f = c.nearest_facet(lam);
    std::vector<double> normal;
    if (f >= 0) normal = to_std(c.facet_normal(f));
    throw DomainError("lambda " +
                          format_lambda({lam.data(), static_cast<size_t>(lam.size())}) +
                          " outside cone '" + c.name() + "' (" +
                          c.describe_facet(f) + ")",
                      to_std(lam), f, std::move(normal));
  }
}

double SpeedFunction::operator()(const Eigen::VectorXd& lam) const {
  require_in_cone(lam);
  return impl_->value_impl({lam.data(), static_cast<size_t>(lam.size())});
}

void SpeedFunction::jet_into(std::span<const double> lam, SpeedJet& out) const {
  const int n = dimension();
  if (out.grad.size() != n) out.grad.resize(n);
  if (out.hess.rows() != n || out.hess.cols() != n) out.hess.resize(n, n);
  impl_->jet_impl(lam, out);
}

SpeedJet SpeedFunction::jet(const Eigen::VectorXd& lam) const {
  require_in_cone(lam);
  SpeedJet out;
  jet_into({lam.data(), static_cast<size_t>(lam.size())}, out);
  return out;
}

// --- registry ---------------------------------------------------------------

void register_speed(const std::string& id, SpeedFactory factory) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  r.factories[id] = std::move(factory);
}

SpeedFunction make_custom_speed(
    const std::string& id, ConeSpec cone,
    std::function<double(std::span<const double>)> fn) {
  return SpeedFunction(
      std::make_shared<CustomSpeed>(id, std::move(cone), std::move(fn)));
}

SpeedFunction make_speed(const std::string& id, int n) {
  if (n < 1) throw DomainError("speed dimension must be >= 1");
  {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    auto it = r.factories.find(id);
    if (it != r.factories.end()) return SpeedFunction(it->second(n));
  }
  if (id == "mean") return SpeedFunction(std::make_shared<MeanSpeed>(n));
  if (id == "two-harmonic") {
    if (n < 2) throw DomainError("two-harmonic needs n >= 2");
    return SpeedFunction(std::make_shared<KHarmonicSpeed>(n, 2, id));
  }
  if (id.rfind("harmonic-k:", 0) == 0) {
    const int k = std::stoi(id.substr(11));
    if (k < 1 || k > n) throw DomainError("harmonic-k: k out of range for n");
    return SpeedFunction(std::make_shared<KHarmonicSpeed>(n, k, id));
  }
  if (id.rfind("power-mean:", 0) == 0) {
    const double p = std::stod(id.substr(11));
    if (p == 0.0) throw DomainError("power-mean: p must be nonzero");
    return SpeedFunction(std::make_shared<PowerMeanSpeed>(n, p, id));
  }
  if (id.rfind("restrict:", 0) == 0) {
    const auto rest = id.substr(9);
    const auto pos = rest.rfind(':');
    if (pos == std::string::npos) throw DomainError("bad restrict id: " + id);
    const std::string parent_id = rest.substr(0, pos);
    const int m = std::stoi(rest.substr(pos + 1));
    if (m < 1) throw DomainError("restrict: m must be >= 1");
    SpeedFunction parent = make_speed(parent_id, n + m);
    return restrict_speed(parent, m);
  }
  throw DomainError("unknown speed id: " + id);
}

// --- derived quantities ------------------------------------------------------

namespace {

void require_positive(const Eigen::VectorXd& lam) {
  for (int i = 0; i < lam.size(); ++i) {
    if (!(lam[i] > 0.0)) {
      throw DomainError("nonpositive entry " + std::to_string(lam[i]) +
                            " at index " + std::to_string(i),
                        to_std(lam), i, {});
    }
  }
}

Eigen::VectorXd inverted(const Eigen::VectorXd& lam) {
  Eigen::VectorXd inv(lam.size());
  for (int i = 0; i < lam.size(); ++i) inv[i] = 1.0 / lam[i];
  return inv;
}

}  // namespace

double gamma_star(const SpeedFunction& speed, const Eigen::VectorXd& lam) {
  require_positive(lam);
  return 1.0 / speed(inverted(lam));
}

SpeedJet gamma_star_jet(const SpeedFunction& speed, const Eigen::VectorXd& lam) {
  require_positive(lam);
  const int n = static_cast<int>(lam.size());
  const Eigen::VectorXd inv = inverted(lam);
  const SpeedJet pj = speed.jet(inv);

  // g(lambda) = gamma(1/lambda); gamma_* = 1/g.
  Eigen::VectorXd dg(n);
  for (int i = 0; i < n; ++i) dg[i] = -pj.grad[i] * inv[i] * inv[i];
  Eigen::MatrixXd hg(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = pj.hess(i, j) * inv[i] * inv[i] * inv[j] * inv[j];
      if (i == j) v += 2.0 * pj.grad[i] * inv[i] * inv[i] * inv[i];
      hg(i, j) = v;
    }
  }
  const double g = pj.value;
  SpeedJet out;
  out.value = 1.0 / g;
  out.grad = -dg / (g * g);
  out.hess = (2.0 / (g * g * g)) * (dg * dg.transpose()) - hg / (g * g);
  return out;
}

double gamma_dagger(const SpeedFunction& speed, const Eigen::VectorXd& lam) {
  require_positive(lam);
  return -speed(inverted(lam));
}

int mbar(const SpeedFunction& speed) {
  const int n = speed.dimension();
  for (int m = n - 1; m >= 1; --m) {
    Eigen::VectorXd ray = Eigen::VectorXd::Ones(n);
    ray.head(m).setZero();
    if (speed.cone().contains(ray)) return m;
  }
  return 0;
}

double cylinder_constant(const SpeedFunction& speed, int m) {
  const int n = speed.dimension();
  if (m < 0 || m > mbar(speed)) {
    throw DomainError("cylinder constant: m=" + std::to_string(m) +
                      " exceeds mbar=" + std::to_string(mbar(speed)));
  }
  Eigen::VectorXd ray = Eigen::VectorXd::Ones(n);
  ray.head(m).setZero();
  return 1.0 / speed.value_unchecked({ray.data(), static_cast<size_t>(n)});
}

SpeedFunction restrict_speed(const SpeedFunction& speed, int m) {
  if (m < 1 || m > mbar(speed)) {
    throw DomainError("facet not in cone: m=" + std::to_string(m) +
                      ", mbar=" + std::to_string(mbar(speed)));
  }
  return SpeedFunction(std::make_shared<RestrictedSpeed>(speed, m));
}

ConeDistance cone_distance(const ConeSpec& cone, const SpeedFunction& speed,
                           const Eigen::VectorXd& lam) {
  if (!cone.contains(lam)) return {0.0, true};
  const double g =
      speed.value_unchecked({lam.data(), static_cast<size_t>(lam.size())});
  if (!(g > 0.0)) return {0.0, true};
  return {cone.boundary_distance(lam / g), false};
}

}  // namespace gammaflow
