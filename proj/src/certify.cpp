#include "gammaflow/certify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "gammaflow/common.hpp"
#include "gammaflow/errors.hpp"
#include "gammaflow/spectral.hpp"

#include "json.hpp"

namespace gammaflow {

namespace {

using nlohmann::json;

Eigen::VectorXd draw_log_uniform(SplitMix64& rng, int n) {
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i) lam[i] = std::pow(10.0, rng.uniform(-2.0, 2.0));
  return lam;
}

Eigen::MatrixXd draw_orthogonal(SplitMix64& rng, int n) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

Eigen::MatrixXd draw_symmetric_unit(SplitMix64& rng, int n) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i) {
    b(i, i) = rng.gaussian();
    for (int j = 0; j < i; ++j) {
      const double x = rng.gaussian();
      b(i, j) = x;
      b(j, i) = x;
    }
  }
  const double norm = b.norm();
  if (norm > 0) b /= norm;
  return b;
}

int worker_count(int samples) {
  const char* env = std::getenv("GAMMAFLOW_THREADS");
  int workers = 1;
  if (env) workers = std::max(1, std::atoi(env));
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0) workers = std::min(workers, hw);
  if (samples < 2048) workers = 1;
  return workers;
}

struct SampleOutcome {
  bool accepted = false;
  double margin = 0.0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd direction;  // flattened matrix for matrix directions
};

// Aggregates worst sample deterministically (margin, then index).
struct Accumulator {
  double worst = std::numeric_limits<double>::infinity();
  long worst_index = -1;
  int accepted = 0;
  int rejected = 0;
  Eigen::VectorXd worst_lambda;
  Eigen::VectorXd worst_direction;

  void add(long index, const SampleOutcome& s) {
    if (!s.accepted) {
      ++rejected;
      return;
    }
    ++accepted;
    if (s.margin < worst || (s.margin == worst && index < worst_index)) {
      worst = s.margin;
      worst_index = index;
      worst_lambda = s.lambda;
      worst_direction = s.direction;
    }
  }

  void merge(const Accumulator& o) {
    accepted += o.accepted;
    rejected += o.rejected;
    if (o.worst_index >= 0 &&
        (o.worst < worst || (o.worst == worst && o.worst_index < worst_index))) {
      worst = o.worst;
      worst_index = o.worst_index;
      worst_lambda = o.worst_lambda;
      worst_direction = o.worst_direction;
    }
  }
};

template <typename SampleFn>
Accumulator run_samples(int samples, uint64_t seed, SampleFn&& fn) {
  const int workers = worker_count(samples);
  if (workers <= 1) {
    Accumulator acc;
    for (long i = 0; i < samples; ++i) {
      SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(i)));
      acc.add(i, fn(rng));
    }
    return acc;
  }
  std::vector<Accumulator> partial(workers);
  std::vector<std::thread> pool;
  const long chunk = (samples + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      const long lo = w * chunk;
      const long hi = std::min<long>(samples, lo + chunk);
      for (long i = lo; i < hi; ++i) {
        SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(i)));
        partial[w].add(i, fn(rng));
      }
    });
  }
  for (auto& t : pool) t.join();
  Accumulator acc;
  for (const auto& p : partial) acc.merge(p);
  return acc;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
  }
}

std::string to_string(SpeedProperty p) {
  switch (p) {
    case SpeedProperty::Admissible: return "admissible";
    case SpeedProperty::Convex: return "convex";
    case SpeedProperty::Concave: return "concave";
    default: return "inverse-concave";
  }
}

SpeedProperty parse_property(const std::string& name) {
  if (name == "admissible") return SpeedProperty::Admissible;
  if (name == "convex") return SpeedProperty::Convex;
  if (name == "concave") return SpeedProperty::Concave;
  if (name == "inverse-concave") return SpeedProperty::InverseConcave;
  throw DomainError("unknown property: " + name);
}

std::string CertificateReport::to_json() const {
  json j;
  j["speed"] = speed_id;
  j["property"] = property;
  j["verdict"] = to_string(verdict);
  j["samples"] = samples;
  j["accepted"] = accepted;
  j["rejected"] = rejected;
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  j["worst_margin"] = worst_margin;
  j["worst_witness"] = {{"lambda", worst_lambda}, {"direction", worst_direction}};
  json d = json::object();
  for (const auto& [k, v] : details) d[k] = v;
  j["details"] = d;
  return j.dump(2);
}

double inverse_concavity_quadform(const SpeedFunction& speed,
                                  const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b) {
  const auto ed = sym_eigs(a);
  for (int i = 0; i < ed.lam.size(); ++i) {
    if (!(ed.lam[i] > 0.0)) {
      throw DomainError("matrix not positive definite (eigenvalue " +
                        std::to_string(ed.lam[i]) + ")");
    }
  }
  const SpeedJet jet = speed.jet(ed.lam);
  const Eigen::MatrixXd bs = require_symmetric(b);
  const Eigen::MatrixXd bt = ed.vectors.transpose() * bs * ed.vectors;
  double q = spectral_quadform(jet, ed.lam, bt);
  for (int p = 0; p < ed.lam.size(); ++p) {
    for (int r = 0; r < ed.lam.size(); ++r) {
      q += 2.0 * jet.grad[p] * bt(p, r) * bt(p, r) / ed.lam[r];
    }
  }
  return q;
}

CertificateReport certify(const SpeedFunction& speed, SpeedProperty property,
                          int samples, uint64_t seed, double tolerance) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  const int n = speed.dimension();

  auto sample_fn = [&](SplitMix64& rng) -> SampleOutcome {
    SampleOutcome out;
    const Eigen::VectorXd lam = draw_log_uniform(rng, n);
    if (!speed.cone().contains(lam)) return out;
    out.accepted = true;
    out.lambda = lam;

    switch (property) {
      case SpeedProperty::Admissible: {
        const SpeedJet jet = speed.jet(lam);
        const double scale = lam.norm();
        double margin = jet.value / scale;
        for (int i = 0; i < n; ++i) margin = std::min(margin, jet.grad[i]);
        const double euler = std::abs(jet.value - lam.dot(jet.grad)) /
                             std::max(std::abs(jet.value), 1e-300);
        margin = std::min(margin, tolerance - euler);
        out.margin = margin;
        out.direction = Eigen::VectorXd();
        return out;
      }
      case SpeedProperty::Convex:
      case SpeedProperty::Concave: {
        const Eigen::MatrixXd q = draw_orthogonal(rng, n);
        const Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
        const Eigen::MatrixXd b = draw_symmetric_unit(rng, n);
        const double quad = matrix_hessian_quadform(speed, a, b);
        const double scale =
            std::max(std::abs(speed(lam)) / lam.squaredNorm(), 1e-300);
        const double rel = quad / scale;
        out.margin = (property == SpeedProperty::Convex) ? rel : -rel;
        out.direction = Eigen::Map<const Eigen::VectorXd>(b.data(), n * n);
        return out;
      }
      case SpeedProperty::InverseConcave: {
        const Eigen::MatrixXd q = draw_orthogonal(rng, n);
        const Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
        const Eigen::MatrixXd b = draw_symmetric_unit(rng, n);
        const double quad = inverse_concavity_quadform(speed, a, b);
        const double scale =
            std::max(std::abs(speed(lam)) / lam.squaredNorm(), 1e-300);
        out.margin = quad / scale;
        out.direction = Eigen::Map<const Eigen::VectorXd>(b.data(), n * n);
        return out;
      }
    }
    return out;
  };

  const Accumulator acc = run_samples(samples, seed, sample_fn);

  CertificateReport rep;
  rep.speed_id = speed.id();
  rep.property = to_string(property);
  rep.samples = samples;
  rep.accepted = acc.accepted;
  rep.rejected = acc.rejected;
  rep.tolerance = tolerance;
  rep.seed = seed;
  rep.worst_margin = acc.accepted ? acc.worst : 0.0;
  if (acc.worst_index >= 0) {
    rep.worst_lambda = to_std(acc.worst_lambda);
    if (acc.worst_direction.size()) rep.worst_direction = to_std(acc.worst_direction);
  }
  if (acc.rejected > 0.9 * samples) {
    rep.verdict = Verdict::Inconclusive;
  } else {
    rep.verdict = (rep.worst_margin >= -tolerance) ? Verdict::Pass : Verdict::Fail;
  }
  return rep;
}

CertificateReport certify_strict_on_boundary(const SpeedFunction& speed, int m,
                                             int samples, uint64_t seed,
                                             double tolerance) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  const int n = speed.dimension();
  const int mb = mbar(speed);
  if (m < 1 || m > mb) {
    throw DomainError("strict-on-boundary: m=" + std::to_string(m) +
                      " out of range (mbar=" + std::to_string(mb) + ")");
  }

  CertificateReport rep;
  rep.speed_id = speed.id();
  rep.property = "strictly-inverse-concave-on-boundary(m=" + std::to_string(m) + ")";
  rep.samples = samples;
  rep.tolerance = tolerance;
  rep.seed = seed;

  const SpeedFunction restricted = restrict_speed(speed, m);
  const int l = n - m;
  if (l < 2) {
    // One remaining variable: every direction is radial, so strictness in
    // non-radial directions is degenerate.
    rep.verdict = Verdict::Fail;
    rep.worst_margin = 0.0;
    rep.details.emplace_back("degenerate_facet_dimension", static_cast<double>(l));
    return rep;
  }

  constexpr double kFacetEps = 1e-8;

  struct StrictAcc {
    double interior = std::numeric_limits<double>::infinity();
    double facet = std::numeric_limits<double>::infinity();
  };

  auto sample_fn = [&](SplitMix64& rng) -> SampleOutcome {
    SampleOutcome out;
    Eigen::VectorXd lam = draw_log_uniform(rng, l);
    if (!restricted.cone().contains(lam)) return out;

    Eigen::VectorXd v(l);
    double vn = 0.0;
    do {
      for (int i = 0; i < l; ++i) v[i] = rng.gaussian();
      v -= (v.dot(lam) / lam.squaredNorm()) * lam;
      vn = v.norm();
    } while (vn < 1e-8);
    v /= vn;

    const SpeedJet star = gamma_star_jet(restricted, lam);
    const double scale = std::max(star.value / lam.squaredNorm(), 1e-300);
    const double interior_margin = -(v.dot(star.hess * v)) / scale;

    // Probe just off the facet: embed and ask the parent's gamma_* for the
    // same tangential margin. Speeds whose gamma_* flattens toward the facet
    // lose all strictness here.
    Eigen::VectorXd lam_eps(n);
    const double eps = kFacetEps * lam.minCoeff();
    for (int i = 0; i < m; ++i) lam_eps[i] = eps;
    lam_eps.tail(l) = lam;
    const SpeedJet pstar = gamma_star_jet(speed, lam_eps);
    const Eigen::MatrixXd block = pstar.hess.bottomRightCorner(l, l);
    const double facet_margin = -(v.dot(block * v)) / scale;

    out.accepted = true;
    out.lambda = lam;
    out.direction = v;
    out.margin = std::min(interior_margin, facet_margin);
    return out;
  };

  const Accumulator acc = run_samples(samples, seed, sample_fn);
  rep.accepted = acc.accepted;
  rep.rejected = acc.rejected;
  rep.worst_margin = acc.accepted ? acc.worst : 0.0;
  if (acc.worst_index >= 0) {
    rep.worst_lambda = to_std(acc.worst_lambda);
    rep.worst_direction = to_std(acc.worst_direction);
  }
  if (acc.rejected > 0.9 * samples) {
    rep.verdict = Verdict::Inconclusive;
  } else {
    // Strictness: the recorded margin (the modulus delta) must stay strictly
    // positive beyond tolerance at every sample.
    rep.verdict = (rep.worst_margin > tolerance) ? Verdict::Pass : Verdict::Fail;
  }
  rep.details.emplace_back("delta", rep.worst_margin);
  return rep;
}

int kernel_dimension(const Eigen::MatrixXd& w, double tol) {
  const auto ed = sym_eigs(w);
  const double radius = ed.lam.cwiseAbs().maxCoeff();
  const double floor = tol * (1.0 + radius);
  if (ed.lam.minCoeff() < -10.0 * floor) {
    throw DomainError("not positive semidefinite (eigenvalue " +
                      std::to_string(ed.lam.minCoeff()) + ")");
  }
  int k = 0;
  for (int i = 0; i < ed.lam.size(); ++i) {
    if (std::abs(ed.lam[i]) <= floor) ++k;
  }
  return k;
}

double partial_trace_lambda_k(const Eigen::VectorXd& lam, int k) {
  const int n = static_cast<int>(lam.size());
  if (k < 1 || k > n) throw DomainError("partial trace: k out of range");
  std::vector<double> sorted(lam.data(), lam.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += sorted[i];
  return s;
}

}  // namespace gammaflow
