#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "gammaflow/common.hpp"
#include "gammaflow/errors.hpp"
#include "gammaflow/spectral.hpp"
#include "gammaflow/speed.hpp"

using namespace gammaflow;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Eigen::VectorXd random_positive(SplitMix64& rng, int n, double lo = -1.0,
                                double hi = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::pow(10.0, rng.uniform(lo, hi));
  return v;
}

Eigen::MatrixXd random_orthogonal(SplitMix64& rng, int n) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

Eigen::MatrixXd random_symmetric(SplitMix64& rng, int n) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i) {
    b(i, i) = rng.gaussian();
    for (int j = 0; j < i; ++j) {
      b(i, j) = b(j, i) = rng.gaussian();
    }
  }
  return b;
}

// Finite-difference oracle for the matrix Hessian quadratic form.
double fd_matrix_quadform(const SpeedFunction& speed, const Eigen::MatrixXd& a,
                          const Eigen::MatrixXd& b, double h = 1e-4) {
  const double fp = matrix_speed(speed, a + h * b);
  const double f0 = matrix_speed(speed, a);
  const double fm = matrix_speed(speed, a - h * b);
  return (fp - 2.0 * f0 + fm) / (h * h);
}

const std::vector<std::pair<std::string, int>> kCatalog = {
    {"mean", 2},          {"mean", 3},         {"harmonic-k:1", 3},
    {"two-harmonic", 3},  {"power-mean:2", 3}, {"power-mean:-2", 3},
};

}  // namespace

TEST_CASE("mean curvature evaluation") {
  const auto mean3 = make_speed("mean", 3);
  CHECK(mean3(vec({1, 2, 3})) == doctest::Approx(6.0));
  CHECK(mean3(vec({-1, 0, 5})) == doctest::Approx(4.0));  // full-space cone
}

TEST_CASE("two-harmonic evaluation") {
  const auto th = make_speed("two-harmonic", 3);
  CHECK(th(vec({1, 1, 1})) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(th(vec({0, 1, 1})) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("cone violation names the facet") {
  const auto th = make_speed("two-harmonic", 3);
  try {
    th(vec({-1, 0.5, 0.2}));
    FAIL("expected domain error");
  } catch (const DomainError& e) {
    CHECK(e.facet() >= 0);
    CHECK(e.lambda().size() == 3);
    CHECK(std::string(e.what()).find("facet") != std::string::npos);
  }
  const auto pm = make_speed("power-mean:2", 3);
  CHECK_THROWS_AS(pm(vec({1.0, -0.1, 1.0})), DomainError);
}

TEST_CASE("permutation invariance") {
  SplitMix64 rng(7);
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd lam = random_positive(rng, n);
      Eigen::VectorXd perm = lam;
      std::reverse(perm.data(), perm.data() + n);
      CHECK(speed(lam) == doctest::Approx(speed(perm)).epsilon(1e-14));
    }
  }
}

TEST_CASE("jet of the mean is linear") {
  const auto mean3 = make_speed("mean", 3);
  const SpeedJet jet = mean3.jet(vec({0.3, 1.5, 7.0}));
  CHECK(jet.value == doctest::Approx(8.8));
  for (int i = 0; i < 3; ++i) CHECK(jet.grad[i] == doctest::Approx(1.0));
  CHECK(jet.hess.norm() == doctest::Approx(0.0));
}

TEST_CASE("two-harmonic jet at the umbilic point") {
  const auto th = make_speed("two-harmonic", 3);
  const SpeedJet jet = th.jet(vec({1, 1, 1}));
  CHECK(jet.grad[0] == doctest::Approx(jet.grad[1]).epsilon(1e-14));
  CHECK(jet.grad[1] == doctest::Approx(jet.grad[2]).epsilon(1e-14));
  CHECK(jet.grad.sum() == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  // frozen analytic Hessian: diag -2/27, off-diagonal 1/27
  CHECK(jet.hess(0, 0) == doctest::Approx(-2.0 / 27.0).epsilon(1e-12));
  CHECK(jet.hess(0, 1) == doctest::Approx(1.0 / 27.0).epsilon(1e-12));
}

TEST_CASE("Euler relation, monotonicity, gradient homogeneity: 1e4 points") {
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    SplitMix64 rng(fnv1a64(id));
    int tested = 0;
    double worst_euler = 0.0;
    while (tested < 10000) {
      const Eigen::VectorXd lam = random_positive(rng, n);
      if (!speed.cone().contains(lam)) continue;
      ++tested;
      const SpeedJet jet = speed.jet(lam);
      CHECK(jet.value > 0.0);
      CHECK(jet.grad.minCoeff() > 0.0);
      worst_euler = std::max(worst_euler,
                             std::abs(jet.value - lam.dot(jet.grad)) / jet.value);
      // 0-homogeneous gradient: hess * lambda = 0
      CHECK((jet.hess * lam).norm() <=
            1e-9 * (1.0 + jet.hess.norm() * lam.norm()));
    }
    CHECK(worst_euler <= 1e-10);
  }
}

TEST_CASE("jet matches finite differences at well-conditioned points") {
  SplitMix64 rng(99);
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd lam = random_positive(rng, n, -0.3, 0.5);
      if (!speed.cone().contains(lam)) continue;
      const SpeedJet jet = speed.jet(lam);
      const double h = 1e-5;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd lp = lam, lm = lam;
        lp[i] += h;
        lm[i] -= h;
        const double fd = (speed(lp) - speed(lm)) / (2 * h);
        CHECK(jet.grad[i] == doctest::Approx(fd).epsilon(1e-6));
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
          Eigen::VectorXd lpp = lam, lpm = lam, lmp = lam, lmm = lam;
          lpp[i] += h; lpp[j] += h;
          lpm[i] += h; lpm[j] -= h;
          lmp[i] -= h; lmp[j] += h;
          lmm[i] -= h; lmm[j] -= h;
          const double fd =
              (speed(lpp) - speed(lpm) - speed(lmp) + speed(lmm)) / (4 * h * h);
          CHECK(jet.hess(i, j) ==
                doctest::Approx(fd).epsilon(1e-5).scale(std::abs(jet.value)));
        }
      }
    }
  }
}

TEST_CASE("gamma_star") {
  const auto mean2 = make_speed("mean", 2);
  CHECK(gamma_star(mean2, vec({1, 1})) == doctest::Approx(0.5));
  // 1-homogeneity
  CHECK(gamma_star(mean2, vec({2, 4})) ==
        doctest::Approx(2.0 * gamma_star(mean2, vec({1, 2}))).epsilon(1e-14));
  // at the umbilic point gamma_* equals 1/gamma(1,...,1)
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    CHECK(gamma_star(speed, ones) ==
          doctest::Approx(1.0 / speed(ones)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gamma_star(mean2, vec({1, -1})), DomainError);
}

TEST_CASE("gamma_dagger and the -1/gamma_star identity") {
  const auto mean2 = make_speed("mean", 2);
  CHECK(gamma_dagger(mean2, vec({1, 1})) == doctest::Approx(-2.0));
  CHECK(gamma_dagger(mean2, vec({2, 2})) == doctest::Approx(-1.0));
  SplitMix64 rng(12345);
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd lam = random_positive(rng, n);
      const double prod = gamma_dagger(speed, lam) * gamma_star(speed, lam);
      CHECK(prod == doctest::Approx(-1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("restricted speeds") {
  const auto th = make_speed("two-harmonic", 3);
  const auto th1 = restrict_speed(th, 1);
  CHECK(th1.dimension() == 2);
  CHECK(th1(vec({1, 1})) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(th1(vec({2, 5})) == doctest::Approx(th(vec({0, 2, 5}))).epsilon(1e-14));

  // closed form of the once-restricted two-harmonic mean
  SplitMix64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd lam = random_positive(rng, 2);
    const double expect =
        1.0 / (1.0 / lam[0] + 1.0 / lam[1] + 1.0 / (lam[0] + lam[1]));
    CHECK(th1(lam) == doctest::Approx(expect).epsilon(1e-13));
  }

  const auto mean3 = make_speed("mean", 3);
  const auto mean_r = restrict_speed(mean3, 1);
  CHECK(mean_r(vec({4, 5})) == doctest::Approx(9.0));

  CHECK_THROWS_AS(restrict_speed(th, 2), DomainError);  // facet not in cone
  const auto pm = make_speed("power-mean:2", 3);
  CHECK_THROWS_AS(restrict_speed(pm, 1), DomainError);

  // registry spelling builds the parent at n+m
  const auto via_id = make_speed("restrict:two-harmonic:1", 2);
  CHECK(via_id(vec({1, 1})) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("mbar") {
  CHECK(mbar(make_speed("mean", 3)) == 2);
  CHECK(mbar(make_speed("mean", 2)) == 1);
  CHECK(mbar(make_speed("two-harmonic", 3)) == 1);
  CHECK(mbar(make_speed("harmonic-k:1", 3)) == 0);
  CHECK(mbar(make_speed("power-mean:2", 3)) == 0);
}

TEST_CASE("cylinder constants") {
  const auto mean3 = make_speed("mean", 3);
  CHECK(cylinder_constant(mean3, 1) == doctest::Approx(0.5));
  for (int n = 2; n <= 5; ++n) {
    const auto mean = make_speed("mean", n);
    for (int m = 0; m <= n - 1; ++m) {
      CHECK(cylinder_constant(mean, m) == doctest::Approx(1.0 / (n - m)));
    }
  }
  CHECK(cylinder_constant(make_speed("two-harmonic", 3), 1) ==
        doctest::Approx(2.5).epsilon(1e-14));
  CHECK_THROWS_AS(cylinder_constant(make_speed("two-harmonic", 3), 2),
                  DomainError);
}

TEST_CASE("cone distance") {
  const auto mean2 = make_speed("mean", 2);
  const ConeSpec pos2 = ConeSpec::positive(2);
  const ConeDistance d1 = cone_distance(pos2, mean2, vec({1, 1}));
  CHECK_FALSE(d1.on_boundary);
  CHECK(d1.value == doctest::Approx(0.5).epsilon(1e-14));

  const auto th = make_speed("two-harmonic", 3);
  const ConeDistance d2 = cone_distance(th.cone(), th, vec({0, 1, 1}));
  CHECK_FALSE(d2.on_boundary);
  CHECK(d2.value == doctest::Approx(1.0 / (0.4 * std::sqrt(2.0))).epsilon(1e-12));

  const auto mean3 = make_speed("mean", 3);
  const ConeDistance d3 = cone_distance(mean3.cone(), mean3, vec({1, 2, 3}));
  CHECK(std::isinf(d3.value));

  const ConeDistance d4 = cone_distance(pos2, mean2, vec({1, -1}));
  CHECK(d4.on_boundary);
  CHECK(d4.value == 0.0);
}

TEST_CASE("matrix speed") {
  const auto mean3 = make_speed("mean", 3);
  CHECK(matrix_speed(mean3, Eigen::MatrixXd::Identity(3, 3)) ==
        doctest::Approx(3.0));
  CHECK(matrix_speed(mean3, vec({1, 2, 3}).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(6.0));

  SplitMix64 rng(21);
  const auto th = make_speed("two-harmonic", 3);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::VectorXd lam = random_positive(rng, 3);
    const Eigen::MatrixXd d = lam.asDiagonal();
    const Eigen::MatrixXd q = random_orthogonal(rng, 3);
    CHECK(matrix_speed(th, q.transpose() * d * q) ==
          doctest::Approx(matrix_speed(th, d)).epsilon(1e-10));
  }
}

TEST_CASE("matrix Hessian quadratic form") {
  SplitMix64 rng(31);
  const auto mean3 = make_speed("mean", 3);
  const auto th = make_speed("two-harmonic", 3);

  // linear speed: vanishes identically
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd lam = random_positive(rng, 3);
    const Eigen::MatrixXd q = random_orthogonal(rng, 3);
    const Eigen::MatrixXd a = q.transpose() * lam.asDiagonal() * q;
    const Eigen::MatrixXd b = random_symmetric(rng, 3);
    CHECK(matrix_hessian_quadform(mean3, a, b) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  // radial direction: vanishes by 1-homogeneity
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd lam = random_positive(rng, 3);
    const Eigen::MatrixXd q = random_orthogonal(rng, 3);
    const Eigen::MatrixXd a = q.transpose() * lam.asDiagonal() * q;
    CHECK(matrix_hessian_quadform(th, a, a) ==
          doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
  }

  // frozen value at the repeated-eigenvalue point
  Eigen::MatrixXd b0 = Eigen::MatrixXd::Zero(3, 3);
  b0(0, 0) = 1.0;
  b0(1, 1) = -1.0;
  const Eigen::MatrixXd id3 = Eigen::MatrixXd::Identity(3, 3);
  const double analytic = matrix_hessian_quadform(th, id3, b0);
  CHECK(analytic == doctest::Approx(-2.0 / 9.0).epsilon(1e-12));
  CHECK(analytic ==
        doctest::Approx(fd_matrix_quadform(th, id3, b0)).epsilon(1e-5));
}

TEST_CASE("eigenbasis quadform agrees with finite differences") {
  SplitMix64 rng(41);
  for (const auto& [id, n] : kCatalog) {
    const auto speed = make_speed(id, n);
    for (int trial = 0; trial < 12; ++trial) {
      Eigen::VectorXd lam = random_positive(rng, n, -0.3, 0.3);
      if (trial % 3 == 0 && n >= 2) lam[1] = lam[0];  // force a repeated pair
      if (!speed.cone().contains(lam)) continue;
      const Eigen::MatrixXd q = random_orthogonal(rng, n);
      const Eigen::MatrixXd a = q.transpose() * lam.asDiagonal() * q;
      const Eigen::MatrixXd b = random_symmetric(rng, n);
      const double analytic = matrix_hessian_quadform(speed, a, b);
      const double fd = fd_matrix_quadform(speed, a, b);
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-5).scale(
                            1.0 + std::abs(analytic)));
    }
  }
}

TEST_CASE("custom registered speeds participate") {
  register_speed("scaled-mean", [](int n) {
    return make_custom_speed(
               "scaled-mean", ConeSpec::positive(n),
               [](std::span<const double> lam) {
                 double s = 0.0;
                 for (double x : lam) s += x;
                 return 0.5 * s;
               })
        .impl_ptr();
  });
  const auto via_registry = make_speed("scaled-mean", 3);
  CHECK(via_registry(vec({1, 2, 3})) == doctest::Approx(3.0));

  const auto custom = make_custom_speed(
      "half-mean", ConeSpec::positive(2), [](std::span<const double> lam) {
        return 0.5 * (lam[0] + lam[1]);
      });
  CHECK(custom(vec({1, 3})) == doctest::Approx(2.0));
  const SpeedJet jet = custom.jet(vec({1, 3}));
  CHECK(jet.grad[0] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(gamma_star(custom, vec({1, 1})) == doctest::Approx(1.0).epsilon(1e-9));
}
