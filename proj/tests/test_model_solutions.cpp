#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gammaflow/errors.hpp"
#include "gammaflow/models.hpp"

using namespace gammaflow;

namespace {

struct CatalogEntry {
  const char* id;
  int n;
};

const std::vector<CatalogEntry> kCatalog = {
    {"mean", 2},          {"mean", 3},         {"harmonic-k:1", 3},
    {"two-harmonic", 3},  {"power-mean:2", 3}, {"power-mean:-2", 3},
};

}  // namespace

TEST_CASE("cylinder radius") {
  const auto mean2 = make_speed("mean", 2);
  CHECK(cylinder_radius({mean2, 0}, -1.0) == doctest::Approx(2.0));
  CHECK(cylinder_radius({mean2, 1}, -1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(cylinder_radius({mean2, 0}, -1e-8) == doctest::Approx(2e-4));
  CHECK_THROWS_AS(cylinder_radius({mean2, 0}, 0.0), DomainError);
  CHECK_THROWS_AS(cylinder_radius({mean2, 2}, -1.0), DomainError);
}

TEST_CASE("cylinder trajectory satisfies the flow equation") {
  for (const auto& entry : kCatalog) {
    const auto speed = make_speed(entry.id, entry.n);
    for (int m = 0; m <= mbar(speed); ++m) {
      const ShrinkingCylinder cyl{speed, m};
      for (double t : {-4.0, -1.0, -0.3}) {
        const double h = 1e-6 * std::abs(t);
        const double drdt =
            (cylinder_radius(cyl, t + h) - cylinder_radius(cyl, t - h)) /
            (2.0 * h);
        const Eigen::VectorXd lam = cylinder_spectrum(cyl, t);
        const double g = speed.value_unchecked(
            {lam.data(), static_cast<size_t>(lam.size())});
        CHECK(drdt == doctest::Approx(-g).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("cylinder rescaled-curvature constants") {
  // sqrt(-t)|A| is time independent and equals sqrt((n-m) c_m / 2)
  for (int n = 2; n <= 4; ++n) {
    const auto mean = make_speed("mean", n);
    for (int m = 0; m <= n - 1; ++m) {
      CHECK(cylinder_type1_constant({mean, m}) ==
            doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    }
  }
  const auto th = make_speed("two-harmonic", 3);
  CHECK(cylinder_type1_constant({th, 1}) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
  CHECK(cylinder_type1_constant({th, 0}) ==
        doctest::Approx(std::sqrt(3.0 * 1.5 / 2.0)).epsilon(1e-14));

  // consistency across time: the sampled spectrum reproduces the constant
  const ShrinkingCylinder cyl{th, 1};
  for (double t : {-9.0, -2.0, -0.5}) {
    const double r = cylinder_radius(cyl, t);
    const double normA = std::sqrt(2.0) / r;  // two curved directions
    CHECK(std::sqrt(-t) * normA ==
          doctest::Approx(cylinder_type1_constant(cyl)).epsilon(1e-12));
  }
}

TEST_CASE("paraboloid curvature spectrum") {
  // c = 1 cases: mean with n - m = 1
  for (const auto& [n, m] : std::vector<std::pair<int, int>>{{2, 1}, {3, 2}}) {
    const auto mean = make_speed("mean", n);
    const TranslatingParaboloid bowl{mean, m};
    CHECK(cylinder_constant(mean, m) == doctest::Approx(1.0));

    const Eigen::VectorXd at0 = paraboloid_curvatures(bowl, 0.0);
    for (int i = 0; i < m - 1; ++i) CHECK(at0[i] == doctest::Approx(0.0));
    for (int i = m - 1; i < n; ++i) CHECK(at0[i] == doctest::Approx(1.0));

    const Eigen::VectorXd at1 = paraboloid_curvatures(bowl, 1.0);
    for (int i = 0; i < m - 1; ++i) CHECK(at1[i] == doctest::Approx(0.0));
    CHECK(at1[m - 1] == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
    for (int i = m; i < n; ++i) {
      CHECK(at1[i] == doctest::Approx(1.0 / std::sqrt(2.0)));
    }

    const Eigen::VectorXd far = paraboloid_curvatures(bowl, 1e6);
    CHECK(far.cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("paraboloid subsolution residual is nonnegative") {
  const auto grid = residual_s_grid();
  CHECK(grid.size() == 513);
  CHECK(grid.front() == 0.0);
  for (const auto& entry : kCatalog) {
    const auto speed = make_speed(entry.id, entry.n);
    for (int m = 1; m <= mbar(speed); ++m) {
      const TranslatingParaboloid bowl{speed, m};
      double worst = std::numeric_limits<double>::infinity();
      for (double s : grid) {
        worst = std::min(worst, paraboloid_subsolution_residual(bowl, s));
      }
      CHECK(worst >= -1e-12);
    }
  }
}

TEST_CASE("paraboloid residual values at the vertex and in the tail") {
  // At the vertex the spectrum has one extra curvature direction over the
  // cylinder's, so the speed strictly exceeds the translation rate:
  // residual(0) = c_m / c_(m-1) - 1.
  const auto mean3 = make_speed("mean", 3);
  CHECK(paraboloid_subsolution_residual({mean3, 1}, 0.0) ==
        doctest::Approx(0.5).epsilon(1e-13));  // (1/2)/(1/3) - 1
  CHECK(paraboloid_subsolution_residual({mean3, 2}, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-13));  // 1/(1/2) - 1

  const auto th = make_speed("two-harmonic", 3);
  CHECK(paraboloid_subsolution_residual({th, 1}, 0.0) ==
        doctest::Approx(2.5 / 1.5 - 1.0).epsilon(1e-13));

  // equality is approached only as the surface flattens
  const TranslatingParaboloid bowl{mean3, 1};
  double prev = paraboloid_subsolution_residual(bowl, 10.0);
  for (double s : {100.0, 1000.0}) {
    const double cur = paraboloid_subsolution_residual(bowl, s);
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("rescaled paraboloid gap shrinks with a") {
  const auto mean2 = make_speed("mean", 2);
  const TranslatingParaboloid bowl{mean2, 1};

  // degenerate region: both profiles pass through (R, 0)
  CHECK(rescaled_paraboloid_gap(bowl, 1.0, -1.0, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  double prev = std::numeric_limits<double>::infinity();
  for (double a : {1.0, 0.5, 0.25, 0.125}) {
    const double gap = rescaled_paraboloid_gap(bowl, a, -1.0, 5.0);
    CHECK(gap > 0.0);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("rescaled paraboloid gap vs a brute-force oracle") {
  const auto mean2 = make_speed("mean", 2);
  const TranslatingParaboloid bowl{mean2, 1};
  const double a = 1.0, t = -1.0, L = 5.0;
  const double c = cylinder_constant(mean2, 1);
  const double R = std::sqrt(-2.0 * t / c);

  // dense polylines, symmetric point-to-point Hausdorff
  const int M = 2000;
  std::vector<std::pair<double, double>> cyl, par;
  for (int i = 0; i <= M; ++i) {
    const double hgt = -L + 2.0 * L * i / M;
    cyl.emplace_back(R, hgt);
    const double lo = std::max(-L, t / a);
    const double hp = lo + (L - lo) * i / M;
    par.emplace_back(std::sqrt(R * R + 2.0 * a * hp / c), hp);
  }
  auto one_sided = [](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        const double dx = p.first - q.first, dy = p.second - q.second;
        best = std::min(best, dx * dx + dy * dy);
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  const double oracle = std::max(one_sided(cyl, par), one_sided(par, cyl));
  const double got = rescaled_paraboloid_gap(bowl, a, t, L);
  CHECK(got == doctest::Approx(oracle).epsilon(5e-3));
  CHECK(got > 0.1);  // finite, nontrivial at a = 1
}

TEST_CASE("cylinders are exactly uniformly parabolic") {
  // normalized curvatures lambda/G sit on a fixed ray, so the cone distance
  // is constant in time
  const auto th = make_speed("two-harmonic", 3);
  const ShrinkingCylinder cyl{th, 1};
  const ConeDistance ref =
      cone_distance(th.cone(), th, cylinder_spectrum(cyl, -1.0));
  CHECK(ref.value > 0.0);
  for (double t : {-64.0, -7.0, -0.01}) {
    const ConeDistance cd =
        cone_distance(th.cone(), th, cylinder_spectrum(cyl, t));
    CHECK_FALSE(cd.on_boundary);
    CHECK(cd.value == doctest::Approx(ref.value).epsilon(1e-12));
  }
}

TEST_CASE("exact sphere sampler") {
  const auto mean2 = make_speed("mean", 2);
  const auto traj =
      exact_sphere_trajectory(mean2, 0.0, {-4.0, -2.0, -1.0, -0.5}, 64);
  CHECK(traj.snapshots.size() == 4);
  for (const auto& snap : traj.snapshots) {
    const double R = std::sqrt(-4.0 * snap.time);  // c0 = 1/2
    for (const auto& nd : snap.nodes) {
      CHECK(nd.h == doctest::Approx(R).epsilon(1e-13));
      CHECK(nd.G == doctest::Approx(2.0 / R).epsilon(1e-13));
      CHECK(nd.normA == doctest::Approx(std::sqrt(2.0) / R).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(exact_sphere_trajectory(mean2, 0.0, {0.5}, 8), DomainError);
}

TEST_CASE("cylinder sampler spectra") {
  const auto mean3 = make_speed("mean", 3);
  const auto traj = sample_cylinder_trajectory({mean3, 1}, {-2.0, -1.0}, 9, 5.0);
  for (const auto& snap : traj.snapshots) {
    const double R = std::sqrt(-2.0 * snap.time / 0.5);
    for (const auto& nd : snap.nodes) {
      CHECK(nd.normA == doctest::Approx(std::sqrt(2.0) / R).epsilon(1e-13));
      CHECK(std::isinf(nd.rho1));
      CHECK(nd.rho2 == doctest::Approx(R));
    }
  }
}
