#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "denest/measures.hpp"
#include "denest/metrics.hpp"
#include "denest/rng.hpp"

using namespace denest;

namespace {
DensityFn normal1(double mu, double var) {
  return [mu, var](const Point& x) {
    return std::exp(-sq(x[0] - mu) / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
  };
}

DiscreteMeasure random_measure(int d, int n, Rng& rng) {
  std::vector<Point> atoms;
  std::vector<double> w;
  double sum = 0.0;
  for (int t = 0; t < n; ++t) {
    Point a(d);
    for (int i = 0; i < d; ++i) a[i] = rng.uniform(-2.0, 2.0);
    atoms.push_back(a);
    w.push_back(rng.uniform(0.2, 1.0));
    sum += w.back();
  }
  for (auto& x : w) x /= sum;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) acc += w[i];
  w.back() = 1.0 - acc;
  return DiscreteMeasure::create(atoms, w);
}
}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(QuadratureGrid::symmetric(1, 5.0, 400), std::invalid_argument);  // even
  CHECK_THROWS_AS(QuadratureGrid::symmetric(1, 5.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureGrid::box({0.0}, {0.0}, 11), std::invalid_argument);
  CHECK_NOTHROW(QuadratureGrid::symmetric(3, 5.0, 101));
  CHECK_THROWS_AS(QuadratureGrid::symmetric(3, 5.0, 401), std::invalid_argument);  // budget
}

TEST_CASE("hellinger quadrature") {
  SUBCASE("identical densities give zero") {
    const auto p = normal1(0.0, 1.0);
    CHECK(hellinger_quadrature(p, p, QuadratureGrid::symmetric(1, 10.0, 401)) <= 1e-12);
  }
  SUBCASE("N(0,1) vs N(0,4) matches the closed form") {
    const double dh = hellinger_quadrature(normal1(0.0, 1.0), normal1(0.0, 4.0),
                                           QuadratureGrid::symmetric(1, 25.0, 801));
    CHECK(dh == doctest::Approx(0.32491969623290633).epsilon(1e-8));
  }
  SUBCASE("fourth-order convergence under grid refinement") {
    const double exact = 0.32491969623290633;
    const auto p = normal1(0.0, 1.0);
    const auto q = normal1(0.0, 4.0);
    const double e1 =
        std::abs(hellinger_quadrature(p, q, QuadratureGrid::symmetric(1, 25.0, 51)) - exact);
    const double e2 =
        std::abs(hellinger_quadrature(p, q, QuadratureGrid::symmetric(1, 25.0, 101)) - exact);
    const double e4 =
        std::abs(hellinger_quadrature(p, q, QuadratureGrid::symmetric(1, 25.0, 201)) - exact);
    CHECK(e2 < e1);
    CHECK(e4 < e2);
    // halving h shrinks the error by at least ~2^3 for a 4th-order rule on
    // this smooth integrand
    CHECK(e2 <= e1 / 8.0);
    CHECK(e4 <= e2 / 8.0);
  }
  SUBCASE("non-finite density values are reported with the node") {
    const DensityFn bad = [](const Point& x) {
      return x[0] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    CHECK_THROWS_WITH_AS(
        hellinger_quadrature(bad, normal1(0.0, 1.0), QuadratureGrid::symmetric(1, 1.0, 11)),
        doctest::Contains("node"), std::runtime_error);
  }
  SUBCASE("symmetry is exact") {
    const auto p = normal1(0.3, 1.0);
    const auto q = normal1(-0.4, 2.0);
    const auto grid = QuadratureGrid::symmetric(1, 15.0, 201);
    CHECK(hellinger_quadrature(p, q, grid) == hellinger_quadrature(q, p, grid));
  }
}

TEST_CASE("gaussian closed form") {
  SUBCASE("identical gaussians") {
    CHECK(gaussian_hellinger({0.0, 0.0}, {1, 0, 0, 1}, {0.0, 0.0}, {1, 0, 0, 1}) == 0.0);
  }
  SUBCASE("equal covariance, shifted mean") {
    const double dh = gaussian_hellinger({0.0, 0.0}, {1, 0, 0, 1}, {2.0, 0.0}, {1, 0, 0, 1});
    CHECK(dh * dh == doctest::Approx(0.39346934028736658).epsilon(1e-12));
  }
  SUBCASE("bounded by sqrt(2)") {
    const double dh =
        gaussian_hellinger({0.0}, {0.01}, {50.0}, {100.0});
    CHECK(dh <= std::sqrt(2.0));
    CHECK(dh <= 1.0);  // normalized convention
  }
  SUBCASE("non-SPD covariance is rejected") {
    CHECK_THROWS_AS(gaussian_hellinger({0.0, 0.0}, {1, 2, 2, 1}, {0.0, 0.0}, {1, 0, 0, 1}),
                    std::domain_error);
    CHECK_THROWS_AS(gaussian_hellinger({0.0}, {-1.0}, {0.0}, {1.0}), std::domain_error);
  }
  SUBCASE("agrees with quadrature to 1e-6 in 2-D") {
    const Point mu1{0.2, -0.3}, mu2{-0.5, 0.4};
    const std::vector<double> s1{1.3, 0.4, 0.4, 0.9}, s2{0.7, -0.2, -0.2, 1.1};
    const double closed = gaussian_hellinger(mu1, s1, mu2, s2);
    const double det2 = s2[0] * s2[3] - s2[1] * s2[2];
    const double det1 = s1[0] * s1[3] - s1[1] * s1[2];
    const DensityFn p = [&](const Point& x) {
      const double dx = x[0] - mu1[0], dy = x[1] - mu1[1];
      const double q = (dx * dx * s1[3] - 2 * dx * dy * s1[1] + dy * dy * s1[0]) / det1;
      return std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(det1));
    };
    const DensityFn q = [&](const Point& x) {
      const double dx = x[0] - mu2[0], dy = x[1] - mu2[1];
      const double qq = (dx * dx * s2[3] - 2 * dx * dy * s2[1] + dy * dy * s2[0]) / det2;
      return std::exp(-0.5 * qq) / (2.0 * kPi * std::sqrt(det2));
    };
    const double quad = hellinger_quadrature(p, q, QuadratureGrid::symmetric(2, 12.0, 401));
    CHECK(std::abs(closed - quad) <= 1e-6);
  }
}

TEST_CASE("kl divergence quadrature") {
  SUBCASE("identical densities") {
    const auto p = normal1(0.0, 1.0);
    CHECK(std::abs(kl_quadrature(p, p, QuadratureGrid::symmetric(1, 12.0, 401))) <= 1e-12);
  }
  SUBCASE("unit mean shift gives 1/2") {
    const double kl = kl_quadrature(normal1(0.0, 1.0), normal1(1.0, 1.0),
                                    QuadratureGrid::symmetric(1, 14.0, 801));
    CHECK(kl == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("vanishing q under positive p is a divergence error") {
    const DensityFn q = [](const Point& x) { return x[0] > 0.0 ? 0.0 : 1.0; };
    CHECK_THROWS_WITH_AS(
        kl_quadrature(normal1(0.0, 1.0), q, QuadratureGrid::symmetric(1, 2.0, 11)),
        doctest::Contains("vanishes"), std::runtime_error);
  }
  SUBCASE("KL dominates squared Hellinger on random mixture pairs") {
    Rng rng(41);
    for (int t = 0; t < 8; ++t) {
      const auto a = random_measure(1, 3, rng);
      const auto b = random_measure(1, 3, rng);
      const double sa = rng.uniform(0.4, 1.2);
      const double sb = rng.uniform(0.4, 1.2);
      const DensityFn p = [&](const Point& x) { return mixture_density(a, sa, x); };
      const DensityFn q = [&](const Point& x) { return mixture_density(b, sb, x); };
      const auto grid = QuadratureGrid::symmetric(1, 2.0 + 8.0 * 1.2, 401);
      const double dh = hellinger_quadrature(p, q, grid);
      const double kl = kl_quadrature(p, q, grid);
      CHECK(kl >= dh * dh - 2e-6);
    }
  }
}

TEST_CASE("monte carlo hellinger") {
  SUBCASE("identical densities stay within 3 standard errors of zero") {
    const auto p = normal1(0.0, 1.0);
    Rng rng(51);
    const auto sampler = [&rng]() { return Point{rng.normal()}; };
    const auto est = hellinger_mc(p, p, sampler, 20000);
    CHECK(est.value * est.value <= 3.0 * est.std_error * 2.0 * std::max(est.value, 1e-6) +
                                       1e-9);
  }
  SUBCASE("agrees with quadrature on a 2-D mixture") {
    Rng rng(53);
    const auto a = random_measure(2, 3, rng);
    const auto b = random_measure(2, 3, rng);
    const double sigma = 0.9;
    const DensityFn p = [&](const Point& x) { return mixture_density(a, sigma, x); };
    const DensityFn q = [&](const Point& x) { return mixture_density(b, sigma, x); };
    const double quad =
        hellinger_quadrature(p, q, QuadratureGrid::symmetric(2, 2.0 + 8.0 * sigma, 301));
    Rng srng(54);
    const auto sampler = [&]() {
      auto pts = sample_mixture(a, sigma, srng, 1);
      return pts.front();
    };
    const auto est = hellinger_mc(p, q, sampler, 100000);
    const double se_dh = est.std_error;
    CHECK(std::abs(est.value - quad) <= 4.0 * std::max(se_dh, 1e-4));
  }
  SUBCASE("deterministic under a fixed seed") {
    const auto p = normal1(0.0, 1.0);
    const auto q = normal1(0.5, 1.0);
    Rng r1(77), r2(77);
    const auto s1 = [&r1]() { return Point{r1.normal()}; };
    const auto s2 = [&r2]() { return Point{r2.normal()}; };
    CHECK(hellinger_mc(p, q, s1, 5000).value == hellinger_mc(p, q, s2, 5000).value);
  }
}

TEST_CASE("convolution rate check") {
  SUBCASE("slope is 2 within 0.05 in d = 1 and d = 3") {
    std::vector<double> sigmas;
    for (int i = 0; i < 8; ++i) sigmas.push_back(0.05 + i * (0.15 / 7.0));
    for (int d : {1, 3}) {
      const auto fit = convolution_rate_check(sigmas, d);
      CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.025));
    }
  }
  SUBCASE("distance is monotone in sigma") {
    const auto fit = convolution_rate_check({0.05, 0.1, 0.15, 0.2}, 2);
    for (std::size_t i = 0; i + 1 < fit.distances.size(); ++i)
      CHECK(fit.distances[i] < fit.distances[i + 1]);
  }
  SUBCASE("fewer than 3 sigma values is an input error") {
    CHECK_THROWS_AS(convolution_rate_check({0.1, 0.2}, 1), std::invalid_argument);
  }
}

TEST_CASE("triangle inequality on mixture triples") {
  Rng rng(61);
  const auto grid = QuadratureGrid::symmetric(1, 2.0 + 8.0 * 1.0, 401);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_measure(1, 3, rng);
    const auto b = random_measure(1, 3, rng);
    const auto c = random_measure(1, 3, rng);
    const DensityFn pa = [&](const Point& x) { return mixture_density(a, 0.8, x); };
    const DensityFn pb = [&](const Point& x) { return mixture_density(b, 0.8, x); };
    const DensityFn pc = [&](const Point& x) { return mixture_density(c, 0.8, x); };
    const double ab = hellinger_quadrature(pa, pb, grid);
    const double bc = hellinger_quadrature(pb, pc, grid);
    const double ac = hellinger_quadrature(pa, pc, grid);
    CHECK(ac <= ab + bc + 2e-6);
  }
}
