#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "denest/constructor.hpp"
#include "denest/metrics.hpp"

using namespace denest;

TEST_CASE("step_from_measure") {
  SUBCASE("single atom gives a constant step generator") {
    const auto m = DiscreteMeasure::create({{2.5}}, {1.0});
    const auto s = step_from_measure(m);
    REQUIRE(s.intervals() == 1);
    CHECK(step_eval(s, 0.0)[0] == 2.5);
    CHECK(step_eval(s, 1.0)[0] == 2.5);
  }
  SUBCASE("two equal weights cut at one half") {
    const auto m = DiscreteMeasure::create({{1.3, 1.3}, {-1.3, -1.3}}, {0.5, 0.5});
    const auto s = step_from_measure(m);
    REQUIRE(s.cuts.size() == 3);
    CHECK(s.cuts[0] == 0.0);
    CHECK(s.cuts[1] == doctest::Approx(0.5));
    CHECK(s.cuts[2] == 1.0);
    CHECK(step_eval(s, 0.25)[0] == 1.3);
    CHECK(step_eval(s, 0.75)[0] == -1.3);
  }
  SUBCASE("uniform pushforward recovers the atom masses") {
    const auto m = DiscreteMeasure::create({{0.0}, {1.0}, {2.0}}, {0.1, 0.6, 0.3});
    const auto s = step_from_measure(m);
    Rng rng(7);
    const std::size_t n = 1000000;
    std::vector<double> freq(3, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      freq[static_cast<std::size_t>(step_eval(s, rng.uniform01())[0] + 0.5)] += 1.0;
    for (std::size_t t = 0; t < 3; ++t) {
      const double w = m.weights[t];
      CHECK(std::abs(freq[t] / n - w) <= 4.0 * std::sqrt(w * (1.0 - w) / n));
    }
  }
}

TEST_CASE("relu_indicator") {
  IndicatorSpec spec;
  spec.value = {2.0, -1.0};
  spec.q_lo = 0.2;
  spec.q_hi = 0.7;
  spec.kappa = 0.05;
  const auto g = relu_indicator(spec);
  SUBCASE("four hidden units, shared across coordinates") { CHECK(g.hidden == 4); }
  SUBCASE("plateau value at the midpoint") {
    const auto v = eval(g, 0.45);
    CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("ramp endpoints") {
    CHECK(std::abs(eval(g, 0.2)[0]) <= 1e-9);
    CHECK(eval(g, 0.25)[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(eval(g, 0.65)[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(eval(g, 0.7)[0]) <= 1e-9);
  }
  SUBCASE("zero outside the interval") {
    for (double z : {0.0, 0.1, 0.19, 0.71, 0.9, 1.0})
      for (double v : eval(g, z)) CHECK(std::abs(v) <= 1e-9);
  }
  SUBCASE("max deviation from the indicator is the value itself, inside ramps only") {
    double worst = 0.0;
    double worst_z = 0.0;
    for (int k = 0; k <= 10000; ++k) {
      const double z = k / 10000.0;
      const double ind = (z > spec.q_lo && z <= spec.q_hi) ? 1.0 : 0.0;
      const double dev = std::abs(eval(g, z)[0] - spec.value[0] * ind);
      if (dev > worst) {
        worst = dev;
        worst_z = z;
      }
    }
    CHECK(worst <= std::abs(spec.value[0]) + 1e-9);
    const bool in_ramp = (worst_z >= spec.q_lo && worst_z <= spec.q_lo + spec.kappa) ||
                         (worst_z >= spec.q_hi - spec.kappa && worst_z <= spec.q_hi);
    CHECK(in_ramp);
  }
  SUBCASE("too-wide ramps are infeasible") {
    IndicatorSpec bad = spec;
    bad.kappa = 0.3;
    CHECK_THROWS_AS(relu_indicator(bad), InfeasibleError);
  }
}

TEST_CASE("relu_from_step") {
  const auto m = DiscreteMeasure::create({{1.0}, {-2.0}, {0.5}}, {0.3, 0.45, 0.25});
  const auto s = step_from_measure(m);
  const double kappa = 0.02;
  const auto g = relu_from_step(s, kappa);
  SUBCASE("hidden width is 4N") { CHECK(g.hidden == 12); }
  SUBCASE("agrees with the step away from the ramps") {
    for (int k = 1; k < 200; ++k) {
      const double z = k / 200.0;
      bool in_ramp = false;
      for (std::size_t t = 0; t + 1 < s.cuts.size(); ++t) {
        if ((z >= s.cuts[t] - 1e-12 && z <= s.cuts[t] + kappa + 1e-12) ||
            (z >= s.cuts[t + 1] - kappa - 1e-12 && z <= s.cuts[t + 1] + 1e-12))
          in_ramp = true;
      }
      if (in_ramp) continue;
      CHECK(std::abs(eval(g, z)[0] - step_eval(s, z)[0]) <= 1e-9);
    }
  }
  SUBCASE("kappa too large is infeasible") {
    CHECK_THROWS_AS(relu_from_step(s, 0.2), InfeasibleError);
  }
}

TEST_CASE("l2_step_gap closed form") {
  SUBCASE("zero values give zero gap") {
    const auto s = StepGenerator::create({0.0, 0.5, 1.0}, {{0.0}, {0.0}});
    CHECK(l2_step_gap(s, 0.01) == 0.0);
  }
  SUBCASE("benchmark two-interval value") {
    const auto s = StepGenerator::create({0.0, 0.5, 1.0}, {{1.3, 1.3}, {-1.3, -1.3}});
    CHECK(l2_step_gap(s, 1e-5) == doctest::Approx(4.5066666666666666e-5).epsilon(1e-12));
  }
  SUBCASE("linear in kappa") {
    const auto s = StepGenerator::create({0.0, 0.4, 1.0}, {{2.0}, {-1.0}});
    const double g1 = l2_step_gap(s, 0.01);
    const double g2 = l2_step_gap(s, 0.02);
    CHECK(g2 == doctest::Approx(2.0 * g1).epsilon(1e-14));
  }
}

TEST_CASE("relu_from_step L2 error equals the closed-form gap") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 1 + trial % 2;
    const int n = 2 + static_cast<int>(rng.uniform01() * 4);
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
    const auto s = step_from_measure(DiscreteMeasure::create(atoms, w));
    const double kappa = s.min_interval_length() * 0.1;
    const auto g = relu_from_step(s, kappa);
    // Simpson over each ramp with the step held at its interior value
    auto simpson = [&](double a, double b) {
      const Point step_val = step_eval(s, 0.5 * (a + b));
      const int nodes = 33;
      const double h = (b - a) / (nodes - 1);
      double acc2 = 0.0;
      for (int k = 0; k < nodes; ++k) {
        const double wq = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc2 += wq * dist_sq(step_val, eval(g, a + k * h));
      }
      return acc2 * h / 3.0;
    };
    double numeric = 0.0;
    for (std::size_t t = 0; t + 1 < s.cuts.size(); ++t) {
      numeric += simpson(s.cuts[t], s.cuts[t] + kappa);
      numeric += simpson(s.cuts[t + 1] - kappa, s.cuts[t + 1]);
    }
    CHECK(std::abs(l2_step_gap(s, kappa) - numeric) <= 1e-12);
  }
}

TEST_CASE("brute force two-mixture generator") {
  const Point m{1.3, 1.3};
  const auto p = brute_force_two_mixture(m, 1e-5);
  SUBCASE("sigma one and eight hidden units") {
    CHECK(p.sigma == 1.0);
    CHECK(p.shallow().hidden == 8);
  }
  SUBCASE("plateau evaluation at z = 0.25") {
    const auto v = eval(p.shallow(), 0.25);
    CHECK(v[0] == doctest::Approx(1.3).epsilon(1e-9));
    CHECK(v[1] == doctest::Approx(1.3).epsilon(1e-9));
    const auto w = eval(p.shallow(), 0.75);
    CHECK(w[0] == doctest::Approx(-1.3).epsilon(1e-9));
  }
  SUBCASE("sup norm equals the max coordinate of m") {
    CHECK(sup_norm(p.shallow()) == doctest::Approx(1.3).epsilon(1e-9));
  }
  SUBCASE("hellinger to the target mixture is within the lemma bound") {
    const auto target = DiscreteMeasure::create({{1.3, 1.3}, {-1.3, -1.3}}, {0.5, 0.5});
    const auto step = step_from_measure(target);
    const double bound_sq = l2_step_gap(step, 1e-5) / 8.0;
    CHECK(bound_sq == doctest::Approx(5.633333333333333e-6).epsilon(1e-10));
    const PreparedDensity pd(p);
    const auto grid = QuadratureGrid::symmetric(2, 1.3 + 8.0, 301);
    const double dh = hellinger_quadrature(
        [&](const Point& x) { return mixture_density(target, 1.0, x); },
        [&pd](const Point& x) { return pd.density(x); }, grid);
    CHECK(dh * dh <= bound_sq + 1e-6);
    CHECK(dh * dh <= 1e-4);
  }
  SUBCASE("kappa must be below one quarter") {
    CHECK_THROWS_AS(brute_force_two_mixture(m, 0.3), std::invalid_argument);
  }
}

TEST_CASE("theorem-1 pipeline") {
  const auto input = DiscreteMeasure::create({{-1.0}, {-0.2}, {0.4}, {1.1}},
                                             {0.4, 0.3, 0.2995, 0.0005});
  PipelineOptions opt;
  opt.beta = 1.0;
  opt.tau3 = 2.0;
  opt.c4 = 2.0;
  opt.quad_points = 401;
  const auto res = theorem1_generator(input, 0.3, opt);
  SUBCASE("five stages with measured increments within bounds") {
    REQUIRE(res.stages.size() == 5);
    CHECK(res.stages[0].stage == "quantize");
    CHECK(res.stages[1].stage == "merge");
    CHECK(res.stages[2].stage == "extend");
    CHECK(res.stages[3].stage == "step");
    CHECK(res.stages[4].stage == "relu");
    for (const auto& st : res.stages) CHECK(st.measured <= st.bound + 1e-6);
  }
  SUBCASE("mixing measure mass is conserved at every stage") {
    double sum = 0.0;
    for (double w : res.final_measure.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("output generator is in the stated sieve") {
    GenerativeDensity p;
    p.generator = res.generator;
    p.sigma = res.sigma;
    CHECK(res.sieve().contains(p));
    CHECK(res.generator.hidden == 4 * static_cast<int>(res.final_measure.size()));
  }
  SUBCASE("kappa default follows the schedule") {
    CHECK(res.kappa == doctest::Approx(0.5 * std::pow(0.3, 7.0)));
  }
  SUBCASE("stage infeasibility carries the stage name") {
    // sigma = 0.86 gives merge threshold 0.86^6 = 0.405, above every weight;
    // c4 is enlarged so the grid cube still covers the atoms
    PipelineOptions wide = opt;
    wide.c4 = 50.0;
    CHECK_THROWS_WITH_AS(theorem1_generator(input, 0.86, wide), doctest::Contains("merge"),
                         InfeasibleError);
  }
  SUBCASE("direct mode skips discretization") {
    PipelineOptions direct;
    direct.discretize = false;
    direct.kappa_override = 1e-4;
    const auto r2 = theorem1_generator(input, 1.0, direct);
    REQUIRE(r2.stages.size() == 2);
    CHECK(r2.stages[0].stage == "step");
    CHECK(r2.stages[1].stage == "relu");
    CHECK(r2.generator.hidden == 16);
  }
}
