#include <doctest.h>

#include <cmath>

#include "asymptotics.hpp"
#include "error.hpp"
#include "fixpoint.hpp"
#include "stats.hpp"

using namespace mst;

namespace {

FixedPointSpec spec_of(Family f, int p, MapKind k) {
  FixedPointSpec s;
  s.instance = {f, p};
  s.kind = k;
  return s;
}

}  // namespace

TEST_SUITE("fixpoint") {
  TEST_CASE("split samples partition the unit mass") {
    Philox r(1, 0);
    for (int i = 0; i < 1000; ++i) {
      double s = 0;
      for (double v : sample_spacings(27, r)) {
        CHECK(v > 0);
        s += v;
      }
      CHECK(std::fabs(s - 1) < 1e-12);
      s = 0;
      for (double v : sample_volumes(3, r)) s += v;
      CHECK(std::fabs(s - 1) < 1e-12);
    }
  }

  TEST_CASE("median sample is Beta(t+1, t+1)") {
    Philox r(2, 0);
    for (int t : {1, 4}) {
      RunningStats s;
      for (int i = 0; i < 200000; ++i) s.add(sample_median(t, r));
      const double var = 1.0 / (4.0 * (2 * t + 3));
      CHECK(std::fabs(s.mean - 0.5) < 4 * std::sqrt(var / 200000));
      CHECK(s.var() == doctest::Approx(var).epsilon(0.02));
    }
  }

  TEST_CASE("second-root moment of a spacing") {
    // E[V₁^{λ₂−1}] = 1/m
    const Spectrum s = solve_spectrum({Family::mary, 27});
    const cplx e = s.roots[1] - 1.0;
    Philox r(3, 0);
    RunningStats re, im;
    for (int i = 0; i < 1000000; ++i) {
      const cplx p = std::exp(e * std::log(sample_spacings(27, r)[0]));
      re.add(p.real());
      im.add(p.imag());
    }
    CHECK(std::fabs(re.mean - 1.0 / 27) < 3 * std::sqrt(re.var() / re.n));
    CHECK(std::fabs(im.mean) < 3 * std::sqrt(im.var() / im.n));
  }

  TEST_CASE("key toll is centred") {
    for (int m : {3, 10}) {
      CAPTURE(m);
      const FixedPointSpec k = spec_of(Family::mary, m, MapKind::uniK);
      FixedPointSpec n = k;
      n.toll = TollKind::N;
      const double phi = phi_mary(m).get_d();
      Philox r(4, m);
      RunningStats s;
      for (int i = 0; i < 1000000; ++i) {
        const auto v = sample_split_weights(k, r);
        const double b = toll(k, v);
        if (i < 1000) CHECK(toll(n, v) == doctest::Approx(phi * b).epsilon(1e-14));
        s.add(b);
      }
      CHECK(std::fabs(s.mean) < 3 * std::sqrt(s.var() / s.n));
    }
  }

  TEST_CASE("one-dimensional quadtree toll") {
    const FixedPointSpec q = spec_of(Family::quadtree, 1, MapKind::Tquad_normal);
    Philox r(5, 0);
    for (int i = 0; i < 100; ++i) {
      const auto v = sample_split_weights(q, r);
      REQUIRE(v.size() == 2);
      const double x = v[0];
      CHECK(toll(q, v) == doctest::Approx(1 + 2 * (x * std::log(x) + (1 - x) * std::log(1 - x))).epsilon(1e-13));
    }
  }

  TEST_CASE("contraction factors") {
    for (int m = 27; m <= 60; ++m)
      for (const auto& c : contraction_checks(spec_of(Family::mary, m, MapKind::TN_periodic))) {
        CAPTURE(m);
        CAPTURE(c.name);
        CHECK(c.ok);
        CHECK(c.value < 1);
      }
    for (int m = 3; m <= 26; ++m)
      for (const auto& c : contraction_checks(spec_of(Family::mary, m, MapKind::TNprime_normal))) CHECK(c.ok);
    for (int t : {59, 80})
      for (const auto& c : contraction_checks(spec_of(Family::fbbst, t, MapKind::Tmed_periodic))) CHECK(c.ok);
    for (int d : {9, 12})
      for (const auto& c : contraction_checks(spec_of(Family::quadtree, d, MapKind::Tquad_periodic))) CHECK(c.ok);
  }

  TEST_CASE("map spec checks") {
    CHECK_THROWS_AS(check_spec(spec_of(Family::mary, 20, MapKind::TN_periodic)), Error);
    CHECK_THROWS_AS(check_spec(spec_of(Family::mary, 27, MapKind::TNprime_normal)), Error);
    CHECK_THROWS_AS(check_spec(spec_of(Family::fbbst, 3, MapKind::TN_periodic)), Error);
    CHECK_THROWS_AS(check_spec(spec_of(Family::quadtree, 8, MapKind::Tquad_periodic)), Error);
    CHECK_NOTHROW(check_spec(spec_of(Family::fbbst, 59, MapKind::Tmed_periodic)));
    CHECK_THROWS_AS(iterate(spec_of(Family::mary, 3, MapKind::uniK), 999, 2, 1), Error);
    CHECK(mean_constraint(spec_of(Family::mary, 3, MapKind::uniK)) == cplx(0.0));
    const cplx th = theta(solve_spectrum({Family::mary, 27}));
    CHECK(mean_constraint(spec_of(Family::mary, 27, MapKind::TN_periodic)) == th);
    CHECK(parse_map_kind("TNprime_normal") == MapKind::TNprime_normal);
    CHECK_THROWS_AS(parse_map_kind("TX"), Error);
  }

  TEST_CASE("key fixed point variance") {
    for (int m : {3, 10}) {
      CAPTURE(m);
      const SamplePool p = iterate(spec_of(Family::mary, m, MapKind::uniK), 100000, 30, 11, 2);
      CHECK(p.samples.size() == 100000);
      CHECK(p.trace.size() == 31);
      const TraceRow& last = p.trace.back();
      CHECK(last.var_x == doctest::Approx(c_K_mary(m)).epsilon(0.05));
      CHECK(std::fabs(last.mean_x) < 4 * std::sqrt(last.var_x / 100000 * 30));
    }
  }

  TEST_CASE("node-depth toll scales the limit by phi") {
    FixedPointSpec s = spec_of(Family::mary, 3, MapKind::uniK);
    const SamplePool k = iterate(s, 100000, 30, 12, 2);
    s.toll = TollKind::N;
    const SamplePool n = iterate(s, 100000, 30, 12, 2);
    const double phi = 0.6;
    CHECK(n.trace.back().var_x / k.trace.back().var_x == doctest::Approx(phi * phi).epsilon(0.05));
  }

  TEST_CASE("key limit is skewed") {
    const FixedPointSpec s = spec_of(Family::mary, 3, MapKind::uniK);
    const Diagnostics d = diagnose(iterate(s, 100000, 30, 13, 2), s);
    CHECK(std::fabs(d.skew_x) > 0.1);
  }

  TEST_CASE("normal component map") {
    const FixedPointSpec s = spec_of(Family::mary, 3, MapKind::TNprime_normal);
    const SamplePool p = iterate(s, 100000, 30, 14, 2);
    const Diagnostics d = diagnose(p, s);
    CHECK(d.normal_map);
    CHECK(d.ks_p > 0.01);
    CHECK(std::fabs(d.pearson) < 0.05);
    CHECK(d.dcor < 0.1);
  }

  TEST_CASE("iterated normal slot converges to a standard normal") {
    FixedPointSpec s = spec_of(Family::mary, 3, MapKind::TNprime_normal);
    s.iterate_normal = true;
    const Diagnostics d = diagnose(iterate(s, 100000, 30, 15, 2), s);
    CHECK(d.ks_p > 0.01);
    CHECK(std::fabs(d.pearson) < 0.05);
  }

  TEST_CASE("periodic map preserves the mean") {
    const FixedPointSpec s = spec_of(Family::mary, 27, MapKind::TN_periodic);
    const std::int64_t pool = 20000;
    const SamplePool p = iterate(s, pool, 15, 16, 2);
    const cplx th = mean_constraint(s);
    double acc = 0;  // Σ per-generation variance of the pool mean
    std::vector<double> pooled{0.0};
    for (std::size_t g = 1; g < p.trace.size(); ++g) {
      acc += p.trace[g].var_w / double(pool);
      pooled.push_back(acc);
      CAPTURE(g);
      CHECK(std::abs(p.trace[g].mean_w - th) < 3 * std::sqrt(acc));
      CHECK(std::fabs(p.trace[g].mean_x) < 3 * std::sqrt(g * p.trace[g].var_x / double(pool)));
    }
    for (std::size_t g = 1; g + 5 < p.trace.size(); ++g) {
      const double se = std::sqrt(pooled[g + 5] - pooled[g]);
      CHECK(std::abs(p.trace[g + 5].mean_w - p.trace[g].mean_w) < 3 * se);
    }
  }

  TEST_CASE("deterministic replay across worker counts") {
    const FixedPointSpec s = spec_of(Family::fbbst, 2, MapKind::Tmed_normal);
    const SamplePool a = iterate(s, 5000, 4, 21, 1), b = iterate(s, 5000, 4, 21, 4);
    CHECK(pool_csv(a) == pool_csv(b));
    CHECK(trace_csv(a) == trace_csv(b));
    CHECK(trace_csv(a).rfind("generation,mean_x,var_x,mean_re_w,mean_im_w,var_w,cov\n", 0) == 0);
    CHECK(pool_csv(a).rfind("x,re_w,im_w\n", 0) == 0);
  }

  TEST_CASE("median and quadtree maps run") {
    for (const FixedPointSpec& s :
         {spec_of(Family::fbbst, 59, MapKind::Tmed_periodic), spec_of(Family::quadtree, 9, MapKind::Tquad_periodic),
          spec_of(Family::quadtree, 2, MapKind::Tquad_normal)}) {
      const SamplePool p = iterate(s, 5000, 5, 31, 2);
      CHECK(p.trace.size() == 6);
      CHECK(std::isfinite(p.trace.back().var_x));
      CHECK(p.trace.back().var_x > 0);
    }
  }
}
