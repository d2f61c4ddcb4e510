#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "asymptotics.hpp"
#include "error.hpp"
#include "moments.hpp"

using namespace mst;

namespace {

const double kQuicksortVar = 7.0 - 2.0 * kPi * kPi / 3.0;

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("occupancy constants are exact") {
    CHECK(phi_mary(3) == mpq_class(3, 5));
    CHECK(phi_fbbst(1) == mpq_class(3, 7));
    for (int m = 3; m <= 40; ++m) CHECK(phi_mary(m) == 1 / (2 * (harmonic(m) - 1)));
    for (int t = 1; t <= 30; ++t) CHECK(phi_fbbst(t) == 1 / (2 * (t + 1) * (harmonic(2 * t + 2) - harmonic(t + 1))));
  }

  TEST_CASE("quicksort reductions") {
    CHECK(c_K_mary(2) == doctest::Approx(kQuicksortVar).epsilon(1e-12));
    CHECK(E_X(1) == doctest::Approx(kQuicksortVar).epsilon(1e-12));
    CHECK(D_X(0) == doctest::Approx(kQuicksortVar).epsilon(1e-12));
    CHECK(c_K_mary(3) == doctest::Approx(36.0 / 25 * (31.0 / 18 - kPi * kPi / 6)).epsilon(1e-12));
  }

  TEST_CASE("variance constants are positive") {
    for (int m = 3; m <= 60; ++m) CHECK(constants({Family::mary, m}).cK > 0);
    for (int t = 1; t <= 60; ++t) CHECK(constants({Family::fbbst, t}).cK > 0);
    for (int d = 1; d <= 12; ++d) CHECK(constants({Family::quadtree, d}).cK > 0);
  }

  TEST_CASE("c2 - phi c1 rationals") {
    CHECK(c2_minus_phi_c1_exact(3) == mpq_class(12, 125));
    CHECK(c2_minus_phi_c1_exact(4) == mpq_class(222, 2197));
    for (int m = 3; m <= 30; ++m) {
      CAPTURE(m);
      const FamilyConstants c = constants({Family::mary, m});
      REQUIRE(c.c2_minus_phi_c1.has_value());
      REQUIRE(c.c2_printed.has_value());
      CHECK(*c.c2_minus_phi_c1 == *c.c2_printed);
      const double e = c.c2_minus_phi_c1->get_d();
      CHECK(std::fabs(c.c2_root_sum - e) <= 1e-9 * std::fabs(e));
    }
    CHECK_FALSE(c2_printed(31).has_value());
  }

  TEST_CASE("c1 against the exact key-depth table") {
    // fit (κ_n − 2φ n H_n)/n = c + a/n on the top of the horizon
    const int lo = 2500, hi = 10000;
    for (int m : {3, 5, 10, 13}) {
      CAPTURE(m);
      const MomentTable t = mean_tables({Family::mary, m}, hi, Mode::float64);
      const FamilyConstants c = constants({Family::mary, m});
      const double phi = c.phi.get_d();
      double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
      for (int n = lo; n <= hi; n += 100) {
        const double x = 1.0 / n, y = (t.value("kappa", n) - 2 * phi * n * harmonic_d(n)) / n;
        sx += x, sy += y, sxx += x * x, sxy += x * y, k += 1;
      }
      const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
      const double intercept = (sy - slope * sx) / k;
      CHECK(std::fabs(intercept - c.c_prime) < 1e-3);
      CHECK(c.c1 == doctest::Approx(c.c_prime + 2 * phi * kEulerGamma));
      CHECK(std::fabs(intercept - (c.c1_printed - 2 * phi * kEulerGamma)) > 0.1);
    }
  }

  TEST_CASE("Dirichlet integrals") {
    CHECK(std::abs(dirichlet_I(2.0, 2.0, 2) - 1.0) < 1e-13);
    CHECK(std::abs(dirichlet_I(1.0, 1.0, 2) - 4.0) < 1e-13);
    CHECK(std::abs(dirichlet_I(2.0, 3.0, 3) - 0.25) < 1e-13);
    const cplx u(1.3, 0.7), v(2.1, -0.4);
    for (int m : {2, 3, 7}) CHECK(std::abs(dirichlet_I(u, v, m) - dirichlet_I(v, u, m)) < 1e-13);
    for (int m : {2, 3, 5}) {
      const double h = 1e-4;
      const cplx fd = (dirichlet_I(2.0, 2.0 + h, m) - dirichlet_I(2.0, 2.0 - h, m)) / (2 * h);
      CHECK(std::abs(dirichlet_dv(2.0, m) - fd) < 1e-6);
    }
  }

  TEST_CASE("Dirichlet integrals against quadrature") {
    for (int m : {2, 3})
      for (auto [u, v] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}) {
        CHECK(std::abs(dirichlet_I(u, v, m).real() - dirichlet_I_quadrature(u, v, m).value) < 1e-6);
        CHECK(std::abs(dirichlet_dv(u, m).real() - dirichlet_dv_quadrature(u, m).value) < 1e-6);
      }
    CHECK(std::fabs(dirichlet_dudv(2) - dirichlet_dudv_quadrature(2).value) < 1e-6);
    CHECK(std::fabs(dirichlet_dudv(3) - dirichlet_dudv_quadrature(3).value) < 1e-6);
  }

  TEST_CASE("uncorrected mixed-derivative form") {
    CHECK(dirichlet_dudv(2, true) == doctest::Approx(1.25 + 4 - 2.0 / 3 - kPi * kPi / 18).epsilon(1e-12));
    CHECK(dirichlet_dudv(2, true) == doctest::Approx(4.035022).epsilon(1e-6));
  }

  TEST_CASE("periodicity and realness") {
    const FamilyInstance m27{Family::mary, 27};
    const PeriodicFunction f1(PeriodicKind::F1, m27), f2(PeriodicKind::F2, m27), fr(PeriodicKind::Frho, m27);
    CHECK(f1.period() == doctest::Approx(kPi));
    CHECK(f2.period() == doctest::Approx(2 * kPi));
    for (int i = 0; i < 64; ++i) {
      const double z = 2 * kPi * i / 64;
      CHECK(f1(z + kPi) == doctest::Approx(f1(z)).epsilon(1e-10));
      CHECK(f2(z + 2 * kPi) == doctest::Approx(f2(z)).epsilon(1e-10));
      CHECK(std::isfinite(fr(z)));
    }
    double mean = 0;
    for (int i = 0; i < 1024; ++i) mean += f2(2 * kPi * i / 1024);
    CHECK(std::fabs(mean / 1024) < 1e-12 * std::abs(f2.coefficient()) + 1e-15);
    CHECK(f2.constant() == 0.0);

    const FamilyInstance t29{Family::fbbst, 29}, t60{Family::fbbst, 60};
    const PeriodicFunction g1(PeriodicKind::G1, t60), g2(PeriodicKind::G2, t29);
    CHECK(g1.period() == doctest::Approx(kPi));
    CHECK(g2.period() == doctest::Approx(2 * kPi));
    for (double z : {0.1, 1.7, 4.4}) {
      CHECK(g1(z + kPi) == doctest::Approx(g1(z)).epsilon(1e-10));
      CHECK(g2(z + 2 * kPi) == doctest::Approx(g2(z)).epsilon(1e-10));
    }
    PeriodicOptions opt;
    opt.c_plus = cplx(0.3, -1.2);
    const PeriodicFunction p1(PeriodicKind::P1, {Family::quadtree, 9}, opt);
    const PeriodicFunction p2(PeriodicKind::P2, {Family::quadtree, 6}, opt);
    CHECK(p1.period() == doctest::Approx(kPi));
    CHECK(p2.period() == doctest::Approx(2 * kPi));
    for (double z : {0.1, 1.7, 4.4}) {
      CHECK(p1(z + kPi) == doctest::Approx(p1(z)).epsilon(1e-10));
      CHECK(p2(z + 2 * kPi) == doctest::Approx(p2(z)).epsilon(1e-10));
    }
  }

  TEST_CASE("correlation factor stays in [-1, 1]") {
    for (int m : {27, 54, 270}) {
      CAPTURE(m);
      const PeriodicFunction fr(PeriodicKind::Frho, {Family::mary, m});
      double worst = 0;
      for (int i = 0; i < 1024; ++i) worst = std::max(worst, std::fabs(fr(2 * kPi * i / 1024)));
      CHECK(worst <= 1 + 1e-6);
    }
  }

  TEST_CASE("median-tree covariance factor against an independent derivation") {
    // θ·(2/h)·Cov(V^{ϱ−1}, V ln V + (1−V) ln(1−V)) / (1 − 2E[V^ϱ]), V ~ Beta(t+1, t+1),
    // evaluated in mpmath by direct integration
    struct Ref {
      int t;
      double re, im;
    };
    for (const Ref& r : {Ref{29, -0.0121384985419445, 0.0167280215625682},
                         Ref{60, -9.94268160822065e-05, 2.88442713801491e-04},
                         Ref{100, -2.38438500095573e-05, -1.22865491531451e-05}}) {
      CAPTURE(r.t);
      const cplx c = PeriodicFunction(PeriodicKind::G2, {Family::fbbst, r.t}).coefficient();
      CHECK(std::abs(c - cplx(r.re, r.im)) <= 1e-9 * std::abs(cplx(r.re, r.im)));
    }
  }

  TEST_CASE("regime preconditions") {
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::F1, {Family::mary, 26}), Error);
    CHECK_NOTHROW(PeriodicFunction(PeriodicKind::F2, {Family::mary, 14}));
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::F2, {Family::mary, 13}), Error);
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::G2, {Family::fbbst, 28}), Error);
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::G1, {Family::fbbst, 58}), Error);
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::P1, {Family::quadtree, 8}), Error);
    CHECK_THROWS_AS(PeriodicFunction(PeriodicKind::F1, {Family::fbbst, 60}), Error);
    try {
      PeriodicFunction(PeriodicKind::F1, {Family::mary, 20});
    } catch (const Error& e) {
      CHECK(e.status() == Status::regime);
    }
  }

  TEST_CASE("periodic csv") {
    const std::string s = periodic_csv(PeriodicFunction(PeriodicKind::F2, {Family::mary, 20}), 8);
    CHECK(s.rfind("z,value\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 9);
    CHECK(parse_periodic_kind("Frho") == PeriodicKind::Frho);
    CHECK_THROWS_AS(parse_periodic_kind("F3"), Error);
  }

  TEST_CASE("quadtree helpers") {
    // η(u,v) at d = 1 is ∫ (x^u (1−x)^v + x^{u+v}) dx
    CHECK(std::abs(quad_eta(1.0, 1.0, 1) - (1.0 / 6 + 1.0 / 3)) < 1e-14);
    CHECK(std::abs(quad_eta(1.0, 2.0, 2) - std::pow(1.0 / 12 + 1.0 / 4, 2)) < 1e-14);
    CHECK(std::abs(quad_eta(0.0, 1.0, 1) - 1.0) < 1e-14);
    CHECK(std::abs(quad_cL(1.0, 1.0, 1) - (1.0 - 1.0 - 1.0 + 2 * 0.5)) < 1e-14);
    // the derivative part against a central difference
    const cplx u(0.4, 1.1);
    const double h = 1e-5;
    const cplx fd = (quad_eta(u, 1.0 + h, 3) - quad_eta(u, 1.0 - h, 3)) / (2 * h);
    CHECK(std::abs(quad_cK(u, 3) - (quad_eta(0.0, u, 3) + 16.0 / 3 * fd)) < 1e-8);
  }
}
