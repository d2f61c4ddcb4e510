#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/cpp_complex.hpp>

#include "error.hpp"
#include "roots.hpp"

using namespace mst;

namespace {

using big = boost::multiprecision::cpp_complex<256, boost::multiprecision::digit_base_2>;
using bigr = big::value_type;

// Horner on the expanded integer coefficients, so the check is independent of
// the product form the solver iterates on.
double eval_abs(const std::vector<mpz_class>& c, cplx z) {
  const big x{bigr(z.real()), bigr(z.imag())};
  big acc = 0;
  for (const auto& a : c) acc = acc * x + big(bigr(a.get_str()));
  return double(abs(acc));
}

mpz_class eval_int(const std::vector<mpz_class>& c, long z) {
  mpz_class acc = 0;
  for (const auto& a : c) acc = acc * z + a;
  return acc;
}

double max_coef(const std::vector<mpz_class>& c) {
  double w = 0;
  for (const auto& a : c) w = std::max(w, std::fabs(a.get_d()));
  return w;
}

}  // namespace

TEST_SUITE("roots") {
  TEST_CASE("indicial polynomials") {
    const auto p = build_indicial({Family::mary, 3});
    REQUIRE(p.size() == 3);
    CHECK(p[0] == 1);
    CHECK(p[1] == 1);
    CHECK(p[2] == -6);
    const auto q = build_indicial({Family::fbbst, 1});
    REQUIRE(q.size() == 3);
    CHECK(q[1] == 3);
    CHECK(q[2] == -10);
    CHECK_THROWS_AS(build_indicial({Family::quadtree, 2}), Error);
  }

  TEST_CASE("two is always a root") {
    for (int m = 3; m <= 40; ++m) CHECK(eval_int(build_indicial({Family::mary, m}), 2) == 0);
    for (int t = 1; t <= 12; ++t) CHECK(eval_int(build_indicial({Family::fbbst, t}), 2) == 0);
  }

  TEST_CASE("table values") {
    // the published table truncates to three decimals
    auto trunc3 = [](int m) { return std::trunc(solve_spectrum({Family::mary, m}).alpha * 1000) / 1000; };
    CHECK(trunc3(10) == doctest::Approx(0.568).epsilon(1e-12));
    CHECK(trunc3(26) == doctest::Approx(1.499).epsilon(1e-12));
    const Spectrum s3 = solve_spectrum({Family::mary, 3});
    CHECK(s3.alpha == -3.0);
    CHECK(s3.beta == 0.0);
    CHECK(solve_spectrum({Family::mary, 27}).alpha > 1.5);
  }

  // α₁₀ = 0.568504, just outside a rounding band around the truncated 0.568.
  TEST_CASE("table values within half a unit of the last digit" * doctest::should_fail()) {
    CHECK(std::fabs(solve_spectrum({Family::mary, 10}).alpha - 0.568) <= 5e-4);
    CHECK(std::fabs(solve_spectrum({Family::mary, 26}).alpha - 1.499) <= 5e-4);
  }

  TEST_CASE("second root against mpmath") {
    const Spectrum s = solve_spectrum({Family::mary, 27});
    CHECK(s.alpha == doctest::Approx(1.51697012184848).epsilon(1e-12));
    CHECK(s.beta == doctest::Approx(2.17886535362483).epsilon(1e-12));
  }

  TEST_CASE("spectrum invariants") {
    std::vector<FamilyInstance> insts;
    for (int m = 3; m <= 60; ++m) insts.push_back({Family::mary, m});
    for (int t : {1, 2, 5, 28, 29, 58, 59}) insts.push_back({Family::fbbst, t});
    for (const auto& inst : insts) {
      CAPTURE(inst.param);
      const Spectrum s = solve_spectrum(inst);
      const auto p = build_indicial(inst);
      REQUIRE(s.roots.size() == p.size() - 1);
      CHECK(std::abs(s.principal_root - 2.0) <= 1e-10);
      CHECK(s.beta >= 0.0);
      const double scale = max_coef(p);
      cplx sum = 0;
      for (std::size_t i = 0; i < s.roots.size(); ++i) {
        const cplx r = s.roots[i];
        const double res = eval_abs(p, r);
        CHECK(res <= s.certified_error * scale * (1 + 1e-6));
        CHECK(res < 1e-10 * scale);
        sum += r;
        if (i > 0) {
          const cplx q = s.roots[i - 1];
          CHECK((q.real() > r.real() || (q.real() == r.real() && q.imag() >= r.imag())));
        }
        if (std::abs(r.imag()) > 1e-12) {
          bool paired = false;
          for (const auto& o : s.roots) paired |= std::abs(o - std::conj(r)) < 1e-8 * (1 + std::abs(r));
          CHECK(paired);
        }
      }
      // Vieta: the sum of roots is −p[1]
      CHECK(std::abs(sum + p[1].get_d()) <= 1e-8 * (1 + std::fabs(p[1].get_d())));
    }
  }

  TEST_CASE("fbbst second pair dominates") {
    const Spectrum s = solve_spectrum({Family::fbbst, 29});
    CHECK(s.roots[1].real() == doctest::Approx(s.roots[2].real()));
    CHECK(s.roots[2].real() > s.roots[3].real());
  }

  TEST_CASE("quadtree exponents") {
    auto q = quadtree_exponents(1);
    CHECK(q.alpha_hat == doctest::Approx(1.0));
    CHECK(q.beta_hat == 0.0);
    q = quadtree_exponents(4);
    CHECK(q.alpha_hat == doctest::Approx(-1.0));
    CHECK(q.beta_hat == doctest::Approx(2.0));
    CHECK(quadtree_exponents(9).alpha_hat == doctest::Approx(0.5321).epsilon(1e-4));
    CHECK(quadtree_exponents(9).alpha_hat > 0.5);
    CHECK(quadtree_exponents(8).alpha_hat < 0.5);
    CHECK_THROWS_AS(quadtree_exponents(0), Error);
  }

  TEST_CASE("regimes") {
    auto reg = [](Family f, int p) { return classify_regime(FamilyInstance{f, p}); };
    CHECK(reg(Family::mary, 13).covariance == Phase::linear);
    CHECK(reg(Family::mary, 13).distribution == DistPhase::gaussian);
    CHECK(reg(Family::mary, 14).covariance == Phase::periodic);
    CHECK(reg(Family::mary, 14).distribution == DistPhase::gaussian);
    CHECK(reg(Family::mary, 27).distribution == DistPhase::periodic);
    CHECK(reg(Family::fbbst, 28).covariance == Phase::linear);
    CHECK(reg(Family::fbbst, 29).covariance == Phase::periodic);
    CHECK(reg(Family::fbbst, 58).distribution == DistPhase::gaussian);
    CHECK(reg(Family::fbbst, 59).distribution == DistPhase::periodic);
    for (int m = 3; m <= 60; ++m) {
      CAPTURE(m);
      CHECK((reg(Family::mary, m).covariance == Phase::periodic) == (m >= 14));
      CHECK((reg(Family::mary, m).distribution == DistPhase::periodic) == (m >= 27));
    }
    for (int d = 1; d <= 12; ++d) {
      CAPTURE(d);
      CHECK((reg(Family::quadtree, d).covariance == Phase::periodic) == (d >= 6));
      CHECK((reg(Family::quadtree, d).distribution == DistPhase::periodic) == (d >= 9));
    }
  }

  TEST_CASE("amplitudes") {
    const Spectrum s3 = solve_spectrum({Family::mary, 3});
    const cplx a = amplitude(s3, 1);
    CHECK(a.real() == doctest::Approx(-0.1));
    CHECK(std::abs(a.imag()) < 1e-14);
    const Spectrum s = solve_spectrum({Family::mary, 27});
    CHECK(std::abs(amplitude(s, 1) - std::conj(amplitude(s, 2))) < 1e-12);
    // mpmath: roots by polyroots, Γ at 40 digits
    const cplx th = theta(s);
    CHECK(th.real() == doctest::Approx(-0.644922572267825).epsilon(1e-10));
    CHECK(th.imag() == doctest::Approx(-0.233139630022715).epsilon(1e-10));
    const cplx th54 = theta(solve_spectrum({Family::mary, 54}));
    CHECK(th54.real() == doctest::Approx(-0.294176039129465).epsilon(1e-10));
    CHECK(th54.imag() == doctest::Approx(-0.222431954449297).epsilon(1e-10));
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate({Family::mary, 2}), Error);
    CHECK_THROWS_AS(validate({Family::fbbst, 0}), Error);
    CHECK_NOTHROW(validate({Family::quadtree, 1}));
    CHECK(parse_family("fbbst") == Family::fbbst);
    CHECK_THROWS_AS(parse_family("avl"), Error);
  }
}
