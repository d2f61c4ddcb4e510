#include "special.hpp"

#include <array>
#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "error.hpp"

namespace mst {

namespace {

// Godfrey's coefficients, g = 607/128
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5};

const double kHalfLog2Pi = 0.5 * std::log(2.0 * kPi);

bool is_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && std::nearbyint(z.real()) == z.real();
}

cplx lgamma_right(cplx z) {
  z -= 1.0;
  cplx x = kLanczos[0];
  for (std::size_t k = 1; k < kLanczos.size(); ++k) x += kLanczos[k] / (z + double(k));
  cplx t = z + kLanczosG + 0.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(x);
}

// log sin(πz), stable for large |Im z|
cplx log_sin_pi(cplx z) {
  if (std::abs(z.imag()) < 20.0) return std::log(std::sin(kPi * z));
  const cplx i(0.0, 1.0);
  if (z.imag() > 0) {
    // sin(πz) = e^{-iπz}(1 − e^{2iπz})/(2i)... with |e^{2iπz}| tiny
    return -i * kPi * z + std::log(1.0 - std::exp(2.0 * i * kPi * z)) - std::log(2.0 * i);
  }
  return i * kPi * z + std::log(std::exp(-2.0 * i * kPi * z) - 1.0) - std::log(2.0 * i);
}

}  // namespace

cplx lgamma_c(cplx z) {
  if (is_pole(z)) fail(Status::domain, "gamma pole at non-positive integer");
  if (z.real() < 0.5) return std::log(kPi) - log_sin_pi(z) - lgamma_right(1.0 - z);
  return lgamma_right(z);
}

cplx gamma_c(cplx z) {
  if (is_pole(z)) fail(Status::domain, "gamma pole at non-positive integer");
  if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * std::exp(lgamma_right(1.0 - z)));
  return std::exp(lgamma_right(z));
}

cplx rgamma_c(cplx z) {
  if (is_pole(z)) return 0.0;
  if (z.real() < 0.5) return std::sin(kPi * z) * std::exp(lgamma_right(1.0 - z)) / kPi;
  return std::exp(-lgamma_right(z));
}

cplx gamma_ratio(cplx a, cplx b) {
  if (is_pole(b)) return 0.0;
  return std::exp(lgamma_c(a) - lgamma_c(b));
}

cplx digamma_c(cplx z) {
  if (is_pole(z)) fail(Status::domain, "digamma pole at non-positive integer");
  if (z.real() < 0.5) {
    return digamma_c(1.0 - z) - kPi / std::tan(kPi * z);
  }
  cplx acc = 0.0;
  while (std::abs(z) < 12.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const cplx w = 1.0 / (z * z);
  // Bernoulli tail: B2k/(2k)
  const cplx tail =
      w * (1.0 / 12 - w * (1.0 / 120 - w * (1.0 / 252 - w * (1.0 / 240 - w * (1.0 / 132 - w * (691.0 / 32760 - w / 12.0))))));
  return acc + std::log(z) - 0.5 / z - tail;
}

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }

mpq_class harmonic(int n, int order) {
  mpq_class h = 0;
  for (int j = 1; j <= n; ++j) {
    mpz_class d = 1;
    for (int r = 0; r < order; ++r) d *= j;
    h += mpq_class(mpz_class(1), d);
  }
  h.canonicalize();
  return h;
}

double harmonic_d(int n, int order) {
  double h = 0.0;
  for (int j = n; j >= 1; --j) h += 1.0 / std::pow(double(j), order);
  return h;
}

}  // namespace mst
