#include "roots.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_complex.hpp>

#include "error.hpp"

namespace mst {

namespace bmp = boost::multiprecision;

const char* family_name(Family f) {
  switch (f) {
    case Family::mary: return "mary";
    case Family::fbbst: return "fbbst";
    case Family::quadtree: return "quadtree";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "mary") return Family::mary;
  if (s == "fbbst") return Family::fbbst;
  if (s == "quadtree") return Family::quadtree;
  fail(Status::invalid_argument, "unknown family '" + s + "'");
}

void validate(const FamilyInstance& inst) {
  const int lo = inst.family == Family::mary ? 3 : 1;
  if (inst.param < lo) {
    fail(Status::invalid_argument, std::string(family_name(inst.family)) + " parameter must be >= " +
                                       std::to_string(lo));
  }
}

const char* phase_name(Phase p) { return p == Phase::linear ? "linear" : "periodic"; }
const char* dist_phase_name(DistPhase p) { return p == DistPhase::gaussian ? "gaussian" : "periodic"; }

namespace {

// Indicial equation as Π_{k=lo}^{hi} (z+k) = Π_{k=lo}^{hi} (k+2).
struct ProductForm {
  int lo, hi;
  int degree() const { return hi - lo + 1; }
};

ProductForm product_form(const FamilyInstance& inst) {
  validate(inst);
  switch (inst.family) {
    case Family::mary: return {0, inst.param - 2};
    case Family::fbbst: return {inst.param, 2 * inst.param};
    case Family::quadtree: break;
  }
  fail(Status::invalid_argument, "no polynomial for quadtree: exponents are closed-form");
}

// f = Π (z+k)/(k+2) − 1 and f/f'
template <class C>
void eval(const ProductForm& pf, const C& z, C& f, C& ratio) {
  C q(1);
  C s(0);
  for (int k = pf.lo; k <= pf.hi; ++k) {
    C zk = z + C(k);
    q *= zk / C(k + 2);
    s += C(1) / zk;
  }
  f = q - C(1);
  ratio = f / (q * s);
}

using lcplx = std::complex<long double>;

std::vector<lcplx> aberth(const ProductForm& pf) {
  const int n = pf.degree();
  long double logr = 0;
  for (int k = pf.lo; k <= pf.hi; ++k) logr += std::log((long double)(k + 2));
  const long double radius = std::exp(logr / n) + 1.0L;
  const long double centre = -0.5L * (pf.lo + pf.hi);
  std::vector<lcplx> z(n);
  for (int i = 0; i < n; ++i) {
    long double ang = 2.0L * kPi * i / n + 0.4L;
    z[i] = lcplx(centre + radius * std::cos(ang), radius * std::sin(ang));
  }
  for (int it = 0; it < 2000; ++it) {
    long double worst = 0;
    for (int i = 0; i < n; ++i) {
      lcplx f, r;
      eval(pf, z[i], f, r);
      lcplx rep = 0;
      for (int j = 0; j < n; ++j)
        if (j != i) rep += 1.0L / (z[i] - z[j]);
      lcplx w = r / (1.0L - r * rep);
      z[i] -= w;
      worst = std::max(worst, std::abs(w) / std::max(1.0L, std::abs(z[i])));
    }
    if (worst < 1e-18L) return z;
  }
  fail(Status::convergence, "simultaneous root iteration did not converge");
}

template <class C>
struct Polished {
  std::vector<cplx> roots;
  double residual;
  double radius;
};

template <class C>
Polished<C> polish(const ProductForm& pf, const std::vector<lcplx>& seeds, const std::vector<mpz_class>& coef) {
  using R = typename bmp::component_type<C>::type;
  const int n = pf.degree();
  Polished<C> out{{}, 0.0, 0.0};
  R scale = 0;
  for (const auto& c : coef) scale = std::max(scale, R(mpz_class(abs(c)).get_str()));
  R prodk = 1;
  for (int k = pf.lo; k <= pf.hi; ++k) prodk *= R(k + 2);
  for (const auto& s : seeds) {
    C z(R(double(s.real())), R(double(s.imag())));
    // carry the long double digits beyond a double
    z += C(R(double(s.real() - (long double)double(s.real()))), R(double(s.imag() - (long double)double(s.imag()))));
    C f, r;
    for (int it = 0; it < 60; ++it) {
      eval(pf, z, f, r);
      z -= r;
      if (abs(r) <= abs(z) * std::numeric_limits<R>::epsilon() * 4) break;
    }
    out.roots.emplace_back(double(z.real()), double(z.imag()));
  }
  // Conjugate symmetrisation.
  const double tiny = 1e-13;
  for (auto& r : out.roots)
    if (std::abs(r.imag()) <= tiny * std::max(1.0, std::abs(r))) r = cplx(r.real(), 0.0);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    if (used[i] || out.roots[i].imag() <= 0) continue;
    int best = -1;
    double bd = 1e300;
    for (int j = 0; j < n; ++j) {
      if (j == i || used[j] || out.roots[j].imag() >= 0) continue;
      double d = std::abs(out.roots[j] - std::conj(out.roots[i]));
      if (d < bd) bd = d, best = j;
    }
    if (best < 0) fail(Status::convergence, "root set is not closed under conjugation");
    cplx avg = 0.5 * (out.roots[i] + std::conj(out.roots[best]));
    out.roots[i] = avg;
    out.roots[best] = std::conj(avg);
    used[i] = used[best] = true;
  }
  for (const auto& r : out.roots) {
    C z{R(r.real()), R(r.imag())};
    C f, q;
    eval(pf, z, f, q);
    // P = prodk·f
    out.residual = std::max(out.residual, double(abs(f) * prodk / scale));
    out.radius = std::max(out.radius, double(abs(q)) * n);
  }
  return out;
}

}  // namespace

std::vector<mpz_class> build_indicial(const FamilyInstance& inst) {
  const ProductForm pf = product_form(inst);
  std::vector<mpz_class> c{1};  // descending
  mpz_class target = 1;
  for (int k = pf.lo; k <= pf.hi; ++k) {
    std::vector<mpz_class> next(c.size() + 1, 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] += c[i] * k;
    }
    c.swap(next);
    target *= k + 2;
  }
  c.back() -= target;
  return c;
}

Spectrum solve_spectrum(const FamilyInstance& inst, int precision_bits) {
  if (precision_bits < 64) fail(Status::invalid_argument, "precision must be at least 64 bits");
  const ProductForm pf = product_form(inst);
  if (pf.degree() < 2) fail(Status::invalid_argument, "indicial polynomial has degree < 2");
  const auto coef = build_indicial(inst);
  const auto seeds = aberth(pf);

  Spectrum sp;
  sp.instance = inst;
  const int polish_bits = std::min(2 * precision_bits, 512);
  if (polish_bits <= 128) {
    auto p = polish<bmp::cpp_complex<128, bmp::digit_base_2>>(pf, seeds, coef);
    sp.roots = p.roots, sp.certified_error = p.residual, sp.inclusion_radius = p.radius;
  } else if (polish_bits <= 256) {
    auto p = polish<bmp::cpp_complex<256, bmp::digit_base_2>>(pf, seeds, coef);
    sp.roots = p.roots, sp.certified_error = p.residual, sp.inclusion_radius = p.radius;
  } else {
    auto p = polish<bmp::cpp_complex<512, bmp::digit_base_2>>(pf, seeds, coef);
    sp.roots = p.roots, sp.certified_error = p.residual, sp.inclusion_radius = p.radius;
  }
  sp.precision_bits = precision_bits;
  std::sort(sp.roots.begin(), sp.roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  sp.principal_root = sp.roots[0];
  if (std::abs(sp.principal_root - 2.0) > 1e-10) fail(Status::convergence, "principal root is not 2");
  sp.alpha = sp.roots[1].real();
  sp.beta = std::abs(sp.roots[1].imag());
  return sp;
}

QuadExponents quadtree_exponents(int d) {
  if (d < 1) fail(Status::invalid_argument, "quadtree dimension must be >= 1");
  const double a = 2.0 * kPi / d;
  double ah = 2.0 * std::cos(a) - 1.0;
  double bh = 2.0 * std::sin(a);
  if (std::abs(ah) < 1e-15) ah = 0.0;
  if (std::abs(bh) < 1e-15) bh = 0.0;
  return {ah, bh};
}

namespace {

bool above(double alpha, double threshold, bool inclusive = false) {
  if (std::abs(alpha - threshold) <= kThresholdGuard) {
    if (inclusive) return true;
    fail(Status::regime, "alpha lies within the guard band of a phase threshold; regime indeterminate");
  }
  return alpha > threshold;
}

}  // namespace

Regime classify_regime(const Spectrum& s) {
  Regime r;
  r.covariance = above(s.alpha, 1.0) ? Phase::periodic : Phase::linear;
  r.distribution = above(s.alpha, 1.5) ? DistPhase::periodic : DistPhase::gaussian;
  return r;
}

Regime classify_regime(const QuadExponents& q) {
  Regime r;
  // d = 1 has no oscillating exponent: the second root coincides with the principal one.
  if (q.beta_hat == 0.0) return r;
  // α̂ = 0 exactly at d = 6, which the quadtree theorem places in the periodic range.
  r.covariance = above(q.alpha_hat, 0.0, true) ? Phase::periodic : Phase::linear;
  r.distribution = above(q.alpha_hat, 0.5) ? DistPhase::periodic : DistPhase::gaussian;
  return r;
}

Regime classify_regime(const FamilyInstance& inst) {
  if (inst.family == Family::quadtree) return classify_regime(quadtree_exponents(inst.param));
  return classify_regime(solve_spectrum(inst));
}

cplx amplitude(const Spectrum& s, std::size_t k) {
  if (k >= s.roots.size()) fail(Status::invalid_argument, "root index out of range");
  const cplx lam = s.roots[k];
  if (std::abs(lam) < 1e-12 || std::abs(lam - 1.0) < 1e-12)
    fail(Status::domain, "amplitude undefined at lambda in {0,1}");
  const int p = s.instance.param;
  if (s.instance.family == Family::mary) {
    cplx sum = 0;
    for (int j = 0; j <= p - 2; ++j) sum += 1.0 / (double(j) + lam);
    return 1.0 / (lam * (lam - 1.0) * sum);
  }
  if (s.instance.family == Family::fbbst) {
    // t!/((ϱ−1)ϱ⋯(ϱ+t−1)) = Π_{i=1}^{t} i/(ϱ+i−1) / (ϱ−1)
    cplx ratio = 1.0 / (lam - 1.0);
    for (int i = 1; i <= p; ++i) ratio *= double(i) / (lam + double(i - 1));
    cplx sum = 0;
    for (int j = p; j <= 2 * p; ++j) sum += 1.0 / (double(j) + lam);
    return ratio / (2.0 * sum);
  }
  fail(Status::invalid_argument, "amplitudes are not defined for quadtrees");
}

cplx theta(const Spectrum& s) {
  cplx lam = s.roots[1];
  if (lam.imag() < 0) lam = std::conj(lam);
  cplx a = amplitude(s, 1);
  if (s.roots[1].imag() < 0) a = std::conj(a);
  return 2.0 * a * rgamma_c(lam);
}

}  // namespace mst
