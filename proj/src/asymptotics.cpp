#include "asymptotics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"

namespace mst {

namespace {

const char* const kC2Printed[] = {
"12/125",
"222/2197",
"44670/456533",
"710/7569",
"8990170/99806103",
"86959460/1001561769",
"8225243460/97908438529",
"9368632980/114862129381",
"13941168359580/175531341607271",
"15364018080180/198165483844901",
"36778736979244260/484907780151231137",
"39706104830251860/534148059351752117",
"42542306175669300/583013664848115773",
"362341148683714200/5051607560589134719",
"60809828396490973800/861420713064800471777",
"220781849887636437400/3174476111482140491583",
"1589879045909940738152200/23180880112213178399314917",
"66535629228892650939112/982905224931956375768865",
"69399644946307963559272/1037954891250806970920625",
"72191400913204902200872/1092384284013327674677545",
"911488027263952226045421464/13945777153309079949132939375",
"943834826916499599456679304/14593082411910111966602252205",
"3048229719576792424490262245800/47603282606571951420821994029889",
"3144754504512378111611222765800/49580602253255626178697360169689",
"787117453959995151898324789769400/12523181563980976087610969389067627",
"809570585901011449194661971389400/12992983079952314295925927936613927",
"20280854972612671613961769087339836600/328217277361176269245342166728792498003",
"20806237502125190663861808383733444600/339424705221771320114642916145949390923",
};

const cplx I1(0.0, 1.0);

double lfact(int n) { return std::lgamma(double(n) + 1.0); }

}  // namespace

mpq_class phi_mary(int m) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  mpq_class r = 1 / (2 * (harmonic(m) - 1));
  r.canonicalize();
  return r;
}

mpq_class phi_fbbst(int t) {
  if (t < 0) fail(Status::invalid_argument, "t must be >= 0");
  mpq_class r = 1 / (2 * (t + 1) * (harmonic(2 * t + 2) - harmonic(t + 1)));
  r.canonicalize();
  return r;
}

double c_K_mary(int m) {
  const double phi = phi_mary(m).get_d();
  const double h2 = harmonic(m, 2).get_d();
  return 4 * phi * phi * (((m + 1) * h2 - 2) / (m - 1) - kPi * kPi / 6);
}

double D_X(int t) {
  if (t < 0) fail(Status::invalid_argument, "t must be >= 0");
  const double h = mpq_class(harmonic(2 * t + 2) - harmonic(t + 1)).get_d();
  const double a = double(2 * t + 3) / (t + 1) * harmonic(2 * t + 2, 2).get_d();
  const double b = double(t + 2) / (t + 1) * harmonic(t + 1, 2).get_d();
  return (a - b - kPi * kPi / 6) / (h * h);
}

double E_X(int d) {
  if (d < 1) fail(Status::invalid_argument, "d must be >= 1");
  const double p3 = std::pow(3.0, d), p2 = std::pow(2.0, d);
  return p3 / (p3 - p2) * (21 - 2 * kPi * kPi) / (9.0 * d);
}

mpq_class c2_minus_phi_c1_exact(int m) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  const mpq_class h = harmonic(m) - 1;
  const mpq_class h2 = harmonic(m, 2) - 1;
  mpq_class r = (h * h - h + h2) / (4 * h * h * h);
  r.canonicalize();
  return r;
}

double c2_minus_phi_c1_roots(const Spectrum& s) {
  if (s.instance.family != Family::mary) fail(Status::invalid_argument, "c2 is defined for m-ary trees");
  const int m = s.instance.param;
  const double phi = phi_mary(m).get_d();
  cplx sum = 0;
  for (std::size_t l = 1; l < s.roots.size(); ++l) sum += amplitude(s, l) / (2.0 - s.roots[l]);
  return 2 * phi * (phi - 1.0 / (m - 1) + sum.real());
}

std::optional<mpq_class> c2_printed(int m) {
  if (m < 3 || m > 30) return std::nullopt;
  mpq_class q(kC2Printed[m - 3]);
  q.canonicalize();
  return q;
}

FamilyConstants constants(const FamilyInstance& inst, double c_plus_re, double c_plus_im) {
  validate(inst);
  FamilyConstants c;
  c.instance = inst;
  const int p = inst.param;
  switch (inst.family) {
    case Family::mary: {
      c.phi = phi_mary(p);
      c.harmonic1 = harmonic(p);
      c.harmonic2 = harmonic(p, 2);
      const double phi = c.phi.get_d(), h2 = c.harmonic2.get_d();
      c.c_prime = -0.5 - 4 * phi + 2 * phi * phi * (h2 - 1);
      c.c1 = c.c_prime + 2 * phi * double(kEulerGammaL);
      c.c1_printed = c.c_prime + double(kEulerGammaL);
      c.c2_minus_phi_c1 = c2_minus_phi_c1_exact(p);
      c.c2_printed = c2_printed(p);
      const Spectrum s = solve_spectrum(inst);
      c.c2_root_sum = c2_minus_phi_c1_roots(s);
      c.cK = c_K_mary(p);
      c.theta = theta(s);
      c.theta_defined = true;
      break;
    }
    case Family::fbbst: {
      c.phi = phi_fbbst(p);
      c.harmonic1 = harmonic(2 * p + 2) - harmonic(p + 1);
      c.harmonic2 = harmonic(2 * p + 2, 2);
      c.cK = D_X(p);
      c.theta = theta(solve_spectrum(inst));
      c.theta_defined = true;
      break;
    }
    case Family::quadtree: {
      c.phi = 0;
      c.cK = E_X(p);
      c.theta = 2.0 * cplx(c_plus_re, c_plus_im);
      c.theta_defined = false;  // depends on the caller's c₊
      break;
    }
  }
  return c;
}

cplx dirichlet_I(cplx u, cplx v, int m) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  if (!(u.real() > 0 && v.real() > 0)) fail(Status::domain, "dirichlet_I needs Re u, Re v > 0");
  const cplx den = lgamma_c(u + v + double(m - 2));
  return double(m) * std::exp(lgamma_c(u + v - 1.0) - den) +
         double(m) * (m - 1) * std::exp(lgamma_c(u) + lgamma_c(v) - den);
}

cplx dirichlet_dv(cplx u, int m) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  if (!(u.real() > 0)) fail(Status::domain, "dirichlet_dv needs Re u > 0");
  const cplx pre = double(m) * std::exp(lgamma_c(u) - lgamma_c(u + double(m)));
  return pre * (u * digamma_c(u + 1.0) + double(m - 1) * (1.0 - kEulerGamma) -
                (double(m) + u - 1.0) * digamma_c(u + double(m)));
}

double dirichlet_dudv(int m, bool printed) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  const double phi = phi_mary(m).get_d();
  const double h2 = harmonic(m, 2).get_d();
  const double tail = -2.0 / (m + 1) - (m - 1) * kPi * kPi / (6.0 * (m + 1));
  if (printed) return h2 + 4 / (phi * phi) + tail;
  return (h2 + 1 / (4 * phi * phi) + tail) / std::exp(lfact(m - 1));
}

namespace {

template <class G>
QuadratureResult simplex(int m, G g) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double tol = 1e-12;
  if (m == 2) {
    double err = 0;
    const double v = ts.integrate([&](double x) { return g(x, 1 - x, 0.0); }, 0.0, 1.0, tol, &err);
    return {v, err};
  }
  if (m == 3) {
    double err_out = 0, err_in_max = 0;
    const double v = ts.integrate(
        [&](double x1) {
          const double w = 1 - x1;
          if (w <= 0) return 0.0;
          double e = 0;
          boost::math::quadrature::tanh_sinh<double> inner;
          const double r = inner.integrate([&](double x2) { return g(x1, x2, std::max(0.0, w - x2)); }, 0.0, w, tol, &e);
          err_in_max = std::max(err_in_max, e);
          return r;
        },
        0.0, 1.0, tol, &err_out);
    return {v, err_out + err_in_max};
  }
  fail(Status::invalid_argument, "simplex quadrature is implemented for m in {2,3}");
}

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }
double powm1(double x, double u) { return u == 1.0 ? 1.0 : (x > 0 ? std::pow(x, u - 1) : 0.0); }

}  // namespace

QuadratureResult dirichlet_I_quadrature(double u, double v, int m) {
  return simplex(m, [&](double a, double b, double c) {
    double su = powm1(a, u) + powm1(b, u), sv = powm1(a, v) + powm1(b, v);
    if (m == 3) su += powm1(c, u), sv += powm1(c, v);
    return su * sv;
  });
}

QuadratureResult dirichlet_dv_quadrature(double u, int m) {
  return simplex(m, [&](double a, double b, double c) {
    double su = powm1(a, u) + powm1(b, u), sl = xlogx(a) + xlogx(b);
    if (m == 3) su += powm1(c, u), sl += xlogx(c);
    return su * sl;
  });
}

QuadratureResult dirichlet_dudv_quadrature(int m) {
  return simplex(m, [&](double a, double b, double c) {
    double sl = xlogx(a) + xlogx(b);
    if (m == 3) sl += xlogx(c);
    return sl * sl;
  });
}

cplx quad_eta(cplx u, cplx v, int d) {
  const cplx g = 1.0 / (u + v + 1.0) + std::exp(lgamma_c(u + 1.0) + lgamma_c(v + 1.0) - lgamma_c(u + v + 2.0));
  return std::pow(g, double(d));
}

cplx quad_cL(cplx u, cplx v, int d) {
  return 1.0 - quad_eta(0.0, u, d) - quad_eta(0.0, v, d) + std::pow(2.0, d) * quad_eta(u, v, d);
}

cplx quad_cK(cplx u, int d) {
  // η(0,u) + (2^{d+1}/d) ∂_v η(u,v) at v = 1
  const cplx v = 1.0;
  const cplx gr = std::exp(lgamma_c(u + 1.0) + lgamma_c(v + 1.0) - lgamma_c(u + v + 2.0));
  const cplx g = 1.0 / (u + v + 1.0) + gr;
  const cplx dg = -1.0 / ((u + v + 1.0) * (u + v + 1.0)) + gr * (digamma_c(v + 1.0) - digamma_c(u + v + 2.0));
  const cplx deta = double(d) * std::pow(g, double(d - 1)) * dg;
  return quad_eta(0.0, u, d) + std::pow(2.0, d + 1) / d * deta;
}

PeriodicKind parse_periodic_kind(const std::string& s) {
  static const char* names[] = {"F1", "F2", "Frho", "G1", "G2", "P1", "P2"};
  for (int i = 0; i < 7; ++i)
    if (s == names[i]) return PeriodicKind(i);
  fail(Status::invalid_argument, "unknown periodic kind '" + s + "'");
}

const char* periodic_kind_name(PeriodicKind k) {
  static const char* names[] = {"F1", "F2", "Frho", "G1", "G2", "P1", "P2"};
  return names[int(k)];
}

namespace {

struct Second {
  cplx lam, amp;
};

Second second_root(const Spectrum& s) {
  cplx lam = s.roots[1], a = amplitude(s, 1);
  if (lam.imag() < 0) lam = std::conj(lam), a = std::conj(a);
  return {lam, a};
}

void need(bool ok, const std::string& what) {
  if (!ok) fail(Status::regime, what);
}

}  // namespace

PeriodicFunction::PeriodicFunction(PeriodicKind kind, const FamilyInstance& inst, const PeriodicOptions& opt)
    : kind_(kind), inst_(inst) {
  validate(inst);
  const int p = inst.param;
  const double g = double(kEulerGammaL);
  switch (kind) {
    case PeriodicKind::F1:
    case PeriodicKind::F2:
    case PeriodicKind::Frho: {
      need(inst.family == Family::mary, std::string(periodic_kind_name(kind)) + " is defined for m-ary trees");
      const Spectrum s = solve_spectrum(inst);
      const Regime r = classify_regime(s);
      const auto [lam, A] = second_root(s);
      const int m = p;
      const double alpha = lam.real();
      const cplx rg = rgamma_c(lam);
      // m!(m−1)|Γ(λ)|² / (Γ(2α+m−2) − m!Γ(2α−1)), scaled by m!
      const double x0 = (m - 1) * std::exp(2 * lgamma_c(lam).real()) /
                        (std::exp(std::lgamma(2 * alpha + m - 2) - lfact(m)) - std::tgamma(2 * alpha - 1));
      const cplx x1 = double(m - 1) * std::exp(2.0 * lgamma_c(lam)) /
                      (std::exp(lgamma_c(2.0 * lam + double(m - 2)) - lfact(m)) - gamma_c(2.0 * lam - 1.0));
      const double f1c = 2 * std::norm(A) * std::norm(rg) * (-1 + x0);
      const cplx f1k = 2.0 * A * A * rg * rg * (-1.0 + x1);
      const double phi = phi_mary(m).get_d();
      const cplx lm = lam + double(m - 1);
      cplx bracket;
      if (opt.printed)
        bracket = lam / lm * (double(m) * digamma_c(lam + double(m)) - digamma_c(lam + 1.0) - (m - 1) * (1 - g));
      else
        bracket = (lm * digamma_c(lam + double(m)) - lam * digamma_c(lam + 1.0) - (m - 1) * (1 - g)) / lm;
      const cplx f2k = 2.0 * lm * A * rg / double(m - 1) * (1.0 - 2 * phi * bracket);
      if (kind == PeriodicKind::F1) {
        need(r.distribution == DistPhase::periodic, "F1 needs the periodic variance regime (m >= 27)");
        constant_ = f1c, coef_ = f1k, harmonic_ = 2;
      } else if (kind == PeriodicKind::F2) {
        need(r.covariance == Phase::periodic, "F2 needs the periodic covariance regime (m >= 14)");
        constant_ = 0, coef_ = f2k, harmonic_ = 1;
      } else {
        need(r.distribution == DistPhase::periodic, "Frho needs the periodic variance regime (m >= 27)");
        constant_ = 0, coef_ = f2k, harmonic_ = 1;
        ck_ = c_K_mary(m);
        f1_const_ = f1c, f1_coef_ = f1k;
      }
      break;
    }
    case PeriodicKind::G1:
    case PeriodicKind::G2: {
      need(inst.family == Family::fbbst, std::string(periodic_kind_name(kind)) + " is defined for fbbst");
      const Spectrum s = solve_spectrum(inst);
      const Regime r = classify_regime(s);
      const auto [rho, C] = second_root(s);
      const int t = p;
      const double alpha = rho.real();
      const cplx rg = rgamma_c(rho);
      if (kind == PeriodicKind::G1) {
        need(r.distribution == DistPhase::periodic, "G1 needs the periodic variance regime (t >= 59)");
        // 2(2t+1)!Γ(ϱ+t)Γ(ϱ'+t) / (t!²Γ(ϱ+ϱ'+2t) − 2t!(2t+1)!Γ(ϱ+ϱ'+t−1))
        const double lg2 = 2 * lgamma_c(rho + double(t)).real();
        const double x0 = 2.0 / (std::exp(2 * lfact(t) + std::lgamma(2 * alpha + 2 * t) - lfact(2 * t + 1) - lg2) -
                                 2 * std::exp(lfact(t) + std::lgamma(2 * alpha + t - 1) - lg2));
        const cplx lgc = 2.0 * lgamma_c(rho + double(t));
        cplx x1 = 2.0 / (std::exp(2 * lfact(t) + lgamma_c(2.0 * rho + double(2 * t)) - lfact(2 * t + 1) - lgc) -
                         2.0 * std::exp(lfact(t) + lgamma_c(2.0 * rho + double(t - 1)) - lgc));
        if (opt.printed) x1 *= 2.0;
        constant_ = 2 * std::norm(C) * std::norm(rg) * (-1 + x0);
        coef_ = 2.0 * C * C * rg * rg * (-1.0 + x1);
        harmonic_ = 2;
      } else {
        need(r.covariance == Phase::periodic, "G2 needs the periodic covariance regime (t >= 29)");
        const double ht = mpq_class(harmonic(2 * t + 2) - harmonic(t + 1)).get_d();
        const double hb = harmonic(t + 1).get_d();
        const cplx a = rho + double(2 * t + 1);
        const cplx inner = a / double(t + 1) - (a * digamma_c(rho + double(2 * t + 2)) -
                                                (rho + double(t)) * digamma_c(rho + double(t + 1)) - (t + 1) * (hb - g)) /
                                                   ((t + 1) * ht);
        coef_ = (opt.printed ? 1.0 : 2.0) * C * rg * inner;
        constant_ = 0;
        harmonic_ = 1;
      }
      break;
    }
    case PeriodicKind::P1:
    case PeriodicKind::P2: {
      need(inst.family == Family::quadtree, std::string(periodic_kind_name(kind)) + " is defined for quadtrees");
      const int d = p;
      const QuadExponents q = quadtree_exponents(d);
      const Regime r = classify_regime(q);
      const cplx delta(q.alpha_hat, q.beta_hat);
      const cplx cp = opt.c_plus;
      const double p2d = std::pow(2.0, d);
      if (kind == PeriodicKind::P1) {
        need(r.distribution == DistPhase::periodic, "P1 needs the periodic variance regime (d >= 9)");
        const double a = std::pow(2 * q.alpha_hat + 1, d);
        constant_ = (2 * a / (a - p2d) * std::norm(cp) * quad_cL(delta, std::conj(delta), d)).real();
        const cplx b = std::pow(2.0 * delta + 1.0, double(d));
        coef_ = 2.0 * b / (b - p2d) * cp * cp * quad_cL(delta, delta, d);
        harmonic_ = 2;
      } else {
        need(r.covariance == Phase::periodic, "P2 needs the periodic covariance regime (d >= 6)");
        const cplx b = std::pow(delta + 2.0, double(d));
        coef_ = 2.0 * b / (b - p2d) * cp * quad_cK(delta, d);
        constant_ = 0;
        harmonic_ = 1;
      }
      break;
    }
  }
}

double PeriodicFunction::operator()(double z) const {
  const double v = constant_ + (coef_ * std::exp(I1 * double(harmonic_) * z)).real();
  if (kind_ != PeriodicKind::Frho) return v;
  const double f1 = f1_const_ + (f1_coef_ * std::exp(2.0 * I1 * z)).real();
  if (!(f1 > 0)) fail(Status::domain, "F1(z) <= 0 encountered while evaluating Frho");
  return v / std::sqrt(ck_ * f1);
}

double PeriodicFunction::period() const { return harmonic_ == 2 && kind_ != PeriodicKind::Frho ? kPi : 2 * kPi; }

std::string periodic_csv(const PeriodicFunction& f, int points) {
  if (points < 1) fail(Status::invalid_argument, "points must be positive");
  std::ostringstream os;
  os << "z,value\n";
  char buf[80];
  for (int i = 0; i < points; ++i) {
    const double z = 2 * kPi * i / points;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z, f(z));
    os << buf;
  }
  return os.str();
}

}  // namespace mst
