#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "roots.hpp"

namespace mst {

inline constexpr long double kEulerGammaL = 0.577215664901532860606512090082402431L;
inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

struct FamilyConstants {
  FamilyInstance instance;
  mpq_class phi;            // φ (mary), φ_t (fbbst); 0 for quadtree
  mpq_class harmonic1;      // H_m or H_{2t+2} − H_{t+1}
  mpq_class harmonic2;      // H_m^{(2)} (mary)
  double c1 = 0.0;          // mary only
  double c1_printed = 0.0;  // −1/2 − 4φ + 2φ²(H2−1) + γ
  double c_prime = 0.0;     // c1 − 2φγ
  std::optional<mpq_class> c2_minus_phi_c1;  // exact, mary
  double c2_root_sum = 0.0;                  // the same from the spectrum
  std::optional<mpq_class> c2_printed;       // published list, m ≤ 30
  double cK = 0.0;                           // C_K, D_X or E_X
  cplx theta{0.0, 0.0};
  bool theta_defined = false;
};

FamilyConstants constants(const FamilyInstance& inst, double c_plus_re = 1.0, double c_plus_im = 0.0);

// Quadratic variance constants, valid on the relaxed ranges m ≥ 2, t ≥ 0, d ≥ 1.
double c_K_mary(int m);
double D_X(int t);
double E_X(int d);
mpq_class phi_mary(int m);
mpq_class phi_fbbst(int t);

// (h² − h + h₂)/(4h³) with h = H_m − 1, h₂ = H_m^{(2)} − 1
mpq_class c2_minus_phi_c1_exact(int m);
double c2_minus_phi_c1_roots(const Spectrum& s);
// the published values for m = 3..30
std::optional<mpq_class> c2_printed(int m);

cplx dirichlet_I(cplx u, cplx v, int m);
cplx dirichlet_dv(cplx u, int m);
double dirichlet_dudv(int m, bool printed = false);

struct QuadratureResult {
  double value;
  double error;
};
// Adaptive simplex quadrature of the defining integrals (m ∈ {2,3}).
QuadratureResult dirichlet_I_quadrature(double u, double v, int m);
QuadratureResult dirichlet_dv_quadrature(double u, int m);
QuadratureResult dirichlet_dudv_quadrature(int m);

enum class PeriodicKind { F1, F2, Frho, G1, G2, P1, P2 };
PeriodicKind parse_periodic_kind(const std::string& s);
const char* periodic_kind_name(PeriodicKind k);

struct PeriodicOptions {
  bool printed = false;  // use the uncorrected formula
  cplx c_plus{1.0, 0.0};
};

class PeriodicFunction {
 public:
  PeriodicFunction(PeriodicKind kind, const FamilyInstance& inst, const PeriodicOptions& opt = {});
  double operator()(double z) const;
  double period() const;
  PeriodicKind kind() const { return kind_; }
  const FamilyInstance& instance() const { return inst_; }
  // value = constant + Re(coef·e^{i·harmonic·z})
  double constant() const { return constant_; }
  cplx coefficient() const { return coef_; }

 private:
  PeriodicKind kind_;
  FamilyInstance inst_;
  double constant_ = 0.0;
  cplx coef_{0.0, 0.0};
  int harmonic_ = 1;
  // Frho: F2 / sqrt(C_K F1)
  double ck_ = 0.0;
  double f1_const_ = 0.0;
  cplx f1_coef_{0.0, 0.0};
};

std::string periodic_csv(const PeriodicFunction& f, int points);

// quadtree helpers
cplx quad_eta(cplx u, cplx v, int d);
cplx quad_cL(cplx u, cplx v, int d);
cplx quad_cK(cplx u, int d);

}  // namespace mst
