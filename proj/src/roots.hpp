#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

#include "special.hpp"

namespace mst {

enum class Family { mary, fbbst, quadtree };

struct FamilyInstance {
  Family family = Family::mary;
  int param = 3;
};

const char* family_name(Family f);
Family parse_family(const std::string& s);
// Throws unless the parameter respects the family's lower bound.
void validate(const FamilyInstance& inst);

enum class Phase { linear, periodic };
enum class DistPhase { gaussian, periodic };

struct Regime {
  Phase covariance = Phase::linear;
  DistPhase distribution = DistPhase::gaussian;
};

inline constexpr double kThresholdGuard = 1e-6;

struct Spectrum {
  FamilyInstance instance;
  std::vector<cplx> roots;  // Re descending, ties Im descending
  cplx principal_root;
  double alpha = 0.0;
  double beta = 0.0;
  double certified_error = 0.0;  // max |P(r)| / max|coef|
  double inclusion_radius = 0.0;  // max deg·|P/P'| at the returned roots
  int precision_bits = 0;
};

// Descending coefficients, leading 1.
std::vector<mpz_class> build_indicial(const FamilyInstance& inst);

Spectrum solve_spectrum(const FamilyInstance& inst, int precision_bits = 128);

struct QuadExponents {
  double alpha_hat;
  double beta_hat;
};
QuadExponents quadtree_exponents(int d);

Regime classify_regime(const Spectrum& s);
Regime classify_regime(const QuadExponents& q);
// Uses the closed form for quadtrees and the spectrum otherwise.
Regime classify_regime(const FamilyInstance& inst);

// A_k for mary, C_k for fbbst.
cplx amplitude(const Spectrum& s, std::size_t k);
// 2A₂/Γ(λ₂) (mary) or 2C₂/Γ(ϱ₂) (fbbst)
cplx theta(const Spectrum& s);

const char* phase_name(Phase p);
const char* dist_phase_name(DistPhase p);

}  // namespace mst
