#pragma once

#include <complex>

#include <gmpxx.h>

namespace mst {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Complex gamma family. Poles throw Status::domain.
cplx lgamma_c(cplx z);
cplx gamma_c(cplx z);
// 1/Γ(z); zero at the poles instead of throwing.
cplx rgamma_c(cplx z);
cplx digamma_c(cplx z);

// exp(lnΓ(a) − lnΓ(b)) without intermediate overflow.
cplx gamma_ratio(cplx a, cplx b);

double digamma(double x);
double trigamma(double x);

// H_n^{(r)} as an exact rational
mpq_class harmonic(int n, int order = 1);
double harmonic_d(int n, int order = 1);

}  // namespace mst
