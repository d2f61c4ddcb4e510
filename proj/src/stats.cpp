#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace mst {

namespace {

int binom(int n, int k) {
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

mpq_class to_q(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
  mpz_class hi(std::uint64_t(u >> 64) >> 32), r;
  r = hi;
  r <<= 32;
  r += (unsigned long)(std::uint64_t(u >> 64) & 0xffffffffULL);
  r <<= 32;
  r += (unsigned long)(std::uint64_t(u) >> 32);
  r <<= 32;
  r += (unsigned long)(std::uint64_t(u) & 0xffffffffULL);
  return neg ? mpq_class(-r) : mpq_class(r);
}

double sqrt_pos(double v) { return v > 0 ? std::sqrt(v) : 0.0; }

}  // namespace

SimStats::SimStats(std::vector<std::string> names) : names_(std::move(names)) {
  require(!names_.empty() && int(names_.size()) <= kMaxDim, "SimStats tracks one to three measures");
}

int SimStats::slot(int a, int b, int c) {
  // enumerate (a,b,c) with a+b+c ≤ 4 in lexicographic order
  int s = 0;
  for (int x = 0; x <= 4; ++x)
    for (int y = 0; x + y <= 4; ++y)
      for (int z = 0; x + y + z <= 4; ++z) {
        if (x == a && y == b && z == c) return s;
        ++s;
      }
  fail(Status::internal, "bad monomial");
}

void SimStats::add(const std::array<std::int64_t, kMaxDim>& x) {
  const int d = dim();
  std::array<__int128, 3> v{x[0], d > 1 ? x[1] : 0, d > 2 ? x[2] : 0};
  int s = 0;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      for (int c = 0; a + b + c <= 4; ++c) {
        __int128 p = 1;
        bool ovf = false;
        for (int i = 0; i < a; ++i) ovf |= __builtin_mul_overflow(p, v[0], &p);
        for (int i = 0; i < b; ++i) ovf |= __builtin_mul_overflow(p, v[1], &p);
        for (int i = 0; i < c; ++i) ovf |= __builtin_mul_overflow(p, v[2], &p);
        ovf |= __builtin_add_overflow(sums_[s], p, &sums_[s]);
        if (ovf) fail(Status::budget, "exact statistics overflow 128-bit sums; reduce n or reps");
        ++s;
      }
  ++count_;
}

void SimStats::merge(const SimStats& o) {
  require(o.names_ == names_, "cannot merge statistics over different measures");
  for (int s = 0; s < 35; ++s)
    if (__builtin_add_overflow(sums_[s], o.sums_[s], &sums_[s]))
      fail(Status::budget, "exact statistics overflow 128-bit sums");
  count_ += o.count_;
}

mpq_class SimStats::raw(int a, int b, int c) const {
  mpq_class r = to_q(sums_[slot(a, b, c)]) / count_;
  r.canonicalize();
  return r;
}

mpq_class SimStats::central(std::array<int, 3> e) const {
  std::array<mpq_class, 3> mu;
  for (int i = 0; i < 3; ++i) mu[i] = i < dim() ? raw(i == 0, i == 1, i == 2) : mpq_class(0);
  mpq_class acc = 0;
  for (int a = 0; a <= e[0]; ++a)
    for (int b = 0; b <= e[1]; ++b)
      for (int c = 0; c <= e[2]; ++c) {
        mpq_class term = raw(a, b, c) * binom(e[0], a) * binom(e[1], b) * binom(e[2], c);
        for (int i = a; i < e[0]; ++i) term *= -mu[0];
        for (int i = b; i < e[1]; ++i) term *= -mu[1];
        for (int i = c; i < e[2]; ++i) term *= -mu[2];
        acc += term;
      }
  return acc;
}

mpq_class SimStats::mean_exact(int i) const {
  require(count_ > 0, "no samples");
  require(i >= 0 && i < dim(), "measure index out of range");
  return raw(i == 0, i == 1, i == 2);
}

mpq_class SimStats::cov_exact(int i, int j) const {
  require(count_ > 1, "need at least two samples for a variance");
  require(i >= 0 && i < dim() && j >= 0 && j < dim(), "measure index out of range");
  std::array<int, 3> e{0, 0, 0};
  ++e[i];
  ++e[j];
  mpq_class r = central(e) * count_ / (count_ - 1);
  r.canonicalize();
  return r;
}

double SimStats::mean(int i) const { return mean_exact(i).get_d(); }
double SimStats::cov(int i, int j) const { return cov_exact(i, j).get_d(); }

double SimStats::corr(int i, int j) const {
  const double vi = var(i), vj = var(j);
  if (vi <= 0 || vj <= 0) return 0.0;
  return std::clamp(cov(i, j) / std::sqrt(vi * vj), -1.0, 1.0);
}

double SimStats::se_mean(int i) const { return std::sqrt(std::max(0.0, var(i)) / count_); }

double SimStats::se_cov(int i, int j) const {
  require(count_ > 1, "need at least two samples");
  std::array<int, 3> e{0, 0, 0}, e2{0, 0, 0};
  ++e[i], ++e[j];
  e2[i] += 2, e2[j] += 2;
  const mpq_class c = central(e);
  return sqrt_pos(mpq_class(central(e2) - c * c).get_d() / count_);
}

double SimStats::se_corr(int i, int j) const {
  if (count_ <= 3) return 0.0;
  const double r = corr(i, j);
  return (1 - r * r) / std::sqrt(double(count_ - 3));
}

void RunningStats::add(double x) {
  ++n;
  const double d = x - mean;
  mean += d / double(n);
  m2 += d * (x - mean);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double tot = double(n + o.n), d = o.mean - mean;
  mean += d * double(o.n) / tot;
  m2 += o.m2 + d * d * double(n) * double(o.n) / tot;
  n += o.n;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

KSResult ks_normal(std::vector<double> x) {
  require(x.size() >= 20, "KS test needs at least 20 samples");
  std::sort(x.begin(), x.end());
  const double n = double(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  // asymptotic Kolmogorov tail with the Stephens small-sample correction
  const double sn = std::sqrt(n);
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0, sign = 1;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lam * lam);
    p += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return {d, std::clamp(2 * p, 0.0, 1.0)};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "pearson needs paired samples");
  RunningStats sx, sy;
  for (double v : x) sx.add(v);
  for (double v : y) sy.add(v);
  double c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - sx.mean) * (y[i] - sy.mean);
  const double den = std::sqrt(sx.m2 * sy.m2);
  return den > 0 ? c / den : 0.0;
}

double skewness(const std::vector<double>& x) {
  require(x.size() >= 3, "skewness needs three samples");
  RunningStats s;
  for (double v : x) s.add(v);
  double m3 = 0;
  for (double v : x) m3 += std::pow(v - s.mean, 3);
  m3 /= double(x.size());
  const double m2 = s.m2 / double(x.size());
  return m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

double distance_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 4, "distance correlation needs paired samples");
  const std::size_t n = x.size();
  auto centred = [n](const std::vector<double>& v) {
    std::vector<double> a(n * n), row(n, 0.0);
    double tot = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        a[i * n + j] = std::abs(v[i] - v[j]);
        row[i] += a[i * n + j];
      }
    for (double r : row) tot += r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a[i * n + j] += -row[i] / n - row[j] / n + tot / double(n * n);
    return a;
  };
  const auto a = centred(x), b = centred(y);
  double xy = 0, xx = 0, yy = 0;
  for (std::size_t k = 0; k < n * n; ++k) xy += a[k] * b[k], xx += a[k] * a[k], yy += b[k] * b[k];
  if (xx <= 0 || yy <= 0) return 0.0;
  return std::sqrt(std::max(0.0, xy) / std::sqrt(xx * yy));
}

}  // namespace mst
