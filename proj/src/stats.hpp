#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace mst {

// Joint statistics of up to three integer measures. All monomial power sums
// up to total degree 4 are kept exactly, so merging is exact and associative
// and central moments come out as exact rationals.
class SimStats {
 public:
  static constexpr int kMaxDim = 3;

  SimStats() = default;
  explicit SimStats(std::vector<std::string> names);

  void add(const std::array<std::int64_t, kMaxDim>& x);
  void merge(const SimStats& other);

  int dim() const { return int(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  std::int64_t count() const { return count_; }

  mpq_class mean_exact(int i) const;
  mpq_class cov_exact(int i, int j) const;  // unbiased, divides by count−1

  double mean(int i) const;
  double var(int i) const { return cov(i, i); }
  double cov(int i, int j) const;
  double corr(int i, int j) const;
  double se_mean(int i) const;
  double se_cov(int i, int j) const;  // √((μ₂₂ − c²)/count)
  double se_corr(int i, int j) const;

 private:
  static int slot(int a, int b, int c);
  mpq_class raw(int a, int b, int c) const;
  mpq_class central(std::array<int, 3> e) const;

  std::vector<std::string> names_;
  std::int64_t count_ = 0;
  std::array<__int128, 35> sums_{};
};

// Streaming mean/variance for real data (Chan merge).
struct RunningStats {
  std::int64_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x);
  void merge(const RunningStats& o);
  double var() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

struct KSResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

double normal_cdf(double x);
KSResult ks_normal(std::vector<double> x);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double skewness(const std::vector<double>& x);
// O(n²) sample distance correlation.
double distance_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mst
