#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "roots.hpp"

namespace mst {

enum class Mode { exact_rational, float64 };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

inline constexpr int kExactCap = 300;
inline constexpr int kFloatCap = 20000;
inline constexpr int kQuadPairCap = 64;

struct SplitWeights {
  int n = 0, m = 0;
  std::vector<mpq_class> pi;  // j = 0..n−m+1
  // pi2 depends on j+k only; pair_by_sum[s] = C(n−2−s, m−3)/C(n, m−1)
  std::vector<mpq_class> pair_by_sum;
  mpq_class pi2(int j, int k) const;
};

SplitWeights split_weights(int n, int m);

template <class T>
struct MomentRows {
  std::vector<T> mu, kappa, nu, VS, VSK, VK, VSN, VN, VKN;
  void resize(std::size_t n);
};

struct MomentTable {
  FamilyInstance instance;
  int n_max = 0;
  Mode mode = Mode::float64;
  MomentRows<double> f;
  MomentRows<mpq_class> q;
  // worst estimated relative rounding amplification in float mode
  double cancellation = 0.0;
  bool precision_warning = false;

  double value(const std::string& row, int n) const;
  std::string cell(const std::string& row, int n) const;
  std::string to_csv() const;
};

struct TableOptions {
  int pair_cap = kQuadPairCap;
  bool allow_large = false;  // lifts the exact/float caps
};

MomentTable mean_tables(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt = {});
// Mean rows plus all six second-order rows.
MomentTable moment_table(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt = {});

const std::vector<std::string>& moment_row_names();

// Toll specifications for the m-ary recurrence a_n = mΣπ_{n,j}a_j + b_n.
struct TollSpec {
  enum class Kind { constant_plus_decay, linear_plus_tn, custom_sequence } kind = Kind::custom_sequence;
  // constant_plus_decay: b_n = c + amp·n^{−eps}
  // linear_plus_tn: b_n = n + t_n with t_n = amp·n^{power} (or `sequence` when non-empty)
  double c = 1.0, amp = 0.0, eps = 1.0, power = 0.0;
  std::vector<double> sequence;
  std::vector<double> initial;  // a_0..a_{m−2}; zeros when empty
};

struct TransferCheck {
  bool applicable = false;
  double max_tn_over_n_tail = 0.0;  // over the top half of the horizon
  double partial_sum = 0.0;         // Σ |t_n| n^{-2}
  double tail_bound = 0.0;          // last-octave contribution
  bool plausible = false;
};

struct RecurrenceResult {
  std::vector<double> a;
  TransferCheck transfer;
};

RecurrenceResult generic_recurrence(const TollSpec& toll, int m, int n_max);

struct OracleMoments {
  int n = 0, m = 0;
  // E S, E K, E N, Var S, Cov SK, Var K, Cov SN, Var N, Cov KN
  std::vector<mpq_class> values;
};

struct TreeMeasures {
  std::int64_t S = 0, K = 0, N = 0;
};

TreeMeasures build_mary_tree(const std::vector<int>& perm, int m);
OracleMoments permutation_oracle(int n, int m, int threads = 1);

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the fit in log space (plain) or relative (envelope)
  bool envelope = false;
  double amplitude = 0.0;  // |a + ib| in the envelope model
};

// Least squares of log|row| on log n; rejects non-positive rows.
GrowthFit growth_exponent(const std::vector<double>& values, const std::vector<int>& grid);
// Envelope fit row_n ≈ n^s (a cos(β ln n) + b sin(β ln n)) for sign-changing periodic rows.
GrowthFit growth_exponent_periodic(const std::vector<double>& values, const std::vector<int>& grid, double beta);

std::vector<int> geometric_grid(int lo, int hi, int per_octave);

// The uncorrected FBBST law, kept for comparison: C(j−1,t)C(n−j,t)/C(n,2t+1).
mpq_class fbbst_printed_law_total(int n, int t);
mpq_class fbbst_split_prob(int n, int t, int j);
// Marginal and Hamming-type pair laws for quadtree subtree sizes at n points.
std::vector<mpq_class> quadtree_marginal(int n, int d);
std::vector<std::vector<mpq_class>> quadtree_pair_law(int n, int d, int h);

}  // namespace mst
