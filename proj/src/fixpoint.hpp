#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"
#include "roots.hpp"
#include "special.hpp"

namespace mst {

enum class MapKind { uniK, TN_periodic, TNprime_normal, Tmed_periodic, Tmed_normal, Tquad_periodic, Tquad_normal };
MapKind parse_map_kind(const std::string& s);
const char* map_kind_name(MapKind k);

enum class TollKind { K, N };  // uniK only: b_K or b_N = φ·b_K

struct FixedPointSpec {
  FamilyInstance instance;
  MapKind kind = MapKind::uniK;
  TollKind toll = TollKind::K;
  bool iterate_normal = false;  // normal maps: iterate the second slot instead of injecting N(0,1)
  cplx c_plus{1.0, 0.0};        // quadtree mean constant
};

// Checks family and regime, fills nothing; throws on mismatch.
void check_spec(const FixedPointSpec& spec);
// (0, θ) for periodic maps, zero otherwise.
cplx mean_constraint(const FixedPointSpec& spec);

std::vector<double> sample_spacings(int m, Philox& rng);
double sample_median(int t, Philox& rng);
std::vector<double> sample_volumes(int d, Philox& rng);

// Split sample for the map's family (spacings, (V, 1−V), or volumes).
std::vector<double> sample_split_weights(const FixedPointSpec& spec, Philox& rng);
// b_K, or b_N = φ·b_K for the node-depth maps, b_M, b_Q
double toll(const FixedPointSpec& spec, const std::vector<double>& split);

struct ContractionCheck {
  std::string name;
  double value = 0.0;
  bool ok = false;
};
std::vector<ContractionCheck> contraction_checks(const FixedPointSpec& spec);

struct PoolSample {
  double x = 0.0;
  cplx w{0.0, 0.0};
};

struct TraceRow {
  int generation = 0;
  double mean_x = 0.0, var_x = 0.0;
  cplx mean_w{0.0, 0.0};
  double var_w = 0.0;  // E|w − Ew|²
  double cov = 0.0;    // Cov(x, Re w)
};

struct SamplePool {
  std::vector<PoolSample> samples;
  int generation = 0;
  std::vector<TraceRow> trace;
};

TraceRow pool_moments(const std::vector<PoolSample>& s, int generation);
SamplePool iterate(const FixedPointSpec& spec, std::int64_t pool_size, int generations, std::uint64_t seed,
                   int threads = 1);

struct Diagnostics {
  TraceRow moments;
  double skew_x = 0.0;
  bool normal_map = false;
  double ks_statistic = 0.0, ks_p = 0.0;  // second slot vs N(0,1), normal maps
  double pearson = 0.0;                   // corr(x, Re w)
  double dcor = 0.0;                      // distance correlation on a 2000-sample prefix
  double mean_w_deviation = 0.0;          // |mean w − θ| in units of its standard error
};
Diagnostics diagnose(const SamplePool& pool, const FixedPointSpec& spec);

std::string pool_csv(const SamplePool& pool);
std::string trace_csv(const SamplePool& pool);

}  // namespace mst
