#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "moments.hpp"
#include "rng.hpp"
#include "roots.hpp"
#include "stats.hpp"

namespace mst {

using Measures = std::array<std::int64_t, 3>;

// mary: S, K, N; fbbst: S, X; quadtree: L, Xi
std::vector<std::string> measure_names(Family f);

// Split sizes of a node holding n keys (mary: m sizes, fbbst: 2, quadtree: 2^d).
std::vector<std::int64_t> sample_split(const FamilyInstance& inst, std::int64_t n, Philox& rng);
std::int64_t split_threshold(const FamilyInstance& inst);

Measures simulate_recursion(const FamilyInstance& inst, std::int64_t n, Philox& rng);
// Builds an m-ary tree from a uniformly random permutation.
TreeMeasures simulate_mary_tree(int m, int n, Philox& rng);

enum class SimMethod { recursion, tree };

struct SimConfig {
  FamilyInstance instance;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  SimMethod method = SimMethod::recursion;
};

// Replicate r uses the stream Philox(seed, r); results are independent of threads.
std::vector<Measures> simulate_replicates(const SimConfig& cfg);
SimStats monte_carlo(const SimConfig& cfg);

// Rows: n,stat,empirical,stderr,predicted,regime.
std::string corr_profile(const FamilyInstance& inst, const std::vector<std::int64_t>& grid, std::int64_t reps,
                         std::uint64_t seed, int threads, double c_plus_re = 1.0, double c_plus_im = 0.0);

}  // namespace mst
