#include "treesim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "asymptotics.hpp"
#include "error.hpp"

namespace mst {

std::vector<std::string> measure_names(Family f) {
  switch (f) {
    case Family::mary: return {"S", "K", "N"};
    case Family::fbbst: return {"S", "X"};
    case Family::quadtree: return {"L", "Xi"};
  }
  return {};
}

std::int64_t split_threshold(const FamilyInstance& inst) {
  switch (inst.family) {
    case Family::mary: return inst.param;
    case Family::fbbst: return 2 * std::int64_t(inst.param) + 1;
    case Family::quadtree: return 2;
  }
  return 0;
}

namespace {

// k distinct values from {0..n-1}, sorted (Floyd)
std::vector<std::int64_t> distinct_sorted(std::int64_t n, int k, Philox& rng) {
  std::vector<std::int64_t> s;
  s.reserve(k);
  for (std::int64_t j = n - k; j < n; ++j) {
    const std::int64_t t = std::int64_t(rng.below(std::uint64_t(j + 1)));
    if (std::find(s.begin(), s.end(), t) == s.end())
      s.push_back(t);
    else
      s.push_back(j);
  }
  std::sort(s.begin(), s.end());
  return s;
}

void split_quad(std::int64_t n, int d, const std::vector<double>& x, int level, std::size_t base,
                std::vector<std::int64_t>& out, Philox& rng) {
  if (level == d) {
    out[base] = n;
    return;
  }
  std::int64_t lo = 0;
  if (n > 0) lo = std::binomial_distribution<std::int64_t>(n, x[level])(rng);
  split_quad(lo, d, x, level + 1, base, out, rng);
  split_quad(n - lo, d, x, level + 1, base | (std::size_t(1) << level), out, rng);
}

}  // namespace

std::vector<std::int64_t> sample_split(const FamilyInstance& inst, std::int64_t n, Philox& rng) {
  validate(inst);
  if (n < split_threshold(inst)) fail(Status::invalid_argument, "n is below the splitting threshold");
  switch (inst.family) {
    case Family::mary: {
      const int m = inst.param;
      const auto r = distinct_sorted(n, m - 1, rng);
      std::vector<std::int64_t> sizes(m);
      std::int64_t prev = -1;
      for (int i = 0; i < m - 1; ++i) sizes[i] = r[i] - prev - 1, prev = r[i];
      sizes[m - 1] = n - 1 - prev;
      return sizes;
    }
    case Family::fbbst: {
      const int t = inst.param;
      const auto r = distinct_sorted(n, 2 * t + 1, rng);
      return {r[t], n - 1 - r[t]};
    }
    case Family::quadtree: {
      const int d = inst.param;
      std::vector<double> x(d);
      for (auto& v : x) v = rng.uniform();
      std::vector<std::int64_t> out(std::size_t(1) << d, 0);
      split_quad(n - 1, d, x, 0, 0, out, rng);
      return out;
    }
  }
  return {};
}

Measures simulate_recursion(const FamilyInstance& inst, std::int64_t n, Philox& rng) {
  validate(inst);
  require(n >= 0, "n must be non-negative");
  Measures acc{0, 0, 0};
  const std::int64_t thr = split_threshold(inst);
  const std::int64_t cap = 64 * std::int64_t(std::log2(double(std::max<std::int64_t>(n, 1)))) + 64;
  struct Item {
    std::int64_t n, depth;
  };
  std::vector<Item> stack{{n, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.depth > cap) fail(Status::budget, "recursion depth cap exceeded");
    switch (inst.family) {
      case Family::mary: {
        if (it.n == 0) break;
        acc[0] += 1;
        acc[1] += it.depth * std::min<std::int64_t>(it.n, inst.param - 1);
        acc[2] += it.depth;
        if (it.n < thr) break;
        for (auto s : sample_split(inst, it.n, rng))
          if (s > 0) stack.push_back({s, it.depth + 1});
        break;
      }
      case Family::fbbst: {
        if (it.n < thr) break;
        acc[0] += 1;
        acc[1] += it.n - 1;
        for (auto s : sample_split(inst, it.n, rng)) stack.push_back({s, it.depth + 1});
        break;
      }
      case Family::quadtree: {
        if (it.n == 0) break;
        if (it.n == 1) {
          acc[0] += 1;
          break;
        }
        acc[1] += it.n - 1;
        for (auto s : sample_split(inst, it.n, rng))
          if (s > 0) stack.push_back({s, it.depth + 1});
        break;
      }
    }
  }
  return acc;
}

TreeMeasures simulate_mary_tree(int m, int n, Philox& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i + 1;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(std::uint64_t(i + 1))]);
  return build_mary_tree(perm, m);
}

std::vector<Measures> simulate_replicates(const SimConfig& cfg) {
  validate(cfg.instance);
  require(cfg.n >= 0, "n must be non-negative");
  require(cfg.reps >= 1, "reps must be positive");
  require(cfg.threads >= 1, "threads must be positive");
  if (cfg.method == SimMethod::tree) {
    require(cfg.instance.family == Family::mary, "tree construction is implemented for m-ary trees");
    require(cfg.n <= 100000000, "n too large for explicit tree construction");
  }
  std::vector<Measures> out(cfg.reps);
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.threads);
  auto work = [&](int w) {
    try {
      for (std::int64_t r; (r = next.fetch_add(1)) < cfg.reps;) {
        Philox rng(cfg.seed, std::uint64_t(r));
        if (cfg.method == SimMethod::tree) {
          const auto t = simulate_mary_tree(cfg.instance.param, int(cfg.n), rng);
          out[r] = {t.S, t.K, t.N};
        } else {
          out[r] = simulate_recursion(cfg.instance, cfg.n, rng);
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = cfg.reps;
    }
  };
  if (cfg.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

SimStats monte_carlo(const SimConfig& cfg) {
  require(cfg.reps >= 2, "reps must be at least 2 for variance estimates");
  const auto reps = simulate_replicates(cfg);
  SimStats st(measure_names(cfg.instance.family));
  for (const auto& r : reps) st.add(r);
  return st;
}

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace

std::string corr_profile(const FamilyInstance& inst, const std::vector<std::int64_t>& grid, std::int64_t reps,
                         std::uint64_t seed, int threads, double c_plus_re, double c_plus_im) {
  validate(inst);
  require(!grid.empty(), "grid must not be empty");
  require(reps >= 2, "reps must be at least 2");
  const Regime reg = classify_regime(inst);
  const std::string regime = std::string(phase_name(reg.covariance)) + "/" + dist_phase_name(reg.distribution);
  const double nan = std::nan("");
  std::ostringstream os;
  os << "n,stat,empirical,stderr,predicted,regime\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const std::int64_t n = grid[gi];
    SimConfig cfg{inst, n, reps, seed, threads};
    const SimStats st = monte_carlo(cfg);
    const double ln = std::log(double(std::max<std::int64_t>(n, 2)));
    auto row = [&](const std::string& stat, double emp, double se, double pred) {
      os << n << ',' << stat << ',' << num(emp) << ',' << num(se) << ',' << num(pred) << ',' << regime << '\n';
    };
    const double n2 = double(n) * double(n);
    switch (inst.family) {
      case Family::mary: {
        const int m = inst.param;
        double rho_sk = 0.0;
        if (reg.distribution == DistPhase::periodic) {
          const Spectrum s = solve_spectrum(inst);
          rho_sk = PeriodicFunction(PeriodicKind::Frho, inst)(s.beta * ln);
        }
        row("rho_SK", st.corr(0, 1), st.se_corr(0, 1), rho_sk);
        row("rho_SN", st.corr(0, 2), st.se_corr(0, 2), rho_sk);
        row("rho_KN", st.corr(1, 2), st.se_corr(1, 2), 1.0);
        row("VK_over_n2", st.var(1) / n2, st.se_cov(1, 1) / n2, c_K_mary(m));
        break;
      }
      case Family::fbbst: {
        double rho = 0.0;
        if (reg.distribution == DistPhase::periodic) {
          const Spectrum s = solve_spectrum(inst);
          const double z = s.beta * ln;
          const double g1 = PeriodicFunction(PeriodicKind::G1, inst)(z);
          const double g2 = PeriodicFunction(PeriodicKind::G2, inst)(z);
          rho = g1 > 0 ? g2 / std::sqrt(D_X(inst.param) * g1) : nan;
        }
        row("rho_SX", st.corr(0, 1), st.se_corr(0, 1), rho);
        row("VX_over_n2", st.var(1) / n2, st.se_cov(1, 1) / n2, D_X(inst.param));
        break;
      }
      case Family::quadtree: {
        double rho = 0.0;
        if (reg.distribution == DistPhase::periodic) {
          PeriodicOptions o;
          o.c_plus = cplx(c_plus_re, c_plus_im);
          const QuadExponents q = quadtree_exponents(inst.param);
          const double z = q.beta_hat * ln;
          const double p1 = PeriodicFunction(PeriodicKind::P1, inst, o)(z);
          const double p2 = PeriodicFunction(PeriodicKind::P2, inst, o)(z);
          rho = p1 > 0 ? p2 / std::sqrt(E_X(inst.param) * p1) : nan;
        }
        row("rho_LXi", st.corr(0, 1), st.se_corr(0, 1), rho);
        row("VXi_over_n2", st.var(1) / n2, st.se_cov(1, 1) / n2, E_X(inst.param));
        row("EXi_over_nlogn", st.mean(1) / (double(n) * ln), st.se_mean(1) / (double(n) * ln), 2.0 / inst.param);
        break;
      }
    }
  }
  return os.str();
}

}  // namespace mst
