#include "fixpoint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "asymptotics.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace mst {

namespace {

const char* const kMapNames[] = {"uniK",        "TN_periodic",    "TNprime_normal", "Tmed_periodic",
                                 "Tmed_normal", "Tquad_periodic", "Tquad_normal"};

bool is_normal(MapKind k) {
  return k == MapKind::TNprime_normal || k == MapKind::Tmed_normal || k == MapKind::Tquad_normal;
}
bool is_periodic(MapKind k) {
  return k == MapKind::TN_periodic || k == MapKind::Tmed_periodic || k == MapKind::Tquad_periodic;
}

Family family_of(MapKind k) {
  switch (k) {
    case MapKind::uniK:
    case MapKind::TN_periodic:
    case MapKind::TNprime_normal: return Family::mary;
    case MapKind::Tmed_periodic:
    case MapKind::Tmed_normal: return Family::fbbst;
    default: return Family::quadtree;
  }
}

double xlogx(double v) { return v > 0 ? v * std::log(v) : 0.0; }

// Exponent of the complex slot and the first-slot scale, per spec.
struct MapParams {
  cplx exponent{0.5, 0.0};
  double first_scale = 1.0;  // toll multiplier
  cplx theta{0.0, 0.0};
};

MapParams map_params(const FixedPointSpec& spec) {
  MapParams p;
  const int q = spec.instance.param;
  switch (spec.kind) {
    case MapKind::uniK: break;
    case MapKind::TN_periodic: {
      const Spectrum s = solve_spectrum(spec.instance);
      p.exponent = cplx(s.alpha, s.beta) - 1.0;
      p.theta = theta(s);
      break;
    }
    case MapKind::TNprime_normal: {
      const double phi = phi_mary(q).get_d();
      p.first_scale = 1.0 / std::sqrt(phi * phi * c_K_mary(q));
      break;
    }
    case MapKind::Tmed_periodic: {
      const Spectrum s = solve_spectrum(spec.instance);
      p.exponent = cplx(s.alpha, s.beta) - 1.0;
      p.theta = theta(s);
      break;
    }
    case MapKind::Tmed_normal: p.first_scale = 1.0 / std::sqrt(D_X(q)); break;
    case MapKind::Tquad_periodic: {
      const QuadExponents e = quadtree_exponents(q);
      p.exponent = cplx(e.alpha_hat, e.beta_hat);
      p.theta = 2.0 * spec.c_plus;
      break;
    }
    case MapKind::Tquad_normal: p.first_scale = 1.0 / std::sqrt(E_X(q)); break;
  }
  return p;
}

}  // namespace

MapKind parse_map_kind(const std::string& s) {
  for (int i = 0; i < 7; ++i)
    if (s == kMapNames[i]) return MapKind(i);
  fail(Status::invalid_argument, "unknown map kind '" + s + "'");
}

const char* map_kind_name(MapKind k) { return kMapNames[int(k)]; }

void check_spec(const FixedPointSpec& spec) {
  validate(spec.instance);
  if (spec.instance.family != family_of(spec.kind))
    fail(Status::invalid_argument, std::string(map_kind_name(spec.kind)) + " belongs to family " +
                                        family_name(family_of(spec.kind)));
  if (spec.kind == MapKind::uniK) return;
  const Regime r = classify_regime(spec.instance);
  const bool periodic = r.distribution == DistPhase::periodic;
  if (is_periodic(spec.kind) && !periodic)
    fail(Status::regime, std::string(map_kind_name(spec.kind)) + " needs the periodic distribution regime");
  if (is_normal(spec.kind) && periodic)
    fail(Status::regime, std::string(map_kind_name(spec.kind)) + " needs the normal distribution regime");
}

cplx mean_constraint(const FixedPointSpec& spec) {
  check_spec(spec);
  return map_params(spec).theta;
}

std::vector<double> sample_spacings(int m, Philox& rng) {
  require(m >= 2, "m must be >= 2");
  std::vector<double> u(m - 1), v(m);
  for (;;) {
    for (auto& x : u) x = rng.uniform();
    std::sort(u.begin(), u.end());
    double prev = 0.0;
    bool zero = false;
    for (int i = 0; i < m - 1; ++i) v[i] = u[i] - prev, prev = u[i], zero |= v[i] <= 0;
    v[m - 1] = 1.0 - prev;
    if (!zero && v[m - 1] > 0) return v;
  }
}

double sample_median(int t, Philox& rng) {
  require(t >= 0, "t must be >= 0");
  std::vector<double> u(2 * t + 1);
  for (auto& x : u) x = rng.uniform();
  std::nth_element(u.begin(), u.begin() + t, u.end());
  return u[t];
}

std::vector<double> sample_volumes(int d, Philox& rng) {
  require(d >= 1 && d <= 20, "d must be in [1, 20]");
  std::vector<double> x(d);
  for (auto& v : x) v = rng.uniform();
  std::vector<double> q(std::size_t(1) << d, 1.0);
  for (std::size_t h = 0; h < q.size(); ++h)
    for (int l = 0; l < d; ++l) q[h] *= (h >> l & 1) ? 1 - x[l] : x[l];
  return q;
}

std::vector<double> sample_split_weights(const FixedPointSpec& spec, Philox& rng) {
  switch (spec.instance.family) {
    case Family::mary: return sample_spacings(spec.instance.param, rng);
    case Family::fbbst: {
      const double v = sample_median(spec.instance.param, rng);
      return {v, 1 - v};
    }
    case Family::quadtree: return sample_volumes(spec.instance.param, rng);
  }
  return {};
}

double toll(const FixedPointSpec& spec, const std::vector<double>& split) {
  const int q = spec.instance.param;
  double s = 0;
  for (double v : split) s += xlogx(v);
  switch (spec.instance.family) {
    case Family::mary: {
      const double phi = 0.5 / (harmonic_d(q) - 1);
      const double bk = 1 + 2 * phi * s;
      const bool node_toll = spec.kind != MapKind::uniK || spec.toll == TollKind::N;
      return node_toll ? phi * bk : bk;  // b_N = φ·b_K
    }
    case Family::fbbst: return 1 + s / (harmonic_d(2 * q + 2) - harmonic_d(q + 1));
    case Family::quadtree: return 1 + 2.0 / q * s;
  }
  return 0;
}

std::vector<ContractionCheck> contraction_checks(const FixedPointSpec& spec) {
  check_spec(spec);
  std::vector<ContractionCheck> out;
  const int q = spec.instance.param;
  auto add = [&](const std::string& name, double v) { out.push_back({name, v, v < 1.0}); };
  const double lnG = std::lgamma(2.5);  // Γ(5/2)
  switch (spec.kind) {
    case MapKind::uniK: add("m*E[V1^2]", 2.0 / (q + 1)); break;
    case MapKind::TN_periodic: {
      const double a = solve_spectrum(spec.instance).alpha;
      add("m^2*B(m,2alpha-1)", std::exp(2 * std::log(double(q)) + std::lgamma(double(q)) + std::lgamma(2 * a - 1) -
                                        std::lgamma(q + 2 * a - 1)));
      add("m*E[V1^(2alpha-2)]", std::exp(std::lgamma(q + 1.0) + std::lgamma(2 * a - 1) - std::lgamma(q + 2 * a - 2)));
      break;
    }
    case MapKind::TNprime_normal:
      add("m*E[V1^(3/2)]", std::exp(std::lgamma(q + 1.0) + lnG - std::lgamma(q + 1.5)));
      break;
    case MapKind::Tmed_periodic:
    case MapKind::Tmed_normal: {
      // E V^s for V ~ Beta(t+1,t+1)
      auto ev = [q](double s) {
        return std::exp(std::lgamma(q + 1 + s) + std::lgamma(2 * q + 2.0) - std::lgamma(2 * q + 2 + s) -
                        std::lgamma(q + 1.0));
      };
      if (spec.kind == MapKind::Tmed_periodic)
        add("2*E[V^(2alpha-2)]", 2 * ev(2 * solve_spectrum(spec.instance).alpha - 2));
      else
        add("2*E[V^(3/2)]", 2 * ev(1.5));
      break;
    }
    case MapKind::Tquad_periodic: {
      const double a = quadtree_exponents(q).alpha_hat;
      add("(2/(2alpha+1))^d", std::pow(2 / (2 * a + 1), q));
      break;
    }
    case MapKind::Tquad_normal: add("(4/5)^d", std::pow(0.8, q)); break;
  }
  return out;
}

TraceRow pool_moments(const std::vector<PoolSample>& s, int generation) {
  TraceRow r;
  r.generation = generation;
  const double n = double(s.size());
  long double mx = 0, mwr = 0, mwi = 0;
  for (const auto& p : s) mx += p.x, mwr += p.w.real(), mwi += p.w.imag();
  mx /= n, mwr /= n, mwi /= n;
  long double vx = 0, vw = 0, c = 0;
  for (const auto& p : s) {
    const long double dx = p.x - mx, dr = p.w.real() - mwr, di = p.w.imag() - mwi;
    vx += dx * dx, vw += dr * dr + di * di, c += dx * dr;
  }
  const double den = n > 1 ? n - 1 : 1;
  r.mean_x = double(mx), r.var_x = double(vx / den);
  r.mean_w = cplx(double(mwr), double(mwi));
  r.var_w = double(vw / den), r.cov = double(c / den);
  return r;
}

SamplePool iterate(const FixedPointSpec& spec, std::int64_t pool_size, int generations, std::uint64_t seed,
                   int threads) {
  check_spec(spec);
  require(pool_size >= 1000, "pool size must be at least 1000");
  require(generations >= 1, "generations must be positive");
  require(threads >= 1, "threads must be positive");
  for (const auto& c : contraction_checks(spec))
    if (!c.ok) fail(Status::convergence, "contraction check failed: " + c.name);
  const MapParams mp = map_params(spec);
  const bool normal = is_normal(spec.kind), periodic = is_periodic(spec.kind);

  SamplePool pool;
  pool.samples.assign(pool_size, PoolSample{0.0, mp.theta});
  if (normal && spec.iterate_normal) {
    // start the iterated slot from a non-normal law with unit variance
    Philox rng(seed, ~std::uint64_t(0));
    for (auto& s : pool.samples) s.w = (rng() & 1) ? 1.0 : -1.0;
  }
  pool.trace.push_back(pool_moments(pool.samples, 0));

  std::vector<PoolSample> next(pool_size);
  for (int g = 1; g <= generations; ++g) {
    std::atomic<std::int64_t> cursor{0};
    std::vector<std::exception_ptr> errors(threads);
    const std::int64_t chunk = 1024;
    auto work = [&](int w) {
      try {
        for (std::int64_t lo; (lo = cursor.fetch_add(chunk)) < pool_size;) {
          const std::int64_t hi = std::min(pool_size, lo + chunk);
          for (std::int64_t i = lo; i < hi; ++i) {
            Philox rng(seed, (std::uint64_t(g) << 40) | std::uint64_t(i));
            const auto v = sample_split_weights(spec, rng);
            double x = mp.first_scale * toll(spec, v);
            cplx wv = 0.0;
            for (double vr : v) {
              const PoolSample& src = pool.samples[rng.below(std::uint64_t(pool_size))];
              x += vr * src.x;
              if (periodic)
                wv += std::exp(mp.exponent * std::log(vr)) * src.w;
              else if (normal && spec.iterate_normal)
                wv += std::sqrt(vr) * src.w;
            }
            if (normal && !spec.iterate_normal) {
              double z = 0;
              for (double vr : v) z += std::sqrt(vr) * rng.normal();
              wv = z;
            }
            next[i] = {x, wv};
          }
        }
      } catch (...) {
        errors[w] = std::current_exception();
        cursor = pool_size;
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> ts;
      for (int w = 0; w < threads; ++w) ts.emplace_back(work, w);
      for (auto& t : ts) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    if (normal && spec.iterate_normal) {
      // Σ V_r^{1/2} expands the mean by m·E[V^{1/2}] > 1; project back onto mean zero
      long double mw = 0;
      for (const auto& s : next) mw += s.w.real();
      mw /= pool_size;
      for (auto& s : next) s.w -= double(mw);
    }
    pool.samples.swap(next);
    pool.generation = g;
    pool.trace.push_back(pool_moments(pool.samples, g));
    if (!(pool.trace.back().var_x > 0)) fail(Status::convergence, "pool variance collapsed to zero");
  }
  return pool;
}

Diagnostics diagnose(const SamplePool& pool, const FixedPointSpec& spec) {
  check_spec(spec);
  require(pool.samples.size() >= 1000, "diagnostics need a pool of at least 1000");
  Diagnostics d;
  d.moments = pool_moments(pool.samples, pool.generation);
  std::vector<double> x, w;
  x.reserve(pool.samples.size());
  w.reserve(pool.samples.size());
  for (const auto& s : pool.samples) x.push_back(s.x), w.push_back(s.w.real());
  d.skew_x = skewness(x);
  d.normal_map = is_normal(spec.kind);
  if (d.normal_map) {
    const KSResult ks = ks_normal(w);
    d.ks_statistic = ks.statistic, d.ks_p = ks.p_value;
  }
  if (spec.kind != MapKind::uniK) {
    d.pearson = pearson(x, w);
    const std::size_t k = std::min<std::size_t>(2000, x.size());
    d.dcor = distance_correlation(std::vector<double>(x.begin(), x.begin() + k),
                                  std::vector<double>(w.begin(), w.begin() + k));
  }
  if (is_periodic(spec.kind)) {
    const cplx th = map_params(spec).theta;
    const double se = std::sqrt(d.moments.var_w / double(pool.samples.size()));
    d.mean_w_deviation = se > 0 ? std::abs(d.moments.mean_w - th) / se : 0.0;
  }
  return d;
}

namespace {
std::string g17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}
}  // namespace

std::string pool_csv(const SamplePool& pool) {
  std::string out = "x,re_w,im_w\n";
  for (const auto& s : pool.samples)
    out += g17(s.x) + ',' + g17(s.w.real()) + ',' + g17(s.w.imag()) + '\n';
  return out;
}

std::string trace_csv(const SamplePool& pool) {
  std::string out = "generation,mean_x,var_x,mean_re_w,mean_im_w,var_w,cov\n";
  for (const auto& r : pool.trace)
    out += std::to_string(r.generation) + ',' + g17(r.mean_x) + ',' + g17(r.var_x) + ',' + g17(r.mean_w.real()) +
           ',' + g17(r.mean_w.imag()) + ',' + g17(r.var_w) + ',' + g17(r.cov) + '\n';
  return out;
}

}  // namespace mst
