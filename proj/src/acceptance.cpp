#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "asymptotics.hpp"
#include "error.hpp"
#include "fixpoint.hpp"
#include "moments.hpp"
#include "treesim.hpp"

namespace mst {

namespace {

// published alpha values, m = 3..26
const double kTable1[] = {-3,    -2.5,  -1.5,  -0.768, -0.260, 0.101, 0.366, 0.568, 0.726, 0.852, 0.955, 1.040,
                          1.112, 1.173, 1.226, 1.272,  1.313,  1.348, 1.380, 1.409, 1.435, 1.458, 1.479, 1.499};

std::string fmt(const char* f, double a) {
  char b[160];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::string fmt(const char* f, double a, double b2) {
  char b[160];
  std::snprintf(b, sizeof b, f, a, b2);
  return b;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome c1_table_alpha() {
  double worst = 0;
  int at = 0, outside = 0, truncated = 0;
  for (int m = 3; m <= 26; ++m) {
    const double a = solve_spectrum({Family::mary, m}).alpha;
    const double e = std::abs(a - kTable1[m - 3]);
    if (e > worst) worst = e, at = m;
    outside += e > 5e-4;
    truncated += std::abs(std::trunc(a * 1000.0) / 1000.0 - kTable1[m - 3]) < 1e-9;
  }
  return {worst <= 5e-4, fmt("max |alpha - table| = %.2e", worst) + " at m=" + std::to_string(at) + "; " +
                             std::to_string(outside) + "/24 outside 5e-4; " + std::to_string(truncated) +
                             "/24 equal to alpha truncated to 3 decimals"};
}

Outcome c2_rationals() {
  double worst = 0;
  int bad = 0;
  for (int m = 3; m <= 30; ++m) {
    const mpq_class ex = c2_minus_phi_c1_exact(m);
    const mpq_class pr = *c2_printed(m);
    const double rel = std::abs(mpq_class(ex - pr).get_d() / pr.get_d());
    const double rel_roots = std::abs(c2_minus_phi_c1_roots(solve_spectrum({Family::mary, m})) / pr.get_d() - 1);
    worst = std::max({worst, rel, rel_roots});
    if (rel > 1e-9 || rel_roots > 1e-9) ++bad;
  }
  return {bad == 0, fmt("28 rationals, worst relative error %.2e (closed form and root sum)", worst)};
}

Outcome c3_oracle(int threads) {
  int mismatches = 0, cells = 0;
  static const char* rows[] = {"mu", "kappa", "nu", "VS", "VSK", "VK", "VSN", "VN", "VKN"};
  for (int m : {3, 4}) {
    const MomentTable t = moment_table({Family::mary, m}, 9, Mode::exact_rational);
    for (int n = 1; n <= 9; ++n) {
      const OracleMoments o = permutation_oracle(n, m, threads);
      for (int r = 0; r < 9; ++r) {
        ++cells;
        mpq_class q(t.cell(rows[r], n));
        q.canonicalize();
        if (q != o.values[r]) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(cells) + " cells compared, " + std::to_string(mismatches) + " mismatches"};
}

Outcome c4_thresholds() {
  auto cov = [](Family f, int p) { return classify_regime(FamilyInstance{f, p}).covariance == Phase::periodic; };
  auto dist = [](Family f, int p) {
    return classify_regime(FamilyInstance{f, p}).distribution == DistPhase::periodic;
  };
  struct Flip {
    Family f;
    int lo;
    bool covariance;
  };
  const Flip flips[] = {{Family::mary, 13, true},  {Family::mary, 26, false},    {Family::fbbst, 28, true},
                        {Family::fbbst, 58, false}, {Family::quadtree, 5, true}, {Family::quadtree, 8, false}};
  std::string detail;
  bool ok = true;
  for (const auto& fl : flips) {
    const bool a = fl.covariance ? cov(fl.f, fl.lo) : dist(fl.f, fl.lo);
    const bool b = fl.covariance ? cov(fl.f, fl.lo + 1) : dist(fl.f, fl.lo + 1);
    const bool good = !a && b;
    ok &= good;
    detail += std::string(family_name(fl.f)) + " " + std::to_string(fl.lo) + "/" + std::to_string(fl.lo + 1) +
              (good ? " ok; " : " WRONG; ");
  }
  // the flip must be the only one in range
  for (int m = 3; m <= 40; ++m) ok &= cov(Family::mary, m) == (m >= 14) && dist(Family::mary, m) == (m >= 27);
  for (int d = 1; d <= 12; ++d) ok &= cov(Family::quadtree, d) == (d >= 6) && dist(Family::quadtree, d) == (d >= 9);
  return {ok, detail};
}

Outcome c5_growth() {
  const auto grid = geometric_grid(256, 8192, 8);
  auto row = [&](const MomentTable& t, const char* r) {
    std::vector<double> v;
    for (int n : grid) v.push_back(t.value(r, n));
    return v;
  };
  const MomentTable t3 = moment_table({Family::mary, 3}, 8192, Mode::float64);
  const MomentTable t20 = moment_table({Family::mary, 20}, 8192, Mode::float64);
  const double s_vk = growth_exponent(row(t3, "VK"), grid).slope;
  const double s_vsk3 = growth_exponent(row(t3, "VSK"), grid).slope;
  const auto v20 = row(t20, "VSK");
  bool positive = true;
  for (double v : v20) positive &= v > 0;
  const Spectrum s20 = solve_spectrum({Family::mary, 20});
  const GrowthFit g20 = positive ? growth_exponent(v20, grid) : growth_exponent_periodic(v20, grid, s20.beta);
  const double r4 = t3.value("VSN", 4096) / (4096 * std::log(4096.0));
  const double r8 = t3.value("VSN", 8192) / (8192 * std::log(8192.0));
  const double drift = std::abs(r8 / r4 - 1);
  const bool ok = std::abs(s_vk - 2) <= 0.05 && std::abs(s_vsk3 - 1) <= 0.1 && std::abs(g20.slope - 1.348) <= 0.1 &&
                  r8 > 0 && drift < 0.1;
  std::ostringstream os;
  os << fmt("VK slope %.4f (m=3); ", s_vk) << fmt("VSK slope %.4f (m=3); ", s_vsk3)
     << "VSK " << (g20.envelope ? "envelope" : "log-log") << fmt(" exponent %.4f (m=20); ", g20.slope)
     << fmt("VSN/(n ln n) %.5f, top-octave drift %.3f", r8, drift);
  return {ok, os.str()};
}

Outcome c6_periodic() {
  const FamilyInstance inst{Family::mary, 27};
  const Spectrum s = solve_spectrum(inst);
  const MomentTable t = moment_table(inst, 8192, Mode::float64);
  const int n = 8192;
  const double z = s.beta * std::log(double(n));
  const double f1 = PeriodicFunction(PeriodicKind::F1, inst)(z);
  const double f2 = PeriodicFunction(PeriodicKind::F2, inst)(z);
  const double y1 = t.value("VS", n) / std::pow(double(n), 2 * s.alpha - 2);
  const double y2 = t.value("VSK", n) / std::pow(double(n), s.alpha);
  const double e1 = std::abs(y1 / f1 - 1), e2 = std::abs(y2 / f2 - 1);
  return {e1 <= 0.15 && e2 <= 0.15, fmt("VS/n^(2a-2)=%.4f vs F1=%.4f", y1, f1) + fmt(" (rel %.3f); ", e1) +
                                         fmt("VSK/n^a=%.4f vs F2=%.4f", y2, f2) + fmt(" (rel %.3f)", e2)};
}

Outcome c7_quicksort() {
  const double ref = 7 - 2 * kPi * kPi / 3;
  const double a = std::abs(c_K_mary(2) - ref), b = std::abs(E_X(1) - ref), c = std::abs(D_X(0) - ref);
  const double w = std::max({a, b, c});
  return {w <= 1e-12, fmt("max deviation from 7-2pi^2/3: %.2e", w)};
}

Outcome c8_monte_carlo(bool quick, int threads) {
  const std::int64_t reps = quick ? 2000 : 10000;
  SimConfig cfg{{Family::mary, 3}, 10000, reps, 20240601, threads};
  const SimStats st = monte_carlo(cfg);
  const double vk = st.var(1) / 1e8, ck = c_K_mary(3);
  const double rkn = st.corr(1, 2), rsk = st.corr(0, 1);
  const bool ok = std::abs(vk / ck - 1) <= 0.05 && rkn >= 0.95 && std::abs(rsk) <= 0.1;
  return {ok, fmt("Var(K)/n^2=%.5f vs C_K=%.5f; ", vk, ck) + fmt("rho(K,N)=%.4f; rho(S,K)=%.4f", rkn, rsk)};
}

Outcome c9_fixpoint(bool quick, int threads) {
  const std::int64_t pool = quick ? 20000 : 100000;
  std::ostringstream os;
  bool ok = true;
  for (int m : {3, 10, 20}) {
    FixedPointSpec sp{{Family::mary, m}, MapKind::uniK};
    const SamplePool p = iterate(sp, pool, 30, 11 + m, threads);
    const double v = p.trace.back().var_x, ck = c_K_mary(m);
    ok &= std::abs(v / ck - 1) <= 0.05;
    os << "uniK m=" << m << fmt(" var/C_K=%.4f; ", v / ck);
  }
  // Monte Carlo identities
  const std::int64_t draws = quick ? 200000 : 1000000;
  {
    FixedPointSpec sp{{Family::mary, 3}, MapKind::uniK};
    RunningStats b;
    Philox rng(5, 0);
    for (std::int64_t i = 0; i < draws; ++i) b.add(toll(sp, sample_spacings(3, rng)));
    const double z = b.mean / std::sqrt(b.var() / double(b.n));
    ok &= std::abs(z) <= 3;
    os << fmt("E[b_K] z=%.2f; ", z);
  }
  {
    const int m = 27;
    const Spectrum s = solve_spectrum({Family::mary, m});
    const cplx e = cplx(s.alpha, s.beta) - 1.0;
    RunningStats re, im;
    Philox rng(6, 0);
    for (std::int64_t i = 0; i < draws; ++i) {
      const cplx w = std::exp(e * std::log(sample_spacings(m, rng)[0]));
      re.add(w.real()), im.add(w.imag());
    }
    const double zr = (re.mean - 1.0 / m) / std::sqrt(re.var() / double(re.n));
    const double zi = im.mean / std::sqrt(im.var() / double(im.n));
    ok &= std::abs(zr) <= 3 && std::abs(zi) <= 3;
    os << fmt("E[V1^(l2-1)]-1/m z=(%.2f,%.2f); ", zr, zi);
  }
  {
    FixedPointSpec sp{{Family::mary, 3}, MapKind::TNprime_normal};
    const SamplePool p = iterate(sp, pool, 30, 17, threads);
    const Diagnostics d = diagnose(p, sp);
    ok &= d.ks_p > 0.01 && std::abs(d.pearson) < 0.05;
    os << fmt("TN' KS p=%.3f, corr=%.4f", d.ks_p, d.pearson);
  }
  return {ok, os.str()};
}

Outcome c10_dirichlet() {
  double worst = 0;
  for (int m : {2, 3}) {
    for (auto [u, v] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}) {
      worst = std::max(worst, std::abs(dirichlet_I(u, v, m).real() - dirichlet_I_quadrature(u, v, m).value));
      worst = std::max(worst, std::abs(dirichlet_dv(u, m).real() - dirichlet_dv_quadrature(u, m).value));
    }
    worst = std::max(worst, std::abs(dirichlet_dudv(m, false) - dirichlet_dudv_quadrature(m).value));
  }
  return {worst <= 1e-6, fmt("max |closed form - quadrature| = %.2e", worst)};
}

std::string run_capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) fail(Status::internal, "cannot run " + cmd);
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  const int rc = pclose(p);
  if (rc != 0) fail(Status::internal, "command failed (" + std::to_string(rc) + "): " + cmd);
  return out;
}

std::string stats_fingerprint(const SimStats& st) {
  std::string s;
  for (int i = 0; i < st.dim(); ++i) {
    s += st.mean_exact(i).get_str() + ";";
    for (int j = i; j < st.dim(); ++j) s += st.cov_exact(i, j).get_str() + ";";
  }
  return s;
}

Outcome c11_determinism(const std::string& cli) {
  int checked = 0, differ = 0;
  std::string which;
  if (!cli.empty()) {
    const char* cmds[] = {
        "simulate --family mary --param 3 --n 2000 --reps 300 --seed 9",
        "simulate --family fbbst --param 2 --n 2000 --reps 300 --seed 9",
        "simulate --family quadtree --param 2 --n 1000 --reps 200 --seed 9",
        "simulate --family mary --param 27 --grid 500,1000 --reps 200 --seed 9",
        "fixpoint --map uniK --param 3 --pool 5000 --gens 5 --seed 9",
        "fixpoint --map TN_periodic --param 27 --pool 5000 --gens 3 --seed 9",
        "fixpoint --map Tmed_normal --param 1 --pool 5000 --gens 3 --seed 9",
    };
    for (const char* c : cmds) {
      const std::string base = "'" + cli + "' " + c;
      const std::string a = run_capture(base + " --threads 1 2>/dev/null");
      const std::string b = run_capture(base + " --threads 3 2>/dev/null");
      ++checked;
      if (a != b || a.empty()) ++differ, which += std::string(" [") + c + "]";
    }
    return {differ == 0, std::to_string(checked) + " CLI commands compared at --threads 1 and 3, " +
                             std::to_string(differ) + " differ" + which};
  }
  for (auto f : {FamilyInstance{Family::mary, 3}, FamilyInstance{Family::fbbst, 2}, FamilyInstance{Family::quadtree, 2}}) {
    SimConfig a{f, 2000, 300, 9, 1}, b{f, 2000, 300, 9, 3};
    ++checked;
    if (stats_fingerprint(monte_carlo(a)) != stats_fingerprint(monte_carlo(b))) ++differ;
  }
  FixedPointSpec sp{{Family::mary, 27}, MapKind::TN_periodic};
  ++checked;
  if (pool_csv(iterate(sp, 5000, 3, 9, 1)) != pool_csv(iterate(sp, 5000, 3, 9, 3))) ++differ;
  return {differ == 0, std::to_string(checked) + " in-process runs compared at 1 and 3 threads, " +
                           std::to_string(differ) + " differ"};
}

}  // namespace

const std::vector<int>& expected_failures() {
  static const std::vector<int> v{1, 6};
  return v;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  struct Item {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const int th = std::max(1, opt.threads);
  const std::vector<Item> items = {
      {1, "published alpha values", c1_table_alpha},
      {2, "c2 - phi c1 rationals", c2_rationals},
      {3, "exact tables vs permutation oracle", [th] { return c3_oracle(th); }},
      {4, "phase thresholds", c4_thresholds},
      {5, "growth exponents", c5_growth},
      {6, "periodic tracking m=27", c6_periodic},
      {7, "quicksort reductions", c7_quicksort},
      {8, "Monte Carlo limits m=3", [&] { return c8_monte_carlo(opt.quick, th); }},
      {9, "fixed-point suite", [&] { return c9_fixpoint(opt.quick, th); }},
      {10, "Dirichlet integrals vs quadrature", c10_dirichlet},
      {11, "determinism across threads", [&] { return c11_determinism(opt.cli_path); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& it : items) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), it.id) == opt.only.end()) continue;
    CriterionResult r;
    r.id = it.id;
    r.title = it.title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = it.run();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& xf = expected_failures();
    r.expected_failure = !r.pass && std::find(xf.begin(), xf.end(), r.id) != xf.end();
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::string status = r.pass ? "PASS" : (r.expected_failure ? "FAIL (expected, documented in README)" : "FAIL");
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", r.seconds);
  return "criterion " + std::to_string(r.id) + ": " + status + " | " + r.title + " | " + r.detail + " | " + t;
}

}  // namespace mst
