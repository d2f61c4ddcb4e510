#include "mstlab/mstlab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

#include <json.hpp>

#include "acceptance.hpp"
#include "asymptotics.hpp"
#include "error.hpp"
#include "fixpoint.hpp"
#include "moments.hpp"
#include "roots.hpp"
#include "treesim.hpp"

using json = nlohmann::ordered_json;

struct mst_spectrum {
  mst::Spectrum s;
};
struct mst_table {
  mst::MomentTable t;
};
struct mst_simstats {
  mst::SimConfig cfg;
  mst::SimStats st;
};
struct mst_pool {
  mst::FixedPointSpec spec;
  mst_fixpoint_config cfg;
  std::string map;
  mst::SamplePool pool;
};

namespace {

thread_local std::string g_error;

template <class F>
mst_status guard(F&& f) {
  try {
    g_error.clear();
    f();
    return MST_OK;
  } catch (const mst::Error& e) {
    g_error = e.what();
    return mst_status(int(e.status()));
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return MST_BUDGET;
  } catch (const std::exception& e) {
    g_error = e.what();
    return MST_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return MST_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void out_ptr(const void* p) { mst::require(p != nullptr, "null output pointer"); }

mst::FamilyInstance instance(int family, int param) {
  mst::require(family >= 0 && family <= 2, "unknown family code");
  mst::FamilyInstance in{mst::Family(family), param};
  mst::validate(in);
  return in;
}

json cplx_json(mst::cplx z) { return json::array({z.real(), z.imag()}); }

json regime_json(const mst::Regime& r) {
  return {{"covariance", mst::phase_name(r.covariance)}, {"distribution", mst::dist_phase_name(r.distribution)}};
}

std::string g17(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace

extern "C" {

const char* mst_last_error(void) { return g_error.c_str(); }
const char* mst_version(void) { return "1.0.0"; }
void mst_string_free(char* s) { std::free(s); }

mst_status mst_parse_family(const char* name, int* family) {
  return guard([&] {
    out_ptr(name), out_ptr(family);
    *family = int(mst::parse_family(name));
  });
}

mst_status mst_spectrum_solve(int family, int param, int precision_bits, mst_spectrum** out) {
  return guard([&] {
    out_ptr(out);
    const auto in = instance(family, param);
    mst::require(in.family != mst::Family::quadtree, "quadtree exponents are closed-form; use mst_regime");
    *out = new mst_spectrum{mst::solve_spectrum(in, precision_bits)};
  });
}

void mst_spectrum_free(mst_spectrum* s) { delete s; }

size_t mst_spectrum_size(const mst_spectrum* s) { return s ? s->s.roots.size() : 0; }

mst_status mst_spectrum_root(const mst_spectrum* s, size_t k, double* re, double* im) {
  return guard([&] {
    out_ptr(s), out_ptr(re), out_ptr(im);
    mst::require(k < s->s.roots.size(), "root index out of range");
    *re = s->s.roots[k].real(), *im = s->s.roots[k].imag();
  });
}

mst_status mst_spectrum_alpha_beta(const mst_spectrum* s, double* alpha, double* beta) {
  return guard([&] {
    out_ptr(s), out_ptr(alpha), out_ptr(beta);
    *alpha = s->s.alpha, *beta = s->s.beta;
  });
}

mst_status mst_spectrum_json(const mst_spectrum* s, char** out) {
  return guard([&] {
    out_ptr(s), out_ptr(out);
    const auto& sp = s->s;
    json roots = json::array();
    for (auto r : sp.roots) roots.push_back(cplx_json(r));
    json coef = json::array();
    for (const auto& c : mst::build_indicial(sp.instance)) coef.push_back(c.get_str());
    json j = {{"family", mst::family_name(sp.instance.family)},
              {"param", sp.instance.param},
              {"degree", sp.roots.size()},
              {"indicial_coefficients", coef},
              {"roots", roots},
              {"principal_root", cplx_json(sp.principal_root)},
              {"alpha", sp.alpha},
              {"beta", sp.beta},
              {"regime", regime_json(mst::classify_regime(sp))},
              {"certified_error", sp.certified_error},
              {"inclusion_radius", sp.inclusion_radius},
              {"precision_bits", sp.precision_bits}};
    if (sp.roots.size() > 1) j["amplitude"] = cplx_json(mst::amplitude(sp, 1)), j["theta"] = cplx_json(mst::theta(sp));
    *out = dup(j.dump(2));
  });
}

mst_status mst_quadtree_exponents_json(int d, char** out) {
  return guard([&] {
    out_ptr(out);
    const auto q = mst::quadtree_exponents(d);
    json j = {{"family", "quadtree"},
              {"param", d},
              {"closed_form", true},
              {"alpha", q.alpha_hat},
              {"beta", q.beta_hat},
              {"regime", regime_json(mst::classify_regime(q))}};
    *out = dup(j.dump(2));
  });
}

mst_status mst_regime(int family, int param, int* covariance, int* distribution) {
  return guard([&] {
    out_ptr(covariance), out_ptr(distribution);
    const auto r = mst::classify_regime(instance(family, param));
    *covariance = int(r.covariance), *distribution = int(r.distribution);
  });
}

mst_status mst_table_compute(int family, int param, int n_max, int mode, int allow_large, mst_table** out) {
  return guard([&] {
    out_ptr(out);
    mst::require(mode == 0 || mode == 1, "mode must be 0 (exact) or 1 (float)");
    mst::TableOptions o;
    o.allow_large = allow_large != 0;
    *out = new mst_table{mst::moment_table(instance(family, param), n_max,
                                           mode == 0 ? mst::Mode::exact_rational : mst::Mode::float64, o)};
  });
}

void mst_table_free(mst_table* t) { delete t; }

mst_status mst_table_value(const mst_table* t, const char* row, int n, double* out) {
  return guard([&] {
    out_ptr(t), out_ptr(row), out_ptr(out);
    *out = t->t.value(row, n);
  });
}

mst_status mst_table_cell(const mst_table* t, const char* row, int n, char** out) {
  return guard([&] {
    out_ptr(t), out_ptr(row), out_ptr(out);
    *out = dup(t->t.cell(row, n));
  });
}

mst_status mst_table_csv(const mst_table* t, char** out) {
  return guard([&] {
    out_ptr(t), out_ptr(out);
    *out = dup(t->t.to_csv());
  });
}

mst_status mst_table_diagnostics(const mst_table* t, double* cancellation, int* precision_warning) {
  return guard([&] {
    out_ptr(t), out_ptr(cancellation), out_ptr(precision_warning);
    *cancellation = t->t.cancellation, *precision_warning = t->t.precision_warning;
  });
}

mst_status mst_constants_json(int family, int param, double c_plus_re, double c_plus_im, char** out) {
  return guard([&] {
    out_ptr(out);
    const auto in = instance(family, param);
    const auto c = mst::constants(in, c_plus_re, c_plus_im);
    json j = {{"family", mst::family_name(in.family)}, {"param", in.param}};
    j["regime"] = regime_json(mst::classify_regime(in));
    switch (in.family) {
      case mst::Family::mary:
        j["phi"] = c.phi.get_str(), j["phi_decimal"] = c.phi.get_d();
        j["H"] = c.harmonic1.get_str(), j["H2"] = c.harmonic2.get_str();
        j["c1"] = c.c1, j["c1_printed"] = c.c1_printed, j["c_prime"] = c.c_prime;
        j["c2_minus_phi_c1"] = c.c2_minus_phi_c1->get_str();
        j["c2_minus_phi_c1_decimal"] = c.c2_minus_phi_c1->get_d();
        j["c2_minus_phi_c1_root_sum"] = c.c2_root_sum;
        if (c.c2_printed) {
          j["c2_printed"] = c.c2_printed->get_str();
          j["c2_match"] = *c.c2_printed == *c.c2_minus_phi_c1;
        }
        j["C_K"] = c.cK;
        break;
      case mst::Family::fbbst:
        j["phi_t"] = c.phi.get_str(), j["phi_t_decimal"] = c.phi.get_d();
        j["H_2t+2_minus_H_t+1"] = c.harmonic1.get_str();
        j["D_X"] = c.cK;
        break;
      case mst::Family::quadtree: {
        const auto q = mst::quadtree_exponents(param);
        j["alpha_hat"] = q.alpha_hat, j["beta_hat"] = q.beta_hat;
        j["E_X"] = c.cK;
        j["c_plus"] = json::array({c_plus_re, c_plus_im});
        break;
      }
    }
    j["theta"] = cplx_json(c.theta);
    j["theta_from_spectrum"] = c.theta_defined;
    *out = dup(j.dump(2));
  });
}

mst_status mst_table_alpha_csv(int from, int to, char** out) {
  return guard([&] {
    out_ptr(out);
    mst::require(from >= 3 && to >= from, "need 3 <= from <= to");
    std::string s = "m,alpha,beta\n";
    for (int m = from; m <= to; ++m) {
      const auto sp = mst::solve_spectrum({mst::Family::mary, m});
      s += std::to_string(m) + ',' + g17(sp.alpha) + ',' + g17(sp.beta) + '\n';
    }
    *out = dup(s);
  });
}

mst_status mst_table_c2_csv(int from, int to, char** out) {
  return guard([&] {
    out_ptr(out);
    mst::require(from >= 3 && to >= from, "need 3 <= from <= to");
    std::string s = "m,c2_minus_phi_c1,rational,root_sum,printed,match\n";
    for (int m = from; m <= to; ++m) {
      const mpq_class q = mst::c2_minus_phi_c1_exact(m);
      const auto p = mst::c2_printed(m);
      const double rs = mst::c2_minus_phi_c1_roots(mst::solve_spectrum({mst::Family::mary, m}));
      s += std::to_string(m) + ',' + g17(q.get_d()) + ',' + q.get_str() + ',' + g17(rs) + ',' +
           (p ? p->get_str() : "") + ',' + (p ? (*p == q ? "true" : "false") : "") + '\n';
    }
    *out = dup(s);
  });
}

namespace {
mst::PeriodicFunction make_periodic(const char* kind, int param, int printed, double cre, double cim) {
  out_ptr(kind);
  const auto k = mst::parse_periodic_kind(kind);
  mst::Family f = mst::Family::mary;
  if (k == mst::PeriodicKind::G1 || k == mst::PeriodicKind::G2) f = mst::Family::fbbst;
  if (k == mst::PeriodicKind::P1 || k == mst::PeriodicKind::P2) f = mst::Family::quadtree;
  mst::PeriodicOptions o;
  o.printed = printed != 0;
  o.c_plus = mst::cplx(cre, cim);
  return mst::PeriodicFunction(k, instance(int(f), param), o);
}
}  // namespace

mst_status mst_periodic_eval(const char* kind, int param, int printed, double c_plus_re, double c_plus_im, double z,
                             double* out) {
  return guard([&] {
    out_ptr(out);
    *out = make_periodic(kind, param, printed, c_plus_re, c_plus_im)(z);
  });
}

mst_status mst_periodic_csv(const char* kind, int param, int printed, double c_plus_re, double c_plus_im, int points,
                            char** out) {
  return guard([&] {
    out_ptr(out);
    *out = dup(mst::periodic_csv(make_periodic(kind, param, printed, c_plus_re, c_plus_im), points));
  });
}

mst_status mst_simulate(int family, int param, int64_t n, int64_t reps, uint64_t seed, int threads, int method,
                        mst_simstats** out) {
  return guard([&] {
    out_ptr(out);
    mst::require(method == 0 || method == 1, "method must be 0 (recursion) or 1 (tree)");
    mst::SimConfig cfg{instance(family, param), n, reps, seed, threads,
                       method ? mst::SimMethod::tree : mst::SimMethod::recursion};
    auto st = mst::monte_carlo(cfg);
    *out = new mst_simstats{cfg, std::move(st)};
  });
}

void mst_simstats_free(mst_simstats* s) { delete s; }

mst_status mst_simstats_mean(const mst_simstats* s, int i, double* out) {
  return guard([&] {
    out_ptr(s), out_ptr(out);
    *out = s->st.mean(i);
  });
}

mst_status mst_simstats_cov(const mst_simstats* s, int i, int j, double* out) {
  return guard([&] {
    out_ptr(s), out_ptr(out);
    *out = s->st.cov(i, j);
  });
}

mst_status mst_simstats_corr(const mst_simstats* s, int i, int j, double* out) {
  return guard([&] {
    out_ptr(s), out_ptr(out);
    *out = s->st.corr(i, j);
  });
}

mst_status mst_simstats_json(const mst_simstats* s, char** out) {
  return guard([&] {
    out_ptr(s), out_ptr(out);
    const auto& st = s->st;
    json measures = json::array();
    for (int i = 0; i < st.dim(); ++i)
      measures.push_back({{"name", st.names()[i]},
                          {"mean", st.mean(i)},
                          {"mean_exact", st.mean_exact(i).get_str()},
                          {"se_mean", st.se_mean(i)},
                          {"var", st.var(i)},
                          {"var_exact", st.cov_exact(i, i).get_str()},
                          {"se_var", st.se_cov(i, i)}});
    json pairs = json::array();
    for (int i = 0; i < st.dim(); ++i)
      for (int j = i + 1; j < st.dim(); ++j)
        pairs.push_back({{"pair", st.names()[i] + "," + st.names()[j]},
                         {"cov", st.cov(i, j)},
                         {"cov_exact", st.cov_exact(i, j).get_str()},
                         {"se_cov", st.se_cov(i, j)},
                         {"corr", st.corr(i, j)},
                         {"se_corr", st.se_corr(i, j)}});
    json j = {{"family", mst::family_name(s->cfg.instance.family)},
              {"param", s->cfg.instance.param},
              {"n", s->cfg.n},
              {"reps", s->cfg.reps},
              {"seed", s->cfg.seed},
              {"method", s->cfg.method == mst::SimMethod::tree ? "tree" : "recursion"},
              {"count", st.count()},
              {"measures", measures},
              {"pairs", pairs}};
    *out = dup(j.dump(2));
  });
}

mst_status mst_corr_profile_csv(int family, int param, const int64_t* grid, size_t grid_len, int64_t reps,
                                uint64_t seed, int threads, double c_plus_re, double c_plus_im, char** out) {
  return guard([&] {
    out_ptr(grid), out_ptr(out);
    std::vector<std::int64_t> g(grid, grid + grid_len);
    *out = dup(mst::corr_profile(instance(family, param), g, reps, seed, threads, c_plus_re, c_plus_im));
  });
}

void mst_fixpoint_config_default(mst_fixpoint_config* c) {
  if (!c) return;
  *c = mst_fixpoint_config{"uniK", 3, 0, 0, 1.0, 0.0, 100000, 30, 1, 1};
}

mst_status mst_fixpoint_run(const mst_fixpoint_config* c, mst_pool** out) {
  return guard([&] {
    out_ptr(c), out_ptr(out), out_ptr(c->map);
    const auto kind = mst::parse_map_kind(c->map);
    mst::Family f = mst::Family::mary;
    if (kind == mst::MapKind::Tmed_normal || kind == mst::MapKind::Tmed_periodic) f = mst::Family::fbbst;
    if (kind == mst::MapKind::Tquad_normal || kind == mst::MapKind::Tquad_periodic) f = mst::Family::quadtree;
    mst::FixedPointSpec spec{instance(int(f), c->param), kind, c->toll_n ? mst::TollKind::N : mst::TollKind::K,
                             c->iterate_normal != 0, mst::cplx(c->c_plus_re, c->c_plus_im)};
    auto pool = mst::iterate(spec, c->pool_size, c->generations, c->seed, c->threads);
    auto* p = new mst_pool{spec, *c, c->map, std::move(pool)};
    p->cfg.map = p->map.c_str();
    *out = p;
  });
}

void mst_pool_free(mst_pool* p) { delete p; }

mst_status mst_pool_trace_csv(const mst_pool* p, char** out) {
  return guard([&] {
    out_ptr(p), out_ptr(out);
    *out = dup(mst::trace_csv(p->pool));
  });
}

mst_status mst_pool_samples_csv(const mst_pool* p, char** out) {
  return guard([&] {
    out_ptr(p), out_ptr(out);
    *out = dup(mst::pool_csv(p->pool));
  });
}

mst_status mst_pool_diagnostics_json(const mst_pool* p, char** out) {
  return guard([&] {
    out_ptr(p), out_ptr(out);
    const auto d = mst::diagnose(p->pool, p->spec);
    json checks = json::array();
    for (const auto& c : mst::contraction_checks(p->spec))
      checks.push_back({{"name", c.name}, {"value", c.value}, {"ok", c.ok}});
    json j = {{"map", p->map},
              {"family", mst::family_name(p->spec.instance.family)},
              {"param", p->spec.instance.param},
              {"toll", p->spec.toll == mst::TollKind::N ? "b_N" : "b_K"},
              {"iterate_normal", p->spec.iterate_normal},
              {"pool_size", p->cfg.pool_size},
              {"generations", p->cfg.generations},
              {"seed", p->cfg.seed},
              {"mean_constraint", cplx_json(mst::mean_constraint(p->spec))},
              {"contraction", checks},
              {"mean_x", d.moments.mean_x},
              {"var_x", d.moments.var_x},
              {"skew_x", d.skew_x},
              {"mean_w", cplx_json(d.moments.mean_w)},
              {"var_w", d.moments.var_w},
              {"cov_x_re_w", d.moments.cov}};
    if (d.normal_map) j["ks_statistic"] = d.ks_statistic, j["ks_p_value"] = d.ks_p;
    if (p->spec.kind != mst::MapKind::uniK) j["pearson"] = d.pearson, j["distance_correlation"] = d.dcor;
    if (p->spec.kind == mst::MapKind::TN_periodic || p->spec.kind == mst::MapKind::Tmed_periodic ||
        p->spec.kind == mst::MapKind::Tquad_periodic)
      j["mean_w_deviation_se"] = d.mean_w_deviation;
    *out = dup(j.dump(2));
  });
}

mst_status mst_verify(int quick, int threads, const char* cli_path, char** report, int* unexpected_failures,
                      int* expected_failures) {
  return guard([&] {
    out_ptr(report), out_ptr(unexpected_failures), out_ptr(expected_failures);
    mst::AcceptanceOptions o;
    o.quick = quick != 0;
    o.threads = threads;
    if (cli_path) o.cli_path = cli_path;
    std::string rep;
    int bad = 0, xf = 0;
    for (const auto& r : mst::run_acceptance(o)) {
      rep += mst::format_result(r) + '\n';
      if (!r.pass) (r.expected_failure ? xf : bad) += 1;
    }
    *report = dup(rep);
    *unexpected_failures = bad, *expected_failures = xf;
  });
}

}  // extern "C"
