// Command-line front end over the C API.
#include <mstlab/mstlab.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kRegime = 3, kAcceptance = 4 };

struct CallError {
  mst_status status;
  std::string message;
};

void check(mst_status s) {
  if (s != MST_OK) throw CallError{s, mst_last_error()};
}

std::string take(char* p) {
  std::string s = p ? p : "";
  mst_string_free(p);
  return s;
}

int family_code(const std::string& name) {
  int f = 0;
  check(mst_parse_family(name.c_str(), &f));
  return f;
}

// Options shared by the subcommands; unused ones stay at their defaults.
struct Config {
  std::string family = "mary";
  int param = 3;
  int precision = 128;
  int from = 3, to = 26;
  int nmax = 200;
  std::string mode = "exact";
  bool allow_large = false;
  long long n = 1000;
  std::string grid;
  long long reps = 1000;
  unsigned long long seed = 1;
  int threads = 1;
  std::string method = "recursion";
  std::string map = "uniK";
  long long pool = 100000;
  int gens = 30;
  std::string toll = "K";
  bool iterate_normal = false;
  std::string samples;
  std::string kind = "Frho";
  int points = 1024;
  bool printed = false;
  double c_plus_re = 1.0, c_plus_im = 0.0;
  std::string format;
  std::string output;
  bool quick = false;
};

// Echo of the run configuration; excludes --threads and output location so
// reruns with different worker counts stay byte-identical.
std::vector<std::pair<std::string, std::string>> echo(const std::string& sub, const Config& c) {
  std::vector<std::pair<std::string, std::string>> e{{"subcommand", sub}};
  auto add = [&](const char* k, const std::string& v) { e.emplace_back(k, v); };
  if (sub == "roots" || sub == "constants" || sub == "moments" || sub == "simulate")
    add("family", c.family), add("param", std::to_string(c.param));
  if (sub == "roots") add("precision", std::to_string(c.precision));
  if (sub == "table-alpha" || sub == "table-c2") add("from", std::to_string(c.from)), add("to", std::to_string(c.to));
  if (sub == "moments") add("nmax", std::to_string(c.nmax)), add("mode", c.mode);
  if (sub == "simulate") {
    if (c.grid.empty())
      add("n", std::to_string(c.n));
    else
      add("grid", c.grid);
    add("reps", std::to_string(c.reps)), add("seed", std::to_string(c.seed)), add("method", c.method);
  }
  if (sub == "fixpoint") {
    add("map", c.map), add("param", std::to_string(c.param)), add("pool", std::to_string(c.pool));
    add("gens", std::to_string(c.gens)), add("seed", std::to_string(c.seed)), add("toll", c.toll);
    add("iterate_normal", c.iterate_normal ? "true" : "false");
  }
  if (sub == "periodic") {
    add("kind", c.kind), add("param", std::to_string(c.param)), add("points", std::to_string(c.points));
    add("printed", c.printed ? "true" : "false");
  }
  if (sub == "constants" || sub == "periodic" || sub == "simulate") {
    std::ostringstream os;
    os.precision(17);
    os << c.c_plus_re << ',' << c.c_plus_im;
    add("c_plus", os.str());
  }
  if (sub == "verify") add("quick", c.quick ? "true" : "false");
  return e;
}

std::string csv_header(const std::string& sub, const Config& c) {
  std::string s = std::string("# mstlab ") + mst_version() + "\n";
  for (const auto& [k, v] : echo(sub, c)) s += "# " + k + "=" + v + "\n";
  return s;
}

json meta(const std::string& sub, const Config& c) {
  json cfg = json::object();
  for (const auto& [k, v] : echo(sub, c)) cfg[k] = v;
  return {{"tool", "mstlab"}, {"version", mst_version()}, {"config", cfg}};
}

std::string wrap_json(const std::string& sub, const Config& c, const std::string& body, const char* key) {
  json j;
  j["meta"] = meta(sub, c);
  j[key] = json::parse(body);
  return j.dump(2) + "\n";
}

void emit(const Config& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw CallError{MST_INVALID_ARGUMENT, "cannot open output file " + c.output};
  f << text;
}

std::vector<int64_t> parse_grid(const std::string& s) {
  std::vector<int64_t> g;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      g.push_back(v);
    } catch (const std::exception&) {
      throw CallError{MST_INVALID_ARGUMENT, "bad grid entry '" + tok + "'"};
    }
  }
  if (g.empty()) throw CallError{MST_INVALID_ARGUMENT, "empty grid"};
  return g;
}

std::string self_path(const char* argv0) {
  std::vector<char> buf(4096);
  const ssize_t k = readlink("/proc/self/exe", buf.data(), buf.size() - 1);
  if (k > 0) return std::string(buf.data(), std::size_t(k));
  return argv0;
}

// key=value lines; '#' starts a comment. Keys are long option names.
std::vector<std::string> config_args(const std::string& path, const std::vector<std::string>& argv) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot read " + path);
  std::vector<std::string> out;
  std::string line;
  int ln = 0;
  while (std::getline(f, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", path + ":" + std::to_string(ln) + ": expected key=value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    val.erase(0, val.find_first_not_of(" \t"));
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : argv) given |= a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    if (val == "true" || val == "false") {
      if (val == "true") out.push_back(flag);
    } else {
      out.push_back(flag + "=" + val);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Moments, phase changes and limit laws of random search trees"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key=value configuration file (command-line flags take precedence)");

  auto fam = [&](CLI::App* s) {
    s->add_option("--family", c.family, "mary | fbbst | quadtree")->check(CLI::IsMember({"mary", "fbbst", "quadtree"}));
    s->add_option("--param", c.param, "m, t or d");
  };
  auto out = [&](CLI::App* s) { s->add_option("-o,--output", c.output, "output file (default stdout)"); };
  auto cplus = [&](CLI::App* s) {
    s->add_option("--c-plus-re", c.c_plus_re, "real part of the quadtree constant c+");
    s->add_option("--c-plus-im", c.c_plus_im, "imaginary part of c+");
  };

  auto* roots = app.add_subcommand("roots", "indicial roots, alpha, beta and regime (JSON)");
  fam(roots), out(roots);
  roots->add_option("--precision", c.precision, "polishing precision in bits (128, 256, 512)");

  auto* talpha = app.add_subcommand("table-alpha", "alpha and beta for a range of m (CSV)");
  talpha->add_option("--from", c.from), talpha->add_option("--to", c.to), out(talpha);

  auto* tc2 = app.add_subcommand("table-c2", "c2 - phi c1 as exact rationals (CSV)");
  tc2->add_option("--from", c.from), tc2->add_option("--to", c.to), out(tc2);

  auto* cons = app.add_subcommand("constants", "asymptotic constants (JSON)");
  fam(cons), cplus(cons), out(cons);

  auto* mom = app.add_subcommand("moments", "exact or floating moment table (CSV)");
  fam(mom), out(mom);
  mom->add_option("--nmax", c.nmax);
  mom->add_option("--mode", c.mode, "exact | float")->check(CLI::IsMember({"exact", "float"}));
  mom->add_flag("--allow-large", c.allow_large, "lift the size caps");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo statistics (JSON) or a correlation profile (CSV)");
  fam(sim), cplus(sim), out(sim);
  auto* n_opt = sim->add_option("--n", c.n, "number of keys");
  auto* g_opt = sim->add_option("--grid", c.grid, "comma-separated n values; emits a profile CSV");
  n_opt->excludes(g_opt);
  sim->add_option("--reps", c.reps);
  sim->add_option("--seed", c.seed);
  sim->add_option("--threads", c.threads)->check(CLI::Range(1, 256));
  sim->add_option("--method", c.method, "recursion | tree")->check(CLI::IsMember({"recursion", "tree"}));

  auto* fp = app.add_subcommand("fixpoint", "population dynamics for the limit maps");
  fp->add_option("--map", c.map)->check(CLI::IsMember({"uniK", "TN_periodic", "TNprime_normal", "Tmed_periodic",
                                                       "Tmed_normal", "Tquad_periodic", "Tquad_normal"}));
  fp->add_option("--param", c.param);
  fp->add_option("--pool", c.pool);
  fp->add_option("--gens", c.gens);
  fp->add_option("--seed", c.seed);
  fp->add_option("--threads", c.threads)->check(CLI::Range(1, 256));
  fp->add_option("--toll", c.toll, "uniK toll: K or N")->check(CLI::IsMember({"K", "N"}));
  fp->add_flag("--iterate-normal", c.iterate_normal, "iterate the normal slot instead of sampling it");
  fp->add_option("--samples", c.samples, "also write the final pool as CSV to this file");
  fp->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  cplus(fp), out(fp);

  auto* per = app.add_subcommand("periodic", "periodic factor on a grid over one period of 2pi (CSV)");
  per->add_option("--kind", c.kind, "F1 F2 Frho G1 G2 P1 P2")
      ->check(CLI::IsMember({"F1", "F2", "Frho", "G1", "G2", "P1", "P2"}));
  per->add_option("--param", c.param);
  per->add_option("--points", c.points);
  per->add_flag("--printed", c.printed, "use the uncorrected formulas");
  cplus(per), out(per);

  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  ver->add_flag("--quick", c.quick, "smaller Monte Carlo budgets");
  ver->add_option("--threads", c.threads)->check(CLI::Range(1, 256));
  out(ver);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // pull --config out before the real parse so it may appear anywhere and its entries can be spliced in
    for (std::size_t i = 0; i < args.size();) {
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
        config_file = args[i + 1];
        args.erase(args.begin() + i, args.begin() + i + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        config_file = args[i].substr(9);
        args.erase(args.begin() + i);
      } else {
        ++i;
      }
    }
    if (!config_file.empty()) {
      const auto extra = config_args(config_file, args);
      const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
      std::size_t at = 0;
      auto is_sub = [&](const std::string& a) {
        for (const auto* sc : subs)
          if (sc->get_name() == a) return true;
        return false;
      };
      while (at < args.size() && !is_sub(args[at])) ++at;
      if (at < args.size()) args.insert(args.begin() + at + 1, extra.begin(), extra.end());
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const std::string sub = app.get_subcommands().front()->get_name();
  int rc = kOk;
  try {
    if (sub == "roots") {
      char* j = nullptr;
      if (c.family == "quadtree") {
        check(mst_quadtree_exponents_json(c.param, &j));
      } else {
        mst_spectrum* s = nullptr;
        check(mst_spectrum_solve(family_code(c.family), c.param, c.precision, &s));
        const mst_status st = mst_spectrum_json(s, &j);
        mst_spectrum_free(s);
        check(st);
      }
      emit(c, wrap_json(sub, c, take(j), "spectrum"));
    } else if (sub == "table-alpha" || sub == "table-c2") {
      char* s = nullptr;
      check(sub == "table-alpha" ? mst_table_alpha_csv(c.from, c.to, &s) : mst_table_c2_csv(c.from, c.to, &s));
      emit(c, csv_header(sub, c) + take(s));
    } else if (sub == "constants") {
      char* s = nullptr;
      check(mst_constants_json(family_code(c.family), c.param, c.c_plus_re, c.c_plus_im, &s));
      emit(c, wrap_json(sub, c, take(s), "constants"));
    } else if (sub == "moments") {
      mst_table* t = nullptr;
      check(mst_table_compute(family_code(c.family), c.param, c.nmax, c.mode == "exact" ? 0 : 1, c.allow_large, &t));
      char* s = nullptr;
      double canc = 0;
      int warn = 0;
      mst_table_diagnostics(t, &canc, &warn);
      const mst_status st = mst_table_csv(t, &s);
      mst_table_free(t);
      check(st);
      std::ostringstream diag;
      diag.precision(3);
      if (c.mode == "float") {
        diag << "# cancellation=" << canc << "\n";
        if (warn) std::cerr << "warning: float table lost precision (cancellation " << canc << ")\n";
      }
      emit(c, csv_header(sub, c) + diag.str() + take(s));
    } else if (sub == "simulate") {
      const int f = family_code(c.family);
      if (!c.grid.empty()) {
        const auto g = parse_grid(c.grid);
        char* s = nullptr;
        check(mst_corr_profile_csv(f, c.param, g.data(), g.size(), c.reps, c.seed, c.threads, c.c_plus_re,
                                   c.c_plus_im, &s));
        emit(c, csv_header(sub, c) + take(s));
      } else {
        mst_simstats* st = nullptr;
        check(mst_simulate(f, c.param, c.n, c.reps, c.seed, c.threads, c.method == "tree", &st));
        char* s = nullptr;
        const mst_status r = mst_simstats_json(st, &s);
        mst_simstats_free(st);
        check(r);
        emit(c, wrap_json(sub, c, take(s), "stats"));
      }
    } else if (sub == "fixpoint") {
      mst_fixpoint_config fc;
      mst_fixpoint_config_default(&fc);
      fc.map = c.map.c_str(), fc.param = c.param, fc.toll_n = c.toll == "N", fc.iterate_normal = c.iterate_normal;
      fc.c_plus_re = c.c_plus_re, fc.c_plus_im = c.c_plus_im;
      fc.pool_size = c.pool, fc.generations = c.gens, fc.seed = c.seed, fc.threads = c.threads;
      mst_pool* p = nullptr;
      check(mst_fixpoint_run(&fc, &p));
      char *tr = nullptr, *dg = nullptr, *sm = nullptr;
      mst_status st = mst_pool_trace_csv(p, &tr);
      if (st == MST_OK) st = mst_pool_diagnostics_json(p, &dg);
      if (st == MST_OK && !c.samples.empty()) st = mst_pool_samples_csv(p, &sm);
      mst_pool_free(p);
      const std::string trace = take(tr), diag = take(dg), samples = take(sm);
      check(st);
      if (!c.samples.empty()) {
        std::ofstream f(c.samples, std::ios::binary);
        if (!f) throw CallError{MST_INVALID_ARGUMENT, "cannot open samples file " + c.samples};
        f << samples;
      }
      if (c.format == "json") {
        json j;
        j["meta"] = meta(sub, c);
        json rows = json::array();
        std::istringstream is(trace);
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
          json row = json::array();
          std::stringstream ls(line);
          std::string cell;
          while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
          rows.push_back(row);
        }
        j["trace_columns"] = {"generation", "mean_x", "var_x", "mean_re_w", "mean_im_w", "var_w", "cov"};
        j["trace"] = rows;
        j["diagnostics"] = json::parse(diag);
        emit(c, j.dump(2) + "\n");
      } else {
        emit(c, csv_header(sub, c) + trace + "# diagnostics=" + json::parse(diag).dump() + "\n");
      }
    } else if (sub == "periodic") {
      char* s = nullptr;
      check(mst_periodic_csv(c.kind.c_str(), c.param, c.printed, c.c_plus_re, c.c_plus_im, c.points, &s));
      emit(c, csv_header(sub, c) + take(s));
    } else if (sub == "verify") {
      char* rep = nullptr;
      int bad = 0, xf = 0;
      const std::string self = self_path(argv[0]);
      check(mst_verify(c.quick, c.threads, self.c_str(), &rep, &bad, &xf));
      std::string text = take(rep);
      text += "summary: " + std::to_string(bad) + " unexpected failure(s), " + std::to_string(xf) +
              " expected failure(s)\n";
      emit(c, csv_header(sub, c) + text);
      if (bad + xf > 0) rc = kAcceptance;
    }
  } catch (const CallError& e) {
    std::cerr << "error: " << e.message << "\n";
    switch (e.status) {
      case MST_INVALID_ARGUMENT: return kUsage;
      case MST_REGIME: return kRegime;
      default: return kInternal;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "# wall-time=%.3fs\n", secs);
  return rc;
}
