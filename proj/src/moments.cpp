#include "moments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "error.hpp"

namespace mst {

const char* mode_name(Mode m) { return m == Mode::exact_rational ? "exact" : "float"; }

Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::exact_rational;
  if (s == "float") return Mode::float64;
  fail(Status::invalid_argument, "mode must be 'exact' or 'float'");
}

namespace {

double absd(double x) { return std::fabs(x); }

mpz_class binom(long n, long k) {
  mpz_class r;
  if (k < 0 || n < 0 || k > n) return 0;
  mpz_bin_uiui(r.get_mpz_t(), (unsigned long)n, (unsigned long)k);
  return r;
}

mpq_class ratio(const mpz_class& a, const mpz_class& b) {
  mpq_class q(a, b);
  q.canonicalize();
  return q;
}

template <class T>
T from_q(const mpq_class& q);
template <>
double from_q<double>(const mpq_class& q) { return q.get_d(); }
template <>
mpq_class from_q<mpq_class>(const mpq_class& q) { return q; }

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b, std::size_t len) {
  T s = 0;
  for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
  return s;
}

mpq_class phi_q(int m) {
  mpq_class h = harmonic(m) - 1;
  mpq_class r = 1 / (2 * h);
  r.canonicalize();
  return r;
}

void check_nmax(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt) {
  validate(inst);
  if (n_max < 1) fail(Status::invalid_argument, "n_max must be positive");
  if (inst.family == Family::mary && n_max < inst.param)
    fail(Status::invalid_argument, "n_max must be at least m");
  if (opt.allow_large) return;
  const int cap = mode == Mode::exact_rational ? kExactCap : kFloatCap;
  if (n_max > cap)
    fail(Status::budget, std::string(mode_name(mode)) + " mode is capped at n_max = " + std::to_string(cap));
}

// m-ary search trees: mean recurrences plus the centred-toll route for second moments.
template <class T>
struct MaryBuilder {
  int m, n_max;
  bool second;
  MomentRows<T> r;
  double cancellation = 0.0;

  void run() {
    r.resize(n_max + 1);
    const T phi = from_q<T>(phi_q(m));
    for (int n = 1; n <= std::min(m - 2, n_max); ++n) r.mu[n] = 1;

    std::vector<std::vector<T>> pis(n_max + 1);
    for (int n = m - 1; n <= n_max; ++n) {
      const int J = n - m + 1;
      std::vector<T>& pi = pis[n];
      pi.resize(J + 1);
      pi[0] = T(m - 1) / T(n);
      for (int j = 0; j < J; ++j) pi[j + 1] = pi[j] * T(n - m + 1 - j) / T(n - 1 - j);
      r.mu[n] = T(m) * dot(pi, r.mu, J + 1) + 1;
      r.kappa[n] = T(m) * dot(pi, r.kappa, J + 1) + J;
      r.nu[n] = T(m) * dot(pi, r.nu, J + 1) + r.mu[n] - 1;
    }
    if (!second) return;

    // Shifted summands: Σ_r (j_r + 1) = n + 1 so the affine shift leaves the centred tolls unchanged.
    std::array<std::vector<T>, 3> f;
    for (auto& v : f) v.resize(n_max + 1);
    for (int j = 0; j <= n_max; ++j) {
      T sh = phi * T(j + 1);
      f[0][j] = r.mu[j] - sh;
      f[1][j] = r.kappa[j];
      f[2][j] = r.nu[j] + r.mu[j] - sh;
    }
    // conv[a][b][s] = Σ_{j+k=s} f_a(j) f_b(k), filled as s grows
    std::array<std::array<std::vector<T>, 3>, 3> conv;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) conv[a][b].resize(n_max + 1);
    int conv_filled = -1;
    std::vector<T> w;
    const double eps = std::numeric_limits<double>::epsilon();

    for (int n = m - 1; n <= n_max; ++n) {
      const int J = n - m + 1;
      const std::vector<T>& pi = pis[n];
      while (conv_filled < J) {
        const int s = ++conv_filled;
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b) {
            T acc = 0;
            for (int j = 0; j <= s; ++j) acc += f[a][j] * f[b][s - j];
            conv[a][b][s] = acc;
          }
      }
      w.assign(J + 1, T(0));
      if (m >= 3 && n >= 2) {
        w[0] = T((m - 1) * (m - 2)) / T(n * (n - 1));
        for (int s = 0; s < J; ++s) w[s + 1] = w[s] * T(n - m + 1 - s) / T(n - 2 - s);
      }
      const std::array<T, 3> cst = {T(1) - r.mu[n] + phi * T(n + 1), T(J) - r.kappa[n],
                                    -r.nu[n] + phi * T(n + 1)};
      std::array<T, 3> single;
      for (int a = 0; a < 3; ++a) single[a] = T(m) * dot(pi, f[a], J + 1);
      double mag[3][3] = {};  // summand magnitude per toll
      auto E = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        T diag = 0;
        for (int j = 0; j <= J; ++j) diag += pi[j] * f[a][j] * f[b][j];
        T pair = dot(w, conv[a][b], J + 1);
        T sab = T(m) * diag + T(m) * T(m - 1) * pair;
        T out = cst[a] * cst[b] + cst[a] * single[b] + cst[b] * single[a] + sab;
        if constexpr (std::is_same_v<T, double>)
          mag[a][b] = absd(cst[a] * cst[b]) + absd(cst[a] * single[b]) + absd(cst[b] * single[a]) + absd(sab);
        return out;
      };
      auto rec = [&](const std::vector<T>& V, const T& b) { return T(T(m) * dot(pi, V, J + 1) + b); };
      const T emm = E(0, 0), emk = E(0, 1), ekk = E(1, 1), emd = E(0, 2), edd = E(2, 2), ekd = E(1, 2);
      r.VS[n] = rec(r.VS, emm);
      r.VSK[n] = rec(r.VSK, emk);
      r.VK[n] = rec(r.VK, ekk);
      r.VSN[n] = rec(r.VSN, T(r.VS[n] + emd - emm));
      // E[(δ−Δ)²] − V^S + 2V^SN
      r.VN[n] = rec(r.VN, T(-r.VS[n] + 2 * r.VSN[n] + edd - 2 * emd + emm));
      r.VKN[n] = rec(r.VKN, T(r.VSK[n] + ekd - emk));
      // the first few m values are near-deterministic; their rows are tiny and absolutely exact enough
      if constexpr (std::is_same_v<T, double>) if (n >= 4 * m) {
        if (r.VS[n] > 0) cancellation = std::max(cancellation, eps * mag[0][0] / r.VS[n]);
        if (r.VK[n] > 0) cancellation = std::max(cancellation, eps * mag[1][1] / r.VK[n]);
        if (r.VN[n] > 0) cancellation = std::max(cancellation, eps * (mag[2][2] + 2 * mag[0][2] + mag[0][0]) / r.VN[n]);
      }
    }
  }
};

template <class T>
std::vector<T> fbbst_law(int n, int t) {
  // left size j ∈ [t, n−1−t]
  const int lo = t, hi = n - 1 - t;
  std::vector<T> p(n, T(0));
  if (hi < lo) return p;
  p[lo] = from_q<T>(ratio(binom(n - 1 - t, t), binom(n, 2 * t + 1)));
  for (int j = lo; j < hi; ++j) p[j + 1] = p[j] * T(j + 1) * T(n - 1 - j - t) / (T(j + 1 - t) * T(n - 1 - j));
  return p;
}

template <class T>
MomentRows<T> fbbst_rows(int t, int n_max, bool second) {
  MomentRows<T> r;
  r.resize(n_max + 1);
  // mu ← 𝒮, kappa ← 𝒳
  for (int n = 2 * t + 1; n <= n_max; ++n) {
    const std::vector<T> p = fbbst_law<T>(n, t);
    T s = 0, x = 0;
    for (int j = t; j <= n - 1 - t; ++j) s += p[j] * r.mu[j], x += p[j] * r.kappa[j];
    r.mu[n] = 2 * s + 1;
    r.kappa[n] = 2 * x + T(n - 1);
    if (!second) continue;
    T vs = 0, vk = 0, vsk = 0;
    for (int j = t; j <= n - 1 - t; ++j) {
      const int k = n - 1 - j;
      T ds = r.mu[j] + r.mu[k] + 1 - r.mu[n];
      T dx = r.kappa[j] + r.kappa[k] + T(n - 1) - r.kappa[n];
      vs += p[j] * (2 * r.VS[j] + ds * ds);
      vk += p[j] * (2 * r.VK[j] + dx * dx);
      vsk += p[j] * (2 * r.VSK[j] + ds * dx);
    }
    r.VS[n] = vs, r.VK[n] = vk, r.VSK[n] = vsk;
  }
  r.nu = r.kappa;
  r.VSN = r.VSK;
  r.VN = r.VK;
  r.VKN = r.VK;
  return r;
}

// π^{(d)}_{n,·} for all n ≤ n_max via π^{(d)}_{n,j} = (1/n) Σ_{k=j+1}^{n} π^{(d−1)}_{k,j}.
template <class T>
std::vector<std::vector<T>> quad_marginals(int d, int n_max) {
  std::vector<std::vector<T>> out(n_max + 1);
  std::vector<std::vector<T>> cum(d, std::vector<T>(n_max + 1, T(0)));  // running Σ_k π^{(level)}_{k,j}
  for (int n = 1; n <= n_max; ++n) {
    std::vector<T> cur(n, T(1) / T(n));  // level 1
    for (int lvl = 1; lvl < d; ++lvl) {
      for (int j = 0; j < n; ++j) cum[lvl - 1][j] += cur[j];
      std::vector<T> nxt(n);
      for (int j = 0; j < n; ++j) nxt[j] = cum[lvl - 1][j] / T(n);
      cur.swap(nxt);
    }
    out[n] = std::move(cur);
  }
  return out;
}

template <class T>
struct BetaTable {
  std::vector<std::vector<T>> c;  // binomials
  explicit BetaTable(int n) : c(n + 1) {
    for (int i = 0; i <= n; ++i) {
      c[i].resize(i + 1);
      c[i][0] = c[i][i] = 1;
      for (int k = 1; k < i; ++k) c[i][k] = c[i - 1][k - 1] + c[i - 1][k];
    }
  }
  // ∫ x^p (1−x)^q dx
  T beta(int p, int q) const { return T(1) / (T(p + q + 1) * c[p + q][p]); }
};

// Joint law of (J_r, J_s) for two quadrants differing in h of d coordinates, n−1 free points.
template <class T>
std::vector<std::vector<T>> quad_pair(int n, int d, int h, const BetaTable<T>& bt) {
  const int c0 = n - 1;
  std::vector<T> single(c0 + 1, T(0));
  single[c0] = 1;
  for (int step = 0; step < d - h; ++step) {
    std::vector<T> nx(c0 + 1, T(0));
    for (int c = 0; c <= c0; ++c) {
      if (single[c] == 0) continue;
      T u = single[c] / T(c + 1);
      for (int k = 0; k <= c; ++k) nx[k] += u;
    }
    single.swap(nx);
  }
  std::vector<std::vector<T>> P(c0 + 1, std::vector<T>(c0 + 1, T(0)));
  for (int c = 0; c <= c0; ++c) {
    if (single[c] == 0) continue;
    T u = single[c] / T(c + 1);
    for (int a = 0; a <= c; ++a) P[a][c - a] += u;
  }
  for (int step = 1; step < h; ++step) {
    std::vector<std::vector<T>> Q(c0 + 1, std::vector<T>(c0 + 1, T(0)));
    for (int A = 0; A <= c0; ++A)
      for (int B = 0; A + B <= c0; ++B) {
        if (P[A][B] == 0) continue;
        for (int a = 0; a <= A; ++a)
          for (int b = 0; b <= B; ++b)
            Q[a][b] += P[A][B] * bt.c[A][a] * bt.c[B][b] * bt.beta(a + B - b, A - a + b);
      }
    P.swap(Q);
  }
  return P;
}

template <class T>
MomentRows<T> quad_rows(int d, int n_max, bool second) {
  MomentRows<T> r;
  r.resize(n_max + 1);
  const auto pim = quad_marginals<T>(d, n_max);
  const int q = 1 << d;
  if (n_max >= 1) r.mu[1] = 1;
  for (int n = 2; n <= n_max; ++n) {
    const auto& pi = pim[n];
    r.mu[n] = T(q) * dot(pi, r.mu, n);
    r.kappa[n] = T(q) * dot(pi, r.kappa, n) + T(n - 1);
  }
  if (second) {
    BetaTable<T> bt(n_max);
    std::vector<mpz_class> types(d + 1);
    for (int h = 0; h <= d; ++h) types[h] = binom(d, h) * q;  // ordered pairs at distance h
    for (int n = 2; n <= n_max; ++n) {
      const auto& pi = pim[n];
      T vs = T(q) * dot(pi, r.VS, n), vk = T(q) * dot(pi, r.VK, n), vsk = T(q) * dot(pi, r.VSK, n);
      T ell = T(q) * dot(pi, r.mu, n), xi = T(q) * dot(pi, r.kappa, n);
      T ll = 0, xx = 0, lx = 0;
      for (int j = 0; j < n; ++j) {
        ll += pi[j] * r.mu[j] * r.mu[j];
        xx += pi[j] * r.kappa[j] * r.kappa[j];
        lx += pi[j] * r.mu[j] * r.kappa[j];
      }
      ll *= T(q), xx *= T(q), lx *= T(q);
      for (int h = 1; h <= d; ++h) {
        const auto P = quad_pair<T>(n, d, h, bt);
        T sll = 0, sxx = 0, slx = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; a + b < n; ++b) {
            if (P[a][b] == 0) continue;
            sll += P[a][b] * r.mu[a] * r.mu[b];
            sxx += P[a][b] * r.kappa[a] * r.kappa[b];
            slx += P[a][b] * r.mu[a] * r.kappa[b];
          }
        T wt = from_q<T>(mpq_class(types[h]));
        ll += wt * sll, xx += wt * sxx, lx += wt * slx;
      }
      r.VS[n] = vs + ll - ell * ell;
      r.VK[n] = vk + xx - xi * xi;
      r.VSK[n] = vsk + lx - ell * xi;
    }
  }
  r.nu = r.kappa;
  r.VSN = r.VSK;
  r.VN = r.VK;
  r.VKN = r.VK;
  return r;
}

template <class T>
MomentRows<T> build_rows(const FamilyInstance& inst, int n_max, bool second, double* cancellation) {
  switch (inst.family) {
    case Family::mary: {
      MaryBuilder<T> b{inst.param, n_max, second, {}, 0.0};
      b.run();
      if (cancellation) *cancellation = b.cancellation;
      return std::move(b.r);
    }
    case Family::fbbst: return fbbst_rows<T>(inst.param, n_max, second);
    case Family::quadtree: return quad_rows<T>(inst.param, n_max, second);
  }
  fail(Status::internal, "unknown family");
}

MomentTable make_table(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt, bool second) {
  check_nmax(inst, n_max, mode, opt);
  if (second && inst.family == Family::quadtree && n_max > opt.pair_cap)
    fail(Status::budget, "quadtree second moments use an O(n^5) pair-law DP; n_max is capped at " +
                             std::to_string(opt.pair_cap) + " (raise the pair cap to override)");
  MomentTable t;
  t.instance = inst;
  t.n_max = n_max;
  t.mode = mode;
  if (mode == Mode::exact_rational) {
    t.q = build_rows<mpq_class>(inst, n_max, second, nullptr);
  } else {
    t.f = build_rows<double>(inst, n_max, second, &t.cancellation);
    t.precision_warning = t.cancellation > 1e-8;
  }
  return t;
}

template <class T>
const std::vector<T>& row_of(const MomentRows<T>& r, const std::string& name) {
  if (name == "mu") return r.mu;
  if (name == "kappa") return r.kappa;
  if (name == "nu") return r.nu;
  if (name == "VS") return r.VS;
  if (name == "VSK") return r.VSK;
  if (name == "VK") return r.VK;
  if (name == "VSN") return r.VSN;
  if (name == "VN") return r.VN;
  if (name == "VKN") return r.VKN;
  fail(Status::invalid_argument, "unknown moment row '" + name + "'");
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_q(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace

template <class T>
void MomentRows<T>::resize(std::size_t n) {
  for (auto* v : {&mu, &kappa, &nu, &VS, &VSK, &VK, &VSN, &VN, &VKN}) v->assign(n, T(0));
}
template struct MomentRows<double>;
template struct MomentRows<mpq_class>;

mpq_class SplitWeights::pi2(int j, int k) const {
  if (j < 0 || k < 0 || j + k >= (int)pair_by_sum.size()) return 0;
  return pair_by_sum[j + k];
}

SplitWeights split_weights(int n, int m) {
  if (m < 3) fail(Status::invalid_argument, "split weights need m >= 3");
  if (n < m - 1) fail(Status::invalid_argument, "split weights need n >= m-1");
  SplitWeights w;
  w.n = n, w.m = m;
  const mpz_class total = binom(n, m - 1);
  for (int j = 0; j <= n - m + 1; ++j) {
    w.pi.push_back(ratio(binom(n - 1 - j, m - 2), total));
    w.pair_by_sum.push_back(ratio(binom(n - 2 - j, m - 3), total));
  }
  return w;
}

const std::vector<std::string>& moment_row_names() {
  static const std::vector<std::string> names = {"mu", "kappa", "nu", "VS", "VSK", "VK", "VSN", "VN", "VKN"};
  return names;
}

MomentTable mean_tables(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt) {
  return make_table(inst, n_max, mode, opt, false);
}

MomentTable moment_table(const FamilyInstance& inst, int n_max, Mode mode, const TableOptions& opt) {
  return make_table(inst, n_max, mode, opt, true);
}

double MomentTable::value(const std::string& row, int n) const {
  if (n < 0 || n > n_max) fail(Status::invalid_argument, "n outside the table");
  return mode == Mode::exact_rational ? row_of(q, row)[n].get_d() : row_of(f, row)[n];
}

std::string MomentTable::cell(const std::string& row, int n) const {
  if (n < 0 || n > n_max) fail(Status::invalid_argument, "n outside the table");
  return mode == Mode::exact_rational ? fmt_q(row_of(q, row)[n]) : fmt17(row_of(f, row)[n]);
}

std::string MomentTable::to_csv() const {
  std::ostringstream os;
  os << "n";
  for (const auto& r : moment_row_names()) os << ',' << r;
  os << '\n';
  for (int n = 0; n <= n_max; ++n) {
    os << n;
    for (const auto& r : moment_row_names()) os << ',' << cell(r, n);
    os << '\n';
  }
  return os.str();
}

RecurrenceResult generic_recurrence(const TollSpec& toll, int m, int n_max) {
  if (m < 3) fail(Status::invalid_argument, "m must be >= 3");
  if (n_max < m - 1) fail(Status::invalid_argument, "n_max must be at least m-1");
  if (!toll.initial.empty() && (int)toll.initial.size() != m - 1)
    fail(Status::invalid_argument, "initial segment must hold m-1 values");
  if (toll.kind == TollSpec::Kind::custom_sequence && (int)toll.sequence.size() < n_max + 1)
    fail(Status::invalid_argument, "toll sequence shorter than the requested horizon");
  if (toll.kind == TollSpec::Kind::linear_plus_tn && !toll.sequence.empty() &&
      (int)toll.sequence.size() < n_max + 1)
    fail(Status::invalid_argument, "t_n sequence shorter than the requested horizon");

  auto tn = [&](int n) {
    if (!toll.sequence.empty()) return toll.sequence[n];
    return toll.amp * std::pow(double(n), toll.power);
  };
  auto b = [&](int n) -> double {
    switch (toll.kind) {
      case TollSpec::Kind::constant_plus_decay: return toll.c + toll.amp * std::pow(double(n), -toll.eps);
      case TollSpec::Kind::linear_plus_tn: return double(n) + tn(n);
      case TollSpec::Kind::custom_sequence: return toll.sequence[n];
    }
    return 0.0;
  };

  RecurrenceResult out;
  out.a.assign(n_max + 1, 0.0);
  for (int n = 0; n < m - 1 && n <= n_max; ++n) out.a[n] = toll.initial.empty() ? 0.0 : toll.initial[n];
  std::vector<double> pi;
  for (int n = m - 1; n <= n_max; ++n) {
    const int J = n - m + 1;
    pi.assign(J + 1, 0.0);
    pi[0] = double(m - 1) / n;
    for (int j = 0; j < J; ++j) pi[j + 1] = pi[j] * double(n - m + 1 - j) / double(n - 1 - j);
    out.a[n] = m * dot(pi, out.a, J + 1) + b(n);
  }
  if (toll.kind == TollSpec::Kind::linear_plus_tn) {
    TransferCheck& tc = out.transfer;
    tc.applicable = true;
    for (int n = 1; n <= n_max; ++n) {
      const double term = std::fabs(tn(n)) / (double(n) * n);
      tc.partial_sum += term;
      if (n > n_max / 2) {
        tc.max_tn_over_n_tail = std::max(tc.max_tn_over_n_tail, std::fabs(tn(n)) / n);
        tc.tail_bound += term;
      }
    }
    // Compare the last octave with the one before it: |t_n|/n must still be falling
    // and so must the octave's share of Σ|t_n|/n², which stays flat for t_n ∝ n.
    double prev_ratio = 0.0, prev_octave = 0.0;
    for (int n = std::max(1, n_max / 4) + 1; n <= std::max(1, n_max / 2); ++n) {
      prev_ratio = std::max(prev_ratio, std::fabs(tn(n)) / n);
      prev_octave += std::fabs(tn(n)) / (double(n) * n);
    }
    auto falling = [](double top, double prev) { return prev == 0.0 ? top == 0.0 : top < prev * (1 - 1e-9); };
    tc.plausible = falling(tc.max_tn_over_n_tail, prev_ratio) && falling(tc.tail_bound, prev_octave);
  }
  return out;
}

TreeMeasures build_mary_tree(const std::vector<int>& perm, int m) {
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  struct Node {
    std::vector<int> keys;
    std::vector<int> child;
    int depth;
  };
  std::vector<Node> nodes;
  std::vector<char> seen(perm.size() + 2, 0);
  TreeMeasures out;
  for (int key : perm) {
    if (key < 1 || key > (int)perm.size() || seen[key]) fail(Status::invalid_argument, "input is not a permutation");
    seen[key] = 1;
    if (nodes.empty()) {
      nodes.push_back({{key}, {}, 0});
      out.S = 1;
      continue;
    }
    int cur = 0;
    for (;;) {
      Node& nd = nodes[cur];
      if ((int)nd.keys.size() < m - 1) {
        nd.keys.insert(std::upper_bound(nd.keys.begin(), nd.keys.end(), key), key);
        out.K += nd.depth;
        break;
      }
      if (nd.child.empty()) nd.child.assign(m, -1);
      const int slot = int(std::upper_bound(nd.keys.begin(), nd.keys.end(), key) - nd.keys.begin());
      if (nd.child[slot] < 0) {
        const int depth = nd.depth + 1;
        nodes[cur].child[slot] = (int)nodes.size();
        nodes.push_back({{key}, {}, depth});
        out.S += 1;
        out.N += depth;
        out.K += depth;
        break;
      }
      cur = nd.child[slot];
    }
  }
  return out;
}

OracleMoments permutation_oracle(int n, int m, int threads) {
  if (n > 9) fail(Status::budget, "permutation oracle refuses n > 9");
  if (n < 0) fail(Status::invalid_argument, "n must be non-negative");
  if (m < 2) fail(Status::invalid_argument, "m must be >= 2");
  // sums of S, K, N, S², SK, K², SN, N², KN
  using Sums = std::array<std::int64_t, 9>;
  const int blocks = std::max(n, 1);
  std::vector<Sums> part(blocks, Sums{});
  auto work = [&](int first) {
    Sums& acc = part[first];
    if (n == 0) return;
    std::vector<int> rest;
    for (int k = 1; k <= n; ++k)
      if (k != first + 1) rest.push_back(k);
    std::vector<int> perm(n);
    do {
      perm[0] = first + 1;
      std::copy(rest.begin(), rest.end(), perm.begin() + 1);
      const TreeMeasures t = build_mary_tree(perm, m);
      acc[0] += t.S, acc[1] += t.K, acc[2] += t.N;
      acc[3] += t.S * t.S, acc[4] += t.S * t.K, acc[5] += t.K * t.K;
      acc[6] += t.S * t.N, acc[7] += t.N * t.N, acc[8] += t.K * t.N;
    } while (std::next_permutation(rest.begin(), rest.end()));
  };
  threads = std::max(1, std::min(threads, blocks));
  if (threads == 1) {
    for (int b = 0; b < blocks; ++b) work(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int b = w; b < blocks; b += threads) work(b);
      });
    for (auto& th : pool) th.join();
  }
  Sums tot{};
  for (const auto& p : part)
    for (int i = 0; i < 9; ++i) tot[i] += p[i];
  mpz_class fact = 1;
  for (int k = 2; k <= n; ++k) fact *= k;
  auto E = [&](int i) {
    mpq_class q(mpz_class(std::to_string(tot[i])), fact);
    q.canonicalize();
    return q;
  };
  OracleMoments out;
  out.n = n, out.m = m;
  const mpq_class s = E(0), k = E(1), nn = E(2);
  out.values = {s, k, nn, E(3) - s * s, E(4) - s * k, E(5) - k * k, E(6) - s * nn, E(7) - nn * nn, E(8) - k * nn};
  return out;
}

std::vector<int> geometric_grid(int lo, int hi, int per_octave) {
  if (lo < 1 || hi < lo || per_octave < 1) fail(Status::invalid_argument, "bad grid bounds");
  std::vector<int> g;
  const double step = std::pow(2.0, 1.0 / per_octave);
  for (double x = lo; x <= hi * (1 + 1e-12); x *= step) {
    int v = (int)std::lround(x);
    if (g.empty() || v != g.back()) g.push_back(std::min(v, hi));
  }
  if (g.back() != hi) g.push_back(hi);
  return g;
}

GrowthFit growth_exponent(const std::vector<double>& values, const std::vector<int>& grid) {
  if (values.size() != grid.size() || grid.size() < 2) fail(Status::invalid_argument, "grid/value size mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(values[i] > 0))
      fail(Status::domain, "growth_exponent: non-positive entry at n = " + std::to_string(grid[i]));
  const std::size_t k = grid.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log(double(grid[i])), y = std::log(values[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  GrowthFit g;
  g.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  g.intercept = (sy - g.slope * sx) / k;
  double ss = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = std::log(values[i]) - g.intercept - g.slope * std::log(double(grid[i]));
    ss += e * e;
  }
  g.residual = std::sqrt(ss / k);
  return g;
}

namespace {

// relative residual of the best (a, b) at exponent s
double envelope_residual(const std::vector<double>& v, const std::vector<int>& grid, double beta, double s,
                         double* a_out, double* b_out) {
  double ccc = 0, css = 0, csn = 0, yc = 0, ys = 0, yy = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ln = std::log(double(grid[i]));
    const double y = v[i] * std::exp(-s * ln);
    const double c = std::cos(beta * ln), sn = std::sin(beta * ln);
    ccc += c * c, css += sn * sn, csn += c * sn, yc += y * c, ys += y * sn, yy += y * y;
  }
  const double det = ccc * css - csn * csn;
  const double a = (yc * css - ys * csn) / det;
  const double b = (ys * ccc - yc * csn) / det;
  if (a_out) *a_out = a, *b_out = b;
  const double rss = yy - a * yc - b * ys;
  return std::sqrt(std::max(rss, 0.0) / yy);
}

}  // namespace

GrowthFit growth_exponent_periodic(const std::vector<double>& values, const std::vector<int>& grid, double beta) {
  if (values.size() != grid.size() || grid.size() < 4) fail(Status::invalid_argument, "envelope fit needs >= 4 points");
  if (!(beta > 0)) fail(Status::regime, "envelope fit needs a non-real second root (beta > 0)");
  // golden-section search on s
  double lo = -1.0, hi = 3.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = envelope_residual(values, grid, beta, x1, nullptr, nullptr);
  double f2 = envelope_residual(values, grid, beta, x2, nullptr, nullptr);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = envelope_residual(values, grid, beta, x1, nullptr, nullptr);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = envelope_residual(values, grid, beta, x2, nullptr, nullptr);
    }
  }
  GrowthFit g;
  g.envelope = true;
  g.slope = 0.5 * (lo + hi);
  double a = 0, b = 0;
  g.residual = envelope_residual(values, grid, beta, g.slope, &a, &b);
  g.amplitude = std::hypot(a, b);
  g.intercept = std::log(g.amplitude);
  return g;
}

mpq_class fbbst_split_prob(int n, int t, int j) {
  if (j < t || j > n - 1 - t) return 0;
  return ratio(binom(j, t) * binom(n - 1 - j, t), binom(n, 2 * t + 1));
}

mpq_class fbbst_printed_law_total(int n, int t) {
  mpq_class s = 0;
  for (int j = t; j <= n - 1 - t; ++j) s += ratio(binom(j - 1, t) * binom(n - j, t), binom(n, 2 * t + 1));
  return s;
}

std::vector<mpq_class> quadtree_marginal(int n, int d) {
  if (n < 1 || d < 1) fail(Status::invalid_argument, "quadtree law needs n >= 1, d >= 1");
  return quad_marginals<mpq_class>(d, n)[n];
}

std::vector<std::vector<mpq_class>> quadtree_pair_law(int n, int d, int h) {
  if (n < 1 || d < 1 || h < 1 || h > d) fail(Status::invalid_argument, "pair law needs 1 <= h <= d");
  BetaTable<mpq_class> bt(n);
  return quad_pair<mpq_class>(n, d, h, bt);
}

}  // namespace mst
