/// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "affvortex/moduli.hpp"
#include "affvortex/qkirwan.hpp"
#include "affvortex/radial_oracle.hpp"
#include "affvortex/vortex.hpp"

using namespace affvortex;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const PolarGrid> default_grid(const NPair& pair) { return std::make_shared<PolarGrid>(default_grid_for(pair)); }

double sup_diff(const ScalarField& a, const ScalarField& b, real shift = 0.0L) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i) m = std::max(m, static_cast<double>(std::fabs(a[i] - b[i] - shift)));
  return m;
}

CPoly monomial(int d) {
  std::vector<cplx> c(static_cast<std::size_t>(d) + 1, 0.0);
  c.back() = 1.0;
  return CPoly(c);
}

/// N = 2 pair of degree between 1 and max_degree, all roots in |z| <= 1.
NPair random_pair(std::mt19937& rng, int max_degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, max_degree);
  for (;;) {
    std::vector<CPoly> polys;
    for (int j = 0; j < 2; ++j) {
      std::vector<cplx> roots;
      for (int i = deg(rng); i > 0; --i) {
        cplx r(u(rng), u(rng));
        if (std::abs(r) > 1.0) r /= std::abs(r);
        roots.push_back(r);
      }
      polys.push_back(CPoly::from_roots(roots, cplx(1.0 + 0.5 * u(rng), 0.5 * u(rng))));
    }
    NPair p(polys);
    if (p.d() >= 1) return p;
  }
}

std::vector<NPair> random_pairs(unsigned seed, int max_degree) {
  std::mt19937 rng(seed);
  std::vector<NPair> out;
  for (int i = 0; i < 5; ++i) out.push_back(random_pair(rng, max_degree));
  return out;
}

Verdict oracle_equivalence() {
  double worst = 0.0, slowest = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const NPair pair{monomial(d)};
    auto g = default_grid(pair);
    const auto t0 = std::chrono::steady_clock::now();
    const ScalarField h = solve_kw(pair, g);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const RadialProfile prof = radial_oracle(d, g->radius());
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
      const double r = g->r(g->ring_of(idx));
      if (r <= g->radius() / 2.0) worst = std::max(worst, std::fabs(static_cast<double>(h[idx]) - prof.value(r)));
    }
  }
  return {worst < 1e-4 && slowest <= 60.0, fmt("sup |h - oracle| on r <= R/2 = %.3e (tol 1e-4), slowest solve %.2f s (limit 60 s)", worst, slowest)};
}

Verdict energy_quantization() {
  const CPoly one{1.0};
  double worst_rel = 0.0, worst_zero = 0.0, worst_lin = 0.0;
  for (int n = 1; n <= 2; ++n) {
    std::vector<double> e;
    for (int d = 0; d <= 3; ++d) {
      const NPair pair = n == 1 ? NPair{monomial(d)} : NPair{monomial(d), one};
      e.push_back(total_energy(VortexSolution::solve(pair, default_grid(pair))));
    }
    worst_zero = std::max(worst_zero, std::fabs(e[0]));
    for (int d = 1; d <= 3; ++d) {
      worst_rel = std::max(worst_rel, std::fabs(e[static_cast<std::size_t>(d)] / (kTwoPi * d) - 1.0));
      worst_lin = std::max(worst_lin, std::fabs(e[static_cast<std::size_t>(d)] / e[1] / d - 1.0));
    }
  }
  // For d = 0 the 1% relative band degenerates; it is read as 1% of 2*pi.
  return {worst_rel < 0.01 && worst_zero < 0.01 * kTwoPi && worst_lin < 0.005,
          fmt("max |E/(2 pi d) - 1| = %.3e (tol 1e-2), |E(d=0)| = %.3e, max |E(d)/(d E(1)) - 1| = %.3e (tol 5e-3)", worst_rel,
              worst_zero, worst_lin)};
}

Verdict uniqueness() {
  double worst = 0.0;
  for (const NPair& pair : random_pairs(301, 2)) {
    auto g = default_grid(pair);
    const ScalarField a = solve_kw(pair, g, {}, InitialGuess::LogWeightPlusOne);
    const ScalarField b = solve_kw(pair, g, {}, InitialGuess::BoundaryExtension);
    worst = std::max(worst, sup_diff(a, b));
  }
  return {worst < 1e-8, fmt("max sup |h_a - h_b| over 5 pairs = %.3e (tol 1e-8)", worst)};
}

Verdict decay() {
  double worst = -INFINITY;
  for (const NPair& pair : random_pairs(401, 3)) {
    const auto br = energy_breakdown(VortexSolution::solve(pair, default_grid(pair)));
    worst = std::max(worst, br.decay_slope ? *br.decay_slope : INFINITY);
  }
  return {worst <= -3.5, fmt("max fitted slope on [R/4, R/2] over 5 pairs = %.3f (bound -3.5)", worst)};
}

Verdict symmetries() {
  std::mt19937 rng(503);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double cstar = 0.0, shift = 0.0, overlap = 0.0;
  for (const NPair& pair : random_pairs(501, 2)) {
    const double R = default_grid_for(pair).radius();
    auto g = default_grid(pair);
    const ScalarField h = solve_kw(pair, g);

    const cplx c(2.0 * u(rng), 2.0 * u(rng));
    cstar = std::max(cstar, sup_diff(solve_kw(pair.scaled(c), g), h, std::log(std::abs(c))));

    const cplx a(u(rng), u(rng));
    auto ga = std::make_shared<PolarGrid>(R, g->n_r(), g->n_theta(), g->gamma(), a);
    const ScalarField ha = solve_kw(pair.translated(a), ga);
    shift = std::max(shift, sup_diff(h, ha));
    // The translated pair on the original grid against h(z - a), on the
    // overlap |z|, |z - a| <= R/2 away from both boundaries.
    const ScalarField ht = solve_kw(pair.translated(a), g);
    for (std::size_t idx = 0; idx < g->size(); ++idx) {
      const cplx z = g->point(idx);
      if (std::abs(z) <= R / 2.0 && std::abs(z - a) <= R / 2.0)
        overlap = std::max(overlap, std::fabs(static_cast<double>(ht[idx]) - interpolate(h, z - a)));
    }
  }
  return {cstar < 1e-8 && shift < 1e-4 && overlap < 1e-4,
          fmt("C* shift %.3e (tol 1e-8); translation on re-centred grid %.3e, same grid on the R/2 overlap %.3e (tol 1e-4)",
              cstar, shift, overlap)};
}

Verdict bogomolny() {
  const NPair pair{CPoly{0.3, -0.5, 1.0}, CPoly{0.2, 0.7}};
  const double R = default_grid_for(pair).radius();
  constexpr int n_r = 64, n_theta = 32;
  std::vector<double> sup, l2;
  for (int f : {1, 2, 4}) {
    auto g = std::make_shared<PolarGrid>(R, n_r * f, n_theta * f);
    const VortexSolution sol = VortexSolution::solve(pair, g);
    const PolarGrid coarse(R, n_r, n_theta);
    double m = 0.0, s = 0.0;
    for (int i = 0; i < n_r; ++i)
      for (int k = 0; k < (i == 0 ? 1 : n_theta); ++k) {
        const double e = bogomolny_defect(sol, g->index(f * i, f * k));
        m = std::max(m, std::fabs(e));
        s += coarse.node_area(i) * e * e;
      }
    sup.push_back(m);
    l2.push_back(std::sqrt(s));
  }
  double order = INFINITY;
  std::string orders;
  for (std::size_t l = 0; l + 1 < sup.size(); ++l) {
    const double os = std::log2(sup[l] / sup[l + 1]), o2 = std::log2(l2[l] / l2[l + 1]);
    order = std::min({order, os, o2});
    orders += fmt(" sup %.2f / L2 %.2f;", os, o2);
  }
  return {order >= 1.8, fmt("defect orders at 64->128->256 rings:%s min %.2f (bound 1.8)", orders.c_str(), order)};
}

std::vector<cplx> random_vector(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  std::vector<cplx> x;
  for (int j = 0; j < n; ++j) x.emplace_back(g(rng), g(rng));
  return x;
}

std::vector<cplx> normalized(std::vector<cplx> x) {
  const double s = detail::norm2(x);
  for (auto& c : x) c /= s;
  return x;
}

Verdict moduli_arithmetic() {
  int mismatches = 0, checked = 0;
  for (int n = 2; n <= 8; ++n)
    for (int d = 0; d <= 30; ++d, ++checked) mismatches += dim_moduli(n, d) != index_formula(n, d, IndexConvention::DetLoop);

  std::mt19937 rng(701);
  int trips = 0, failures = 0;
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n)
    for (int d = 0; d <= 5; ++d)
      for (int k = 0; k <= d; ++k)
        for (int rep = 0; rep < 5; ++rep, ++trips) {
          const ModuliPoint point(n, k, random_vector(rng, n * (k + 1)));
          const auto up = classify_stratum(embed_stratum(point, d));
          const double diff = up.primary.max_abs_diff(point.canonicalized());
          worst = std::max(worst, diff);
          failures += up.stratum_k != k || !(diff < 1e-12);
        }
  return {mismatches == 0 && failures == 0,
          fmt("dim = DetLoop index on %d (N, d) pairs with %d mismatches; %d stratum round-trips, %d failures, max primary error %.1e",
              checked, mismatches, trips, failures, worst)};
}

/// b_i = normalize(a + w_i^p v), w_i = 2^-i.
D1LimitInput degenerating(const std::vector<cplx>& a, const std::vector<cplx>& v, double power, cplx phase) {
  D1LimitInput in{a, a, std::nullopt, {}};
  for (int i = 3; i <= 7; ++i) {
    const double w = std::ldexp(1.0, -i);
    std::vector<cplx> b(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) b[j] = phase * (a[j] + std::pow(w, power) * v[j]);
    in.samples.push_back({a, normalized(b), cplx(w, 0.0)});
  }
  return in;
}

Verdict classifiers() {
  std::mt19937 rng(801);
  int t1 = 0, t2 = 0, s = 0;
  double v_err = 0.0;
  for (int family = 0; family < 10; ++family) {
    const int n = 2 + family % 3;
    const auto a = normalized(random_vector(rng, n));
    if (classify_limit_d1({a, normalized(random_vector(rng, n)), std::nullopt, {}}).stratum == D1Stratum::T1) ++t1;
    auto v = random_vector(rng, n);
    const cplx c = detail::inner(a, v);
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] -= c * a[static_cast<std::size_t>(j)];
    const cplx phase = std::polar(1.0, 0.9 * family);
    const D1Limit lt2 = classify_limit_d1(degenerating(a, v, 1.0, phase));
    if (lt2.stratum == D1Stratum::T2) {
      ++t2;
      // b carries a phase that w does not, so the fibre coordinate is phase * v.
      if (lt2.v) {
        double e = 0.0;
        for (int j = 0; j < n; ++j) e = std::max(e, std::abs((*lt2.v)[static_cast<std::size_t>(j)] - phase * v[static_cast<std::size_t>(j)]));
        v_err = std::max(v_err, e / detail::norm2(v));
      } else {
        v_err = INFINITY;
      }
    }
    if (classify_limit_d1(degenerating(a, v, 0.5, phase)).stratum == D1Stratum::S) ++s;
  }

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<double> ks{8, 16, 32, 64};
  int nontrivial = 0, flipped = 0, families = 0;
  for (int n = 1; n <= 3; ++n)
    for (int d = 1; d <= 3; ++d, ++families) {
      std::vector<FactoredPoly> psi;
      for (int i = 0; i < n; ++i) {
        FactoredPoly p{cplx(u(rng), u(rng)) + 2.0, {}};
        const int di = i == 0 ? d : static_cast<int>(rng() % static_cast<unsigned>(d + 1));
        for (int j = 0; j < di; ++j) p.roots.emplace_back(u(rng), u(rng));
        psi.push_back(p);
      }
      const ConstructionFamily fam(psi);
      nontrivial += bubble_criterion(fam.bubble_sequence(ks)).verdict == BubbleVerdict::Nontrivial;
      flipped += bubble_criterion(fam.bubble_sequence(ks, false)).verdict != BubbleVerdict::Nontrivial;
    }
  return {t1 == 10 && t2 == 10 && s == 10 && v_err < 1e-3 && nontrivial == families && flipped == families,
          fmt("d1: T1 %d/10, T2 %d/10 (max relative v error %.1e), S %d/10; bubble: Nontrivial %d/%d, verdict flips %d/%d", t1, t2,
              v_err, s, nontrivial, families, flipped, families)};
}

Verdict quantum_kirwan() {
  int failures = 0, checks = 0;
  std::mt19937 rng(901);
  std::uniform_int_distribution<int> e(0, 6), c(-5, 5);
  for (int n = 2; n <= 5; ++n) {
    for (int a = 0; a <= 4 * n; ++a)
      for (int b = 0; a + b <= 4 * n; ++b, ++checks) failures += !(kirwan_q(a, n) * kirwan_q(b, n) == kirwan_q(a + b, n));
    const EquivariantElement rel = EquivariantElement::monomial(0, 1) - EquivariantElement::monomial(n, 0);
    failures += !kirwan_q_lambda(rel, n).is_zero();
    ++checks;
    for (int i = 0; i < 50; ++i, ++checks) {
      EquivariantElement x;
      for (int t = 0; t < 3; ++t) x = x + EquivariantElement::monomial(e(rng), e(rng) % 3, Rational(c(rng), 1 + e(rng)));
      failures += !kirwan_q_lambda(x * rel, n).is_zero();
    }
    for (int m = 0; m <= 4 * n; ++m, ++checks) failures += !(kirwan_q(m, n).at_q_zero() == kirwan_classical(m, n));
  }
  return {failures == 0, fmt("%d exact identities checked (homomorphism, kernel, q = 0 specialisation), %d failures", checks, failures)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"energy quantization", energy_quantization},
      {"uniqueness", uniqueness},
      {"decay", decay},
      {"symmetry suite", symmetries},
      {"Bogomolny consistency", bogomolny},
      {"moduli arithmetic", moduli_arithmetic},
      {"degeneration classifiers", classifiers},
      {"quantum Kirwan", quantum_kirwan},
  };
  bool all = true;
  std::vector<bool> passed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    passed.push_back(v.pass);
    all = all && v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, v.detail.c_str());
    std::fflush(stdout);
  }
  // Compactness, Fredholm surjectivity and adiabatic limits are out of desk
  // scale; they stand or fall with the suites that substitute for them.
  const bool substituted = passed[6] && passed[7];
  all = all && substituted;
  std::printf("%s 10 substituted statements: represented by criteria 7 and 8 (%s)\n", substituted ? "PASS" : "FAIL",
              substituted ? "both pass" : "a substitute suite failed");
  return all ? 0 : 1;
}
