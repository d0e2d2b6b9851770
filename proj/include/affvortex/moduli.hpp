#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/poly.hpp"
#include "affvortex/trend.hpp"

namespace affvortex {

// ---------------------------------------------------------------------------
// Uhlenbeck strata of P^{N(d+1)-1}

inline constexpr double kBlockZero = 1e-10;

struct UhlenbeckPoint {
  ModuliPoint coords;
  int stratum_k;
  ModuliPoint primary;  // canonical representative in N_k
};

/// Largest k whose coefficient block is nonzero relative to the whole
/// vector; the primary point keeps blocks k..0, which in the l-descending
/// layout are the last N(k+1) coordinates.
inline UhlenbeckPoint classify_stratum(const ModuliPoint& mp) {
  const int n = mp.n();
  double total = 0.0;
  for (cplx c : mp.coords()) total += std::norm(c);
  total = std::sqrt(total);
  int k = -1;
  for (int l = mp.d(); l >= 0 && k < 0; --l) {
    double block = 0.0;
    for (int j = 0; j < n; ++j) block += std::norm(mp.at(j, l));
    if (std::sqrt(block) > kBlockZero * total) k = l;
  }
  const auto tail = mp.coords().last(static_cast<std::size_t>(n) * static_cast<std::size_t>(k + 1));
  return {mp, k, ModuliPoint(n, k, {tail.begin(), tail.end()}).canonicalized()};
}

inline UhlenbeckPoint classify_stratum(int n, int d, std::vector<cplx> coords) {
  return classify_stratum(ModuliPoint(n, d, std::move(coords)));
}

/// The inclusion N_k -> P^{N(d+1)-1}, padding with d - k zero blocks.
inline ModuliPoint embed_stratum(const ModuliPoint& point, int d) {
  require(d >= point.d(), ErrorCode::InvalidInput, "cannot embed into a lower degree");
  std::vector<cplx> coords(static_cast<std::size_t>(point.n()) * static_cast<std::size_t>(d - point.d()), cplx{});
  coords.insert(coords.end(), point.coords().begin(), point.coords().end());
  return ModuliPoint(point.n(), d, std::move(coords));
}

// ---------------------------------------------------------------------------
// Dimension and index arithmetic

inline int dim_moduli(int n, int d) {
  require(n >= 2 && d >= 0, ErrorCode::InvalidInput, "dim_moduli needs N >= 2 and d >= 0");
  return 2 * (n * (d + 1) - 1);
}

enum class IndexConvention { LoopDegree, DetLoop };

/// 2 ind_mu + dim M - 2 dim G with dim M = 2N and dim G = 1; ind_mu is d
/// for the loop degree and Nd for the determinant loop.
inline int index_formula(int n, int d, IndexConvention convention) {
  require(n >= 1 && d >= 0, ErrorCode::InvalidInput, "index_formula needs N >= 1 and d >= 0");
  const int ind_mu = convention == IndexConvention::LoopDegree ? d : n * d;
  return 2 * ind_mu + 2 * n - 2;
}

// ---------------------------------------------------------------------------
// Degree-one degenerations

inline constexpr double kSameClass = 1e-8;
inline constexpr double kUnitTolerance = 1e-12;

struct D1Sample {
  std::vector<cplx> a;
  std::vector<cplx> b;
  cplx w;
};

struct D1LimitInput {
  std::vector<cplx> a;
  std::vector<cplx> b;
  std::optional<double> ratio_limit;  // +inf allowed
  std::vector<D1Sample> samples;
};

enum class D1Stratum { T1, T2, S };

constexpr std::string_view to_string(D1Stratum s) {
  switch (s) {
    case D1Stratum::T1: return "T1";
    case D1Stratum::T2: return "T2";
    case D1Stratum::S: return "S";
  }
  return "?";
}

struct D1Limit {
  D1Stratum stratum;
  double distance;                    // d([a], [b])
  std::optional<double> ratio_limit;  // given or extrapolated
  std::vector<double> ratios;         // |w_i|^{-1} d([a_i], [b_i]) per sample
  std::optional<std::vector<cplx>> v;  // fibre coordinate, T2 only
};

namespace detail {

inline double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (cplx c : x) s += std::norm(c);
  return std::sqrt(s);
}

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{};
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s;
}

inline void require_unit(std::span<const cplx> x, std::size_t n, const char* name) {
  require(x.size() == n && n >= 1, ErrorCode::InvalidInput, std::string(name) + " must have N entries");
  require(std::fabs(norm2(x) - 1.0) <= kUnitTolerance, ErrorCode::InvalidInput, std::string(name) + " must be a unit vector");
}

// w^{-1} y with b = c a + y, y orthogonal to a.
inline std::vector<cplx> fibre_vector(const D1Sample& s) {
  const cplx c = inner(s.a, s.b);
  std::vector<cplx> v(s.a.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = (s.b[j] - c * s.a[j]) / s.w;
  return v;
}

}  // namespace detail

/// T1 if [a] != [b]; otherwise T2 or S by whether |w_i|^{-1} d_i stays
/// bounded. An explicit ratio_limit takes precedence over the samples, which
/// should approach w = 0 geometrically (e.g. halving |w|).
inline D1Limit classify_limit_d1(const D1LimitInput& in) {
  const std::size_t n = in.a.size();
  detail::require_unit(in.a, n, "a");
  detail::require_unit(in.b, n, "b");
  for (const auto& s : in.samples) {
    detail::require_unit(s.a, n, "sample a");
    detail::require_unit(s.b, n, "sample b");
    require(s.w != cplx{} && std::isfinite(std::abs(s.w)), ErrorCode::InvalidInput, "sample w must be finite and nonzero");
  }
  if (in.ratio_limit) require(!std::isnan(*in.ratio_limit) && *in.ratio_limit >= 0.0, ErrorCode::InvalidInput,
                              "ratio_limit must be non-negative");

  D1Limit out{D1Stratum::T1, fubini_study_distance(in.a, in.b), in.ratio_limit, {}, std::nullopt};
  for (const auto& s : in.samples) out.ratios.push_back(fubini_study_distance(s.a, s.b) / std::abs(s.w));
  if (out.distance > kSameClass) return out;

  if (!out.ratio_limit) {
    require(in.samples.size() >= 3, ErrorCode::InvalidInput, "ratio_limit absent and fewer than 3 samples to estimate it");
    out.ratio_limit = classify_trend(out.ratios, "ratio |w|^-1 d").extrapolated;
  }
  if (std::isinf(*out.ratio_limit)) {
    out.stratum = D1Stratum::S;
    return out;
  }
  out.stratum = D1Stratum::T2;
  if (in.samples.empty()) return out;

  // Richardson extrapolation of w_i^{-1} y_i to |w| = 0 through the last
  // three samples, projected onto a-perp.
  const std::size_t m = in.samples.size();
  std::vector<cplx> v = detail::fibre_vector(in.samples[m - 1]);
  if (m >= 3) {
    const double x[3] = {std::abs(in.samples[m - 3].w), std::abs(in.samples[m - 2].w), std::abs(in.samples[m - 1].w)};
    if (x[0] != x[1] && x[1] != x[2] && x[0] != x[2]) {
      const std::vector<cplx> f[3] = {detail::fibre_vector(in.samples[m - 3]), detail::fibre_vector(in.samples[m - 2]), v};
      std::fill(v.begin(), v.end(), cplx{});
      for (int a = 0; a < 3; ++a) {
        double weight = 1.0;
        for (int b = 0; b < 3; ++b)
          if (b != a) weight *= x[b] / (x[b] - x[a]);
        for (std::size_t j = 0; j < n; ++j) v[j] += weight * f[a][j];
      }
    }
  }
  const cplx c = detail::inner(in.a, v);
  for (std::size_t j = 0; j < n; ++j) v[j] -= c * in.a[j];
  out.v = std::move(v);
  return out;
}

// ---------------------------------------------------------------------------
// Bubbling criterion on sampled sequences

struct BubbleZero {
  cplx rho;
  int m;
};

struct BubbleSample {
  double lambda;
  cplx z;
  std::vector<std::vector<BubbleZero>> zeros;  // indexed by component j
  std::vector<double> f_abs;                   // |f_{j,k}(z_k)|
};

struct BubbleSequence {
  std::vector<BubbleSample> samples;

  int n() const { return samples.empty() ? 0 : static_cast<int>(samples.front().f_abs.size()); }

  void validate() const {
    require(samples.size() >= 4, ErrorCode::InvalidInput, "bubble criterion needs at least 4 samples");
    const std::size_t n = samples.front().f_abs.size();
    require(n >= 1, ErrorCode::InvalidInput, "samples need at least one component");
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& s = samples[k];
      const std::string at = "sample " + std::to_string(k) + ": ";
      require(std::isfinite(s.lambda) && s.lambda > 0.0, ErrorCode::InvalidInput, at + "lambda must be positive");
      require(k == 0 || s.lambda > samples[k - 1].lambda, ErrorCode::InvalidInput, at + "lambda must increase strictly");
      require(std::isfinite(s.z.real()) && std::isfinite(s.z.imag()), ErrorCode::InvalidInput, at + "z must be finite");
      require(s.f_abs.size() == n && s.zeros.size() == n, ErrorCode::InvalidInput, at + "zeros and f_abs must have N entries");
      for (std::size_t j = 0; j < n; ++j) {
        require(std::isfinite(s.f_abs[j]) && s.f_abs[j] >= 0.0, ErrorCode::InvalidInput, at + "f_abs must be non-negative");
        require(s.zeros[j].size() == samples.front().zeros[j].size(), ErrorCode::InvalidInput,
                at + "zero sets must keep their size across samples");
        for (std::size_t a = 0; a < s.zeros[j].size(); ++a) {
          require(s.zeros[j][a].m >= 1, ErrorCode::InvalidInput, at + "multiplicities must be positive");
          require(s.zeros[j][a].m == samples.front().zeros[j][a].m, ErrorCode::InvalidInput,
                  at + "multiplicities must be stable across samples");
        }
      }
    }
  }
};

enum class BubbleVerdict { Nontrivial, Trivial, Inconclusive };

constexpr std::string_view to_string(BubbleVerdict v) {
  switch (v) {
    case BubbleVerdict::Nontrivial: return "Nontrivial";
    case BubbleVerdict::Trivial: return "Trivial";
    case BubbleVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct BubbleReport {
  BubbleVerdict verdict = BubbleVerdict::Inconclusive;
  std::vector<std::vector<bool>> in_w;  // per component, per zero
  std::vector<int> d_w;                 // total multiplicity of W_j
  std::vector<double> t;
  std::vector<double> T;
  std::vector<double> ratio;  // T_k / t_k
  bool by_convention = false;  // every W_j empty: no t-side
  std::string note;
};

/// The t_k / T_k comparison for a sequence sampled at increasing lambda_k.
/// A zero stays in W_j if lambda_k |z_k - rho_k| is judged bounded. The
/// verdict is Nontrivial if T_k / t_k is bounded and Trivial if it
/// diverges; a non-monotone tail gives Inconclusive with the evidence kept.
inline BubbleReport bubble_criterion(const BubbleSequence& seq) {
  seq.validate();
  const std::size_t n = static_cast<std::size_t>(seq.n());
  BubbleReport rep;
  rep.in_w.resize(n);
  rep.d_w.assign(n, 0);

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a = 0; a < seq.samples.front().zeros[j].size(); ++a) {
      std::vector<double> dist;
      for (const auto& s : seq.samples) dist.push_back(s.lambda * std::abs(s.z - s.zeros[j][a].rho));
      bool bounded = false;
      try {
        bounded = classify_trend(dist, "lambda |z - rho|").trend == Trend::Bounded;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InconclusiveTrend) throw;
        rep.note = "zero " + std::to_string(a) + " of component " + std::to_string(j) +
                   ": rescaled distance has no monotone trend";
      }
      rep.in_w[j].push_back(bounded);
      if (bounded) rep.d_w[j] += seq.samples.front().zeros[j][a].m;
    }
  }

  const auto has_w = [&](std::size_t j) { return std::find(rep.in_w[j].begin(), rep.in_w[j].end(), true) != rep.in_w[j].end(); };
  bool any_w = false;
  for (std::size_t j = 0; j < n; ++j) any_w = any_w || has_w(j);

  for (const auto& s : seq.samples) {
    double t = 0.0;
    double big_t = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double prod = s.f_abs[j];
      for (std::size_t a = 0; a < s.zeros[j].size(); ++a)
        if (!rep.in_w[j][a]) prod *= std::pow(std::abs(s.z - s.zeros[j][a].rho), s.zeros[j][a].m);
      if (has_w(j))
        t = std::max(t, std::pow(s.lambda, -rep.d_w[j]) * prod);
      else
        big_t = std::max(big_t, prod);
    }
    rep.t.push_back(t);
    rep.T.push_back(big_t);
    rep.ratio.push_back(t > 0.0 ? big_t / t : (big_t > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  if (!rep.note.empty()) return rep;

  if (!any_w) {
    require(std::any_of(rep.T.begin(), rep.T.end(), [](double v) { return v > 0.0; }), ErrorCode::EmptyW,
            "every W_j is empty and every T_k vanishes");
    rep.verdict = BubbleVerdict::Trivial;
    rep.by_convention = true;
    rep.note = "every W_j is empty: no t-side, Trivial by convention";
    return rep;
  }
  try {
    rep.verdict = classify_trend(rep.ratio, "T_k / t_k").trend == Trend::Bounded ? BubbleVerdict::Nontrivial
                                                                                  : BubbleVerdict::Trivial;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InconclusiveTrend) throw;
    rep.verdict = BubbleVerdict::Inconclusive;
    rep.note = e.what();
  }
  return rep;
}

/// Throws InconclusiveTrend unless the report reached a verdict.
inline const BubbleReport& require_conclusive(const BubbleReport& rep) {
  require(rep.verdict != BubbleVerdict::Inconclusive, ErrorCode::InconclusiveTrend, rep.note);
  return rep;
}

// ---------------------------------------------------------------------------
// Zero data of polynomial sequences

/// Zeros of each component inside |z - z_k| < radius (clustered, with
/// multiplicity) and |f_{j,k}(z_k)|, the modulus of the remaining factor.
inline BubbleSample bubble_sample_from_pair(const NPair& pair, double lambda, cplx z_k, double radius) {
  require(radius > 0.0, ErrorCode::InvalidInput, "neighbourhood radius must be positive");
  BubbleSample s{lambda, z_k, {}, {}};
  for (const auto& p : pair.polys()) {
    std::vector<BubbleZero> inside;
    double f = std::abs(p.leading());
    if (!p.is_zero() && p.degree().value() > 0) {
      for (const auto& cl : cluster_roots(p, find_roots(p))) {
        if (std::abs(cl.centre - z_k) < radius)
          inside.push_back({cl.centre, cl.size});
        else
          f *= std::pow(std::abs(z_k - cl.centre), cl.size);
      }
    }
    s.zeros.push_back(std::move(inside));
    s.f_abs.push_back(f);
  }
  return s;
}

/// Samples of a sequence of pairs with zeros matched to the previous sample
/// by nearest neighbour, realising the bijections rho_k.
inline BubbleSequence bubble_sequence_from_pairs(std::span<const NPair> pairs, std::span<const double> lambdas,
                                                 std::span<const cplx> centres, double radius) {
  require(pairs.size() == lambdas.size() && pairs.size() == centres.size(), ErrorCode::InvalidInput,
          "pairs, lambdas and centres must have equal length");
  BubbleSequence seq;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    require(k == 0 || pairs[k].n() == pairs[0].n(), ErrorCode::InvalidInput, "all pairs need the same N");
    BubbleSample s = bubble_sample_from_pair(pairs[k], lambdas[k], centres[k], radius);
    if (k > 0) {
      const auto& prev = seq.samples.back();
      for (std::size_t j = 0; j < s.zeros.size(); ++j) {
        require(s.zeros[j].size() == prev.zeros[j].size(), ErrorCode::InvalidInput,
                "component " + std::to_string(j) + " changes its number of nearby zeros at sample " + std::to_string(k));
        std::vector<BubbleZero> pool = std::move(s.zeros[j]);
        std::vector<BubbleZero> ordered;
        for (const auto& target : prev.zeros[j]) {
          auto it = std::min_element(pool.begin(), pool.end(), [&](const BubbleZero& x, const BubbleZero& y) {
            return std::abs(x.rho - target.rho) < std::abs(y.rho - target.rho);
          });
          ordered.push_back(*it);
          pool.erase(it);
        }
        s.zeros[j] = std::move(ordered);
      }
    }
    seq.samples.push_back(std::move(s));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Construction families

struct FactoredPoly {
  cplx lead;
  std::vector<cplx> roots;
};

/// phi_i^(k)(z) = k^{d_i - d} a_i (1 - z)^{d - d_i} prod_j (z - z_i^j / k):
/// degree-d sections whose zeros concentrate at the origin at rate 1/k, so
/// that zooming in by lambda_k = k recovers psi_i = a_i prod_j (z - z_i^j).
/// The non-concentrating variant keeps the roots fixed at z_i^j.
class ConstructionFamily {
 public:
  explicit ConstructionFamily(std::vector<FactoredPoly> psi) : psi_(std::move(psi)) {
    require(!psi_.empty() && static_cast<int>(psi_.size()) <= kMaxComponents, ErrorCode::InvalidInput,
            "construction family needs 1..8 components");
    for (const auto& p : psi_) {
      require(p.lead != cplx{}, ErrorCode::InvalidInput, "construction family needs nonzero leading coefficients");
      d_ = std::max(d_, static_cast<int>(p.roots.size()));
    }
    require(d_ <= kMaxDegree, ErrorCode::InvalidInput, "construction family degree exceeds 30");
  }

  int n() const { return static_cast<int>(psi_.size()); }
  int d() const { return d_; }

  NPair limit_pair() const {
    std::vector<CPoly> polys;
    for (const auto& p : psi_) polys.push_back(CPoly::from_roots(p.roots, p.lead));
    return NPair(std::move(polys));
  }

  NPair member(double k, bool concentrating = true) const {
    require(k > 0.0, ErrorCode::InvalidInput, "family parameter must be positive");
    std::vector<CPoly> polys;
    for (const auto& p : psi_) {
      const int di = static_cast<int>(p.roots.size());
      std::vector<cplx> roots(static_cast<std::size_t>(d_ - di), cplx(1.0));
      for (cplx r : p.roots) roots.push_back(concentrating ? r / k : r);
      // (1 - z)^m = (-1)^m (z - 1)^m
      const double sign = (d_ - di) % 2 ? -1.0 : 1.0;
      polys.push_back(CPoly::from_roots(roots, sign * std::pow(k, di - d_) * p.lead));
    }
    return NPair(std::move(polys));
  }

  /// Sample at p_k = 0, lambda_k = k. Zeros near the origin are the z_i^j
  /// (scaled by 1/k when concentrating); the factor at z = 1 is part of f.
  BubbleSample bubble_sample(double k, bool concentrating = true) const {
    BubbleSample s{k, cplx{}, {}, {}};
    for (const auto& p : psi_) {
      std::vector<BubbleZero> zeros;
      for (cplx r : p.roots) {
        const cplx rho = concentrating ? r / k : r;
        auto it = std::find_if(zeros.begin(), zeros.end(), [&](const BubbleZero& z) { return z.rho == rho; });
        if (it == zeros.end())
          zeros.push_back({rho, 1});
        else
          ++it->m;
      }
      s.zeros.push_back(std::move(zeros));
      s.f_abs.push_back(std::pow(k, static_cast<double>(p.roots.size()) - d_) * std::abs(p.lead));
    }
    return s;
  }

  BubbleSequence bubble_sequence(std::span<const double> ks, bool concentrating = true) const {
    BubbleSequence seq;
    for (double k : ks) seq.samples.push_back(bubble_sample(k, concentrating));
    return seq;
  }

 private:
  std::vector<FactoredPoly> psi_;
  int d_ = 0;
};

}  // namespace affvortex
