#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "affvortex/error.hpp"

namespace affvortex {

using cplx = std::complex<double>;

inline constexpr int kMaxComponents = 8;
inline constexpr int kMaxDegree = 30;

/// Polynomial degree with a distinct tag for the zero polynomial.
class Degree {
 public:
  static constexpr Degree neg_infinity() { return Degree(); }
  static constexpr Degree of(int value) { return Degree(value); }

  constexpr bool is_finite() const { return finite_; }
  constexpr bool is_neg_infinity() const { return !finite_; }

  int value() const {
    require(finite_, ErrorCode::InvalidInput, "degree of the zero polynomial is -infinity");
    return value_;
  }

  friend constexpr bool operator==(const Degree&, const Degree&) = default;
  friend constexpr std::strong_ordering operator<=>(const Degree& a, const Degree& b) {
    if (a.finite_ != b.finite_) return a.finite_ ? std::strong_ordering::greater : std::strong_ordering::less;
    return a.finite_ ? a.value_ <=> b.value_ : std::strong_ordering::equal;
  }

 private:
  constexpr Degree() = default;
  constexpr explicit Degree(int value) : finite_(true), value_(value) {}

  bool finite_ = false;
  int value_ = 0;
};

/// Dense complex polynomial, coefficient l multiplies z^l. Trailing exact
/// zeros are trimmed so the stored leading coefficient is nonzero.
class CPoly {
 public:
  CPoly() = default;
  explicit CPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  CPoly(std::initializer_list<cplx> coeffs) : coeffs_(coeffs) { trim(); }

  static CPoly constant(cplx c) { return CPoly({c}); }
  static CPoly monomial(cplx c, int power) {
    std::vector<cplx> coeffs(static_cast<std::size_t>(power) + 1, cplx{});
    coeffs.back() = c;
    return CPoly(std::move(coeffs));
  }
  static CPoly from_roots(std::span<const cplx> roots, cplx lead = 1.0) {
    CPoly p = constant(lead);
    for (cplx r : roots) p = p * CPoly({-r, 1.0});
    return p;
  }

  bool is_zero() const { return coeffs_.empty(); }
  Degree degree() const {
    return is_zero() ? Degree::neg_infinity() : Degree::of(static_cast<int>(coeffs_.size()) - 1);
  }
  std::span<const cplx> coeffs() const { return coeffs_; }
  cplx coeff(int l) const {
    return (l >= 0 && static_cast<std::size_t>(l) < coeffs_.size()) ? coeffs_[static_cast<std::size_t>(l)] : cplx{};
  }
  cplx leading() const { return is_zero() ? cplx{} : coeffs_.back(); }

  cplx operator()(cplx z) const {
    cplx acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Sum of |a_l||z|^l, the scale against which Horner rounding is measured.
  double magnitude_at(cplx z) const {
    const double r = std::abs(z);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
  }

  CPoly derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<cplx> d(coeffs_.size() - 1);
    for (std::size_t l = 1; l < coeffs_.size(); ++l) d[l - 1] = static_cast<double>(l) * coeffs_[l];
    return CPoly(std::move(d));
  }

  /// Returns q with q(z) = p(z - a).
  CPoly shifted(cplx a) const {
    CPoly result;
    const CPoly lin({-a, 1.0});
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) result = result * lin + constant(*it);
    return result;
  }

  /// Returns q with q(w) = p(z0 + w / lambda).
  CPoly rescaled(cplx z0, double lambda) const {
    CPoly result;
    const CPoly lin({z0, 1.0 / lambda});
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) result = result * lin + constant(*it);
    return result;
  }

  friend CPoly operator+(const CPoly& a, const CPoly& b) {
    std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()), cplx{});
    for (std::size_t l = 0; l < a.coeffs_.size(); ++l) c[l] += a.coeffs_[l];
    for (std::size_t l = 0; l < b.coeffs_.size(); ++l) c[l] += b.coeffs_[l];
    return CPoly(std::move(c));
  }
  friend CPoly operator-(const CPoly& a, const CPoly& b) { return a + b * cplx(-1.0); }
  friend CPoly operator*(const CPoly& a, const CPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1, cplx{});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return CPoly(std::move(c));
  }
  friend CPoly operator*(const CPoly& a, cplx s) {
    std::vector<cplx> c(a.coeffs_);
    for (auto& x : c) x *= s;
    return CPoly(std::move(c));
  }
  friend CPoly operator*(cplx s, const CPoly& a) { return a * s; }
  friend bool operator==(const CPoly&, const CPoly&) = default;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
  }

  std::vector<cplx> coeffs_;
};

struct Deflation {
  CPoly quotient;
  cplx remainder;
};

/// Divides p by (z - a) with Horner's scheme.
inline Deflation synthetic_division(const CPoly& p, cplx a) {
  const auto c = p.coeffs();
  if (c.empty()) return {CPoly{}, cplx{}};
  std::vector<cplx> q(c.size() - 1);
  cplx acc = c.back();
  for (std::size_t l = c.size() - 1; l-- > 0;) {
    q[l] = acc;
    acc = acc * a + c[l];
  }
  return {CPoly(std::move(q)), acc};
}

/// First `count` Taylor coefficients of p at a, by repeated synthetic division.
inline std::vector<cplx> taylor_coefficients(const CPoly& p, cplx a, int count) {
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  CPoly cur = p;
  for (int k = 0; k < count; ++k) {
    auto [q, r] = synthetic_division(cur, a);
    out.push_back(r);
    cur = std::move(q);
  }
  return out;
}

inline constexpr double kMultiplicityResidual = 1e-8;

/// Number of times (z - a) divides p, judged by the remainder relative to
/// the Horner magnitude of the current dividend.
inline int root_multiplicity(const CPoly& p, cplx a, double threshold = kMultiplicityResidual) {
  if (p.is_zero()) return 0;
  int m = 0;
  CPoly cur = p;
  while (!cur.is_zero() && cur.degree().value() > 0) {
    const double scale = cur.magnitude_at(a);
    auto [q, r] = synthetic_division(cur, a);
    if (std::abs(r) > threshold * scale) break;
    ++m;
    cur = std::move(q);
  }
  return m;
}

struct RootOptions {
  int max_iterations = 200;
  double update_tol = 1e-12;
};

namespace detail {

struct HornerEval {
  cplx value;
  cplx slope;
  double bound;  // rounding error bound on value
};

inline HornerEval horner_with_derivative(std::span<const cplx> c, cplx z) {
  cplx p = c.back();
  cplx dp{};
  double mag = std::abs(c.back());
  const double r = std::abs(z);
  for (std::size_t l = c.size() - 1; l-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[l];
    mag = mag * r + std::abs(c[l]);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  return {p, dp, 4.0 * static_cast<double>(c.size()) * eps * mag};
}

}  // namespace detail

/// All roots of p with multiplicity, via Aberth-Ehrlich simultaneous
/// iteration. Exact zero roots are split off first. An approximation stops
/// moving once its update is below the tolerance or |p| is within the Horner
/// rounding bound (the latter is what terminates clusters at multiple roots).
inline std::vector<cplx> find_roots(const CPoly& p, RootOptions opt = {}) {
  require(!p.is_zero(), ErrorCode::InvalidInput, "roots of the zero polynomial are undefined");
  auto all = p.coeffs();
  std::size_t zeros = 0;
  while (all[zeros] == cplx{}) ++zeros;
  std::vector<cplx> roots(zeros, cplx{});
  const std::span<const cplx> c = all.subspan(zeros);
  const std::size_t n = c.size() - 1;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }

  const cplx centre = -c[n - 1] / (static_cast<double>(n) * c[n]);
  const double radius = std::max(std::pow(std::abs(c[0] / c[n]), 1.0 / static_cast<double>(n)), 1e-3);
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n) + 0.4;
    z[i] = centre + std::polar(radius, angle);
  }

  std::vector<bool> done(n, false);
  std::size_t remaining = n;
  for (int it = 0; it < opt.max_iterations && remaining > 0; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto ev = detail::horner_with_derivative(c, z[i]);
      if (std::abs(ev.value) <= ev.bound) {
        done[i] = true;
        --remaining;
        continue;
      }
      cplx sum{};
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          const cplx diff = z[i] - z[j];
          if (diff != cplx{}) sum += 1.0 / diff;
        }
      cplx step;
      if (ev.slope == cplx{}) {
        step = std::polar(1e-6 * (1.0 + std::abs(z[i])), 0.7 * static_cast<double>(i + 1));
      } else {
        const cplx newton = ev.value / ev.slope;
        const cplx denom = 1.0 - newton * sum;
        step = denom == cplx{} ? newton : newton / denom;
      }
      z[i] -= step;
      if (std::abs(step) <= opt.update_tol * (1.0 + std::abs(z[i]))) {
        done[i] = true;
        --remaining;
      }
    }
  }
  require(remaining == 0, ErrorCode::RootFindingFailed,
          "Aberth iteration did not converge within " + std::to_string(opt.max_iterations) + " iterations");
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

struct RootCluster {
  cplx centre;
  int size;
};

/// Groups root approximations whose inclusion discs overlap. The disc radius
/// for z_i is n |p(z_i)| / |a_n prod_{j != i} (z_i - z_j)|; connected
/// components of overlapping discs hold as many roots as discs.
inline std::vector<RootCluster> cluster_roots(const CPoly& p, std::span<const cplx> roots) {
  const std::size_t n = roots.size();
  std::vector<double> radius(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx v = p(roots[i]);
    if (v == cplx{}) continue;
    cplx prod = p.leading();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && roots[j] != roots[i]) prod *= roots[i] - roots[j];
    radius[i] = static_cast<double>(n) * std::abs(v) / std::abs(prod);
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= radius[i] + radius[j]) parent[find(i)] = find(j);

  std::vector<RootCluster> clusters;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    auto it = std::find(owner.begin(), owner.end(), r);
    if (it == owner.end()) {
      owner.push_back(r);
      clusters.push_back({roots[i], 1});
    } else {
      auto& cl = clusters[static_cast<std::size_t>(it - owner.begin())];
      cl.centre += roots[i];
      ++cl.size;
    }
  }
  for (auto& cl : clusters) {
    cl.centre /= static_cast<double>(cl.size);
    if (cl.size == 1) continue;
    // An m-fold root is a simple root of the (m-1)-th derivative.
    CPoly q = p;
    for (int k = 1; k < cl.size; ++k) q = q.derivative();
    const CPoly dq = q.derivative();
    for (int it = 0; it < 20; ++it) {
      const cplx slope = dq(cl.centre);
      if (slope == cplx{}) break;
      const cplx step = q(cl.centre) / slope;
      cl.centre -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(cl.centre))) break;
    }
  }
  return clusters;
}

/// Point of P^{N-1} stored as a unit vector whose largest-modulus entry is
/// real and positive.
struct ProjPoint {
  std::vector<cplx> v;

  static ProjPoint from(std::vector<cplx> w) {
    double norm2 = 0.0;
    std::size_t big = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      norm2 += std::norm(w[j]);
      if (std::abs(w[j]) > std::abs(w[big])) big = j;
    }
    require(norm2 > 0.0, ErrorCode::InvalidInput, "projective point from the zero vector");
    const cplx phase = std::conj(w[big]) / (std::abs(w[big]) * std::sqrt(norm2));
    for (auto& x : w) x *= phase;
    return {std::move(w)};
  }
};

/// Fubini-Study distance atan2(|a wedge b|, |<a,b>|), stable near zero.
inline double fubini_study_distance(std::span<const cplx> a, std::span<const cplx> b) {
  require(a.size() == b.size(), ErrorCode::InvalidInput, "dimension mismatch in Fubini-Study distance");
  cplx inner{};
  for (std::size_t j = 0; j < a.size(); ++j) inner += std::conj(a[j]) * b[j];
  double wedge2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) wedge2 += std::norm(a[i] * b[j] - a[j] * b[i]);
  return std::atan2(std::sqrt(wedge2), std::abs(inner));
}

inline double fubini_study_distance(const ProjPoint& a, const ProjPoint& b) {
  return fubini_study_distance(a.v, b.v);
}

/// N polynomials, not all zero. N = 1 is accepted for the Taubes case.
class NPair {
 public:
  explicit NPair(std::vector<CPoly> polys) : polys_(std::move(polys)) {
    require(!polys_.empty(), ErrorCode::InvalidInput, "an N-pair needs at least one component");
    require(static_cast<int>(polys_.size()) <= kMaxComponents, ErrorCode::InvalidInput,
            "at most " + std::to_string(kMaxComponents) + " components are supported");
    Degree d = Degree::neg_infinity();
    for (const auto& p : polys_) d = std::max(d, p.degree());
    require(d.is_finite(), ErrorCode::InvalidInput, "unstable pair: every component is the zero polynomial");
    d_ = d.value();
    require(d_ <= kMaxDegree, ErrorCode::InvalidInput,
            "degree " + std::to_string(d_) + " exceeds the supported maximum " + std::to_string(kMaxDegree));
  }
  NPair(std::initializer_list<CPoly> polys) : NPair(std::vector<CPoly>(polys)) {}

  int n() const { return static_cast<int>(polys_.size()); }
  int d() const { return d_; }
  const CPoly& operator[](int j) const { return polys_[static_cast<std::size_t>(j)]; }
  std::span<const CPoly> polys() const { return polys_; }

  NPair scaled(cplx c) const {
    return transformed([&](const CPoly& p) { return p * c; });
  }
  /// psi_j(z - a): the pair translated so that features move by +a.
  NPair translated(cplx a) const {
    return transformed([&](const CPoly& p) { return p.shifted(a); });
  }
  /// psi_j(z0 + w / lambda).
  NPair rescaled(cplx z0, double lambda) const {
    return transformed([&](const CPoly& p) { return p.rescaled(z0, lambda); });
  }

  /// Largest root modulus over all nonconstant components.
  double max_root_radius() const {
    double r = 0.0;
    for (const auto& p : polys_)
      if (!p.is_zero() && p.degree().value() > 0)
        for (cplx z : find_roots(p)) r = std::max(r, std::abs(z));
    return r;
  }

  friend bool operator==(const NPair&, const NPair&) = default;

 private:
  template <typename F>
  NPair transformed(F&& f) const {
    std::vector<CPoly> out;
    out.reserve(polys_.size());
    for (const auto& p : polys_) out.push_back(f(p));
    return NPair(std::move(out));
  }

  std::vector<CPoly> polys_;
  int d_ = 0;
};

inline std::vector<cplx> eval_pair(const NPair& pair, cplx z) {
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(pair.n()));
  for (const auto& p : pair.polys()) out.push_back(p(z));
  return out;
}

/// sum_j |psi_j(z)|^2
inline double weight(const NPair& pair, cplx z) {
  double w = 0.0;
  for (const auto& p : pair.polys()) w += std::norm(p(z));
  return w;
}

struct BasePoint {
  cplx z;
  int multiplicity;
};

using BaseLocus = std::vector<BasePoint>;

inline constexpr double kCommonRootTol = 1e-8;

inline bool roots_match(cplx a, cplx b) {
  return std::abs(a - b) <= kCommonRootTol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

/// Common zeros of the nonzero components; multiplicity is the minimum
/// over those components.
inline BaseLocus base_locus(const NPair& pair) {
  std::vector<const CPoly*> live;
  for (const auto& p : pair.polys())
    if (!p.is_zero()) live.push_back(&p);
  for (const CPoly* p : live)
    if (p->degree().value() == 0) return {};

  std::vector<std::vector<RootCluster>> clusters;
  for (const CPoly* p : live) clusters.push_back(cluster_roots(*p, find_roots(*p)));
  std::size_t pivot = 0;
  for (std::size_t j = 1; j < live.size(); ++j)
    if (clusters[j].size() < clusters[pivot].size()) pivot = j;

  BaseLocus locus;
  for (const auto& candidate : clusters[pivot]) {
    cplx sum{};
    bool common = true;
    for (const auto& cl : clusters) {
      auto it = std::find_if(cl.begin(), cl.end(), [&](const RootCluster& c) { return roots_match(c.centre, candidate.centre); });
      if (it == cl.end()) {
        common = false;
        break;
      }
      sum += it->centre;
    }
    if (!common) continue;
    const cplx z = sum / static_cast<double>(clusters.size());
    int m = std::numeric_limits<int>::max();
    for (const CPoly* p : live) m = std::min(m, root_multiplicity(*p, z));
    if (m > 0) locus.push_back({z, m});
  }
  return locus;
}

/// [psi_1(z) : ... : psi_N(z)], continued across base points by the m_p-th
/// Taylor coefficients.
inline ProjPoint proj_map(const NPair& pair, cplx z, const BaseLocus& locus) {
  for (const auto& bp : locus) {
    if (!roots_match(z, bp.z)) continue;
    std::vector<cplx> w;
    for (const auto& p : pair.polys()) w.push_back(p.is_zero() ? cplx{} : taylor_coefficients(p, bp.z, bp.multiplicity + 1).back());
    return ProjPoint::from(std::move(w));
  }
  return ProjPoint::from(eval_pair(pair, z));
}

inline int map_degree(const NPair& pair, const BaseLocus& locus) {
  int total = 0;
  for (const auto& bp : locus) total += bp.multiplicity;
  return pair.d() - total;
}

/// Maximum component degree (the polynomial characterisation of the index).
inline int maslov_index(const NPair& pair) { return pair.d(); }

/// Coefficients of z^d, i.e. the evaluation at infinity in homogeneous form.
inline std::vector<cplx> leading_vector(const NPair& pair) {
  std::vector<cplx> v;
  for (const auto& p : pair.polys()) v.push_back(p.coeff(pair.d()));
  return v;
}

/// Point of P^{N(d+1)-1}; coordinates are laid out block by block with the
/// degree l descending and the component j ascending inside each block.
class ModuliPoint {
 public:
  ModuliPoint(int n, int d, std::vector<cplx> coords) : n_(n), d_(d), coords_(std::move(coords)) {
    require(n >= 1 && d >= 0, ErrorCode::InvalidInput, "moduli point needs n >= 1 and d >= 0");
    require(coords_.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(d + 1), ErrorCode::InvalidInput,
            "moduli point needs N*(d+1) coordinates");
    require(std::any_of(coords_.begin(), coords_.end(), [](cplx c) { return c != cplx{}; }), ErrorCode::InvalidInput,
            "all homogeneous coordinates are zero");
  }

  static ModuliPoint from_pair(const NPair& pair) {
    std::vector<cplx> coords;
    for (int l = pair.d(); l >= 0; --l)
      for (const auto& p : pair.polys()) coords.push_back(p.coeff(l));
    return ModuliPoint(pair.n(), pair.d(), std::move(coords));
  }

  int n() const { return n_; }
  int d() const { return d_; }
  std::span<const cplx> coords() const { return coords_; }
  bool canonical() const { return canonical_; }

  cplx at(int j, int l) const {
    return coords_[static_cast<std::size_t>(d_ - l) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
  }

  bool in_open_stratum() const {
    for (int j = 0; j < n_; ++j)
      if (at(j, d_) != cplx{}) return true;
    return false;
  }

  /// Unit norm, first nonzero coordinate real and positive.
  ModuliPoint canonicalized() const {
    double norm2 = 0.0;
    for (cplx c : coords_) norm2 += std::norm(c);
    const auto first = std::find_if(coords_.begin(), coords_.end(), [](cplx c) { return c != cplx{}; });
    const cplx scale = std::conj(*first) / (std::abs(*first) * std::sqrt(norm2));
    std::vector<cplx> out(coords_);
    for (auto& c : out) c *= scale;
    ModuliPoint mp(n_, d_, std::move(out));
    mp.canonical_ = true;
    return mp;
  }

  NPair to_pair() const {
    std::vector<CPoly> polys;
    for (int j = 0; j < n_; ++j) {
      std::vector<cplx> c(static_cast<std::size_t>(d_) + 1);
      for (int l = 0; l <= d_; ++l) c[static_cast<std::size_t>(l)] = at(j, l);
      polys.emplace_back(std::move(c));
    }
    return NPair(std::move(polys));
  }

  double max_abs_diff(const ModuliPoint& other) const {
    require(n_ == other.n_ && d_ == other.d_, ErrorCode::InvalidInput, "moduli points of different shape");
    double m = 0.0;
    for (std::size_t i = 0; i < coords_.size(); ++i) m = std::max(m, std::abs(coords_[i] - other.coords_[i]));
    return m;
  }

 private:
  int n_;
  int d_;
  std::vector<cplx> coords_;
  bool canonical_ = false;
};

inline ModuliPoint normalize_cstar(const NPair& pair) { return ModuliPoint::from_pair(pair).canonicalized(); }

}  // namespace affvortex
