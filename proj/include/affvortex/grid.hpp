#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/poly.hpp"

namespace affvortex {

/// Field values are kept in extended precision: with graded rings the
/// first-ring stencil weights reach ~1e8, so double storage alone would put a
/// ~1e-8 roundoff floor under the residual.
using real = long double;

/// Polar disk of radius R about `centre`, rings r_i = R (i / n_r)^gamma with a
/// single centre node at r_0 = 0 and n_theta equally spaced angles per ring.
class PolarGrid {
 public:
  PolarGrid(double radius, int n_r, int n_theta, double gamma = 1.5, cplx centre = 0.0)
      : radius_(radius), n_r_(n_r), n_theta_(n_theta), gamma_(gamma), centre_(centre) {
    require(radius > 0.0 && std::isfinite(radius), ErrorCode::InvalidInput, "grid radius must be positive");
    require(n_r >= 4, ErrorCode::InvalidInput, "grid needs at least 4 rings");
    require(n_theta >= 16 && n_theta % 2 == 0, ErrorCode::InvalidInput, "n_theta must be even and at least 16");
    require(gamma >= 1.0, ErrorCode::InvalidInput, "grading exponent must be >= 1");
    r_.resize(static_cast<std::size_t>(n_r) + 1);
    for (int i = 0; i <= n_r; ++i)
      r_[static_cast<std::size_t>(i)] = radius * std::pow(static_cast<double>(i) / n_r, gamma);
    r_.back() = radius;
    dtheta_ = 2.0 * M_PI / n_theta;

    area_.resize(r_.size());
    const auto half = [&](int i) { return 0.5 * (r_[static_cast<std::size_t>(i)] + r_[static_cast<std::size_t>(i) + 1]); };
    area_[0] = M_PI * half(0) * half(0);
    for (int i = 1; i < n_r; ++i) area_[static_cast<std::size_t>(i)] = 0.5 * dtheta_ * (half(i) * half(i) - half(i - 1) * half(i - 1));
    area_[static_cast<std::size_t>(n_r)] = 0.5 * dtheta_ * (radius * radius - half(n_r - 1) * half(n_r - 1));
  }

  double radius() const { return radius_; }
  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  double gamma() const { return gamma_; }
  cplx centre() const { return centre_; }
  double dtheta() const { return dtheta_; }

  double r(int i) const { return r_[static_cast<std::size_t>(i)]; }
  std::span<const double> radii() const { return r_; }
  double theta(int k) const { return dtheta_ * k; }
  /// Midpoint between rings i and i + 1.
  double r_half(int i) const { return 0.5 * (r(i) + r(i + 1)); }

  std::size_t size() const { return 1 + static_cast<std::size_t>(n_r_) * static_cast<std::size_t>(n_theta_); }
  std::size_t interior_size() const { return 1 + static_cast<std::size_t>(n_r_ - 1) * static_cast<std::size_t>(n_theta_); }

  int wrap(int k) const { return ((k % n_theta_) + n_theta_) % n_theta_; }
  std::size_t index(int i, int k) const {
    return i == 0 ? 0 : 1 + static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_theta_) + static_cast<std::size_t>(wrap(k));
  }
  int ring_of(std::size_t idx) const { return idx == 0 ? 0 : 1 + static_cast<int>((idx - 1) / static_cast<std::size_t>(n_theta_)); }
  int angle_of(std::size_t idx) const { return idx == 0 ? 0 : static_cast<int>((idx - 1) % static_cast<std::size_t>(n_theta_)); }

  /// Offset of the node from the grid centre.
  cplx offset(int i, int k) const { return i == 0 ? cplx{} : std::polar(r(i), theta(k)); }
  cplx point(int i, int k) const { return centre_ + offset(i, k); }
  cplx point(std::size_t idx) const { return point(ring_of(idx), angle_of(idx)); }

  /// Quadrature weight of one node on ring i (cells bounded by ring midpoints).
  double node_area(int i) const { return area_[static_cast<std::size_t>(i)]; }
  double weight(std::size_t idx) const { return node_area(ring_of(idx)); }

  bool same_shape(const PolarGrid& o) const {
    return radius_ == o.radius_ && n_r_ == o.n_r_ && n_theta_ == o.n_theta_ && gamma_ == o.gamma_ && centre_ == o.centre_;
  }

 private:
  double radius_;
  int n_r_;
  int n_theta_;
  double gamma_;
  cplx centre_;
  double dtheta_ = 0.0;
  std::vector<double> r_;
  std::vector<double> area_;
};

struct GridDefaults {
  static constexpr int n_r = 256;
  static constexpr int n_theta = 128;
  static constexpr double gamma = 1.5;
  static constexpr double radius_factor = 8.0;
};

/// Default grid: R = 8 (1 + max root radius).
inline PolarGrid default_grid_for(const NPair& pair) {
  return PolarGrid(GridDefaults::radius_factor * (1.0 + pair.max_root_radius()), GridDefaults::n_r, GridDefaults::n_theta,
                   GridDefaults::gamma);
}

/// Real function on a PolarGrid; the centre value is stored once.
class ScalarField {
 public:
  explicit ScalarField(std::shared_ptr<const PolarGrid> grid, real fill = 0.0L)
      : grid_(std::move(grid)), values_(grid_->size(), fill) {}
  ScalarField(std::shared_ptr<const PolarGrid> grid, std::vector<real> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require(values_.size() == grid_->size(), ErrorCode::InvalidInput, "field size does not match grid");
    for (real v : values_) require(std::isfinite(v), ErrorCode::InvalidInput, "field holds a non-finite value");
  }

  const PolarGrid& grid() const { return *grid_; }
  const std::shared_ptr<const PolarGrid>& grid_ptr() const { return grid_; }
  std::span<const real> values() const { return values_; }
  std::span<real> values() { return values_; }

  real operator[](std::size_t idx) const { return values_[idx]; }
  real& operator[](std::size_t idx) { return values_[idx]; }
  real at(int i, int k) const { return values_[grid_->index(i, k)]; }
  real& at(int i, int k) { return values_[grid_->index(i, k)]; }

  bool all_finite() const {
    for (real v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Sup norm over nodes with ring index in [ring_lo, ring_hi].
  real sup_norm(int ring_lo = 0, int ring_hi = -1) const {
    if (ring_hi < 0) ring_hi = grid_->n_r();
    real m = 0.0L;
    for (std::size_t idx = 0; idx < values_.size(); ++idx) {
      const int i = grid_->ring_of(idx);
      if (i >= ring_lo && i <= ring_hi) m = std::max(m, std::fabs(values_[idx]));
    }
    return m;
  }

  ScalarField operator-(const ScalarField& o) const {
    require(grid_->same_shape(o.grid()), ErrorCode::InvalidInput, "field grids differ");
    ScalarField out(grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] - o.values_[i];
    return out;
  }

 private:
  std::shared_ptr<const PolarGrid> grid_;
  std::vector<real> values_;
};

template <typename F>
ScalarField sample_function(std::shared_ptr<const PolarGrid> grid, F&& f) {
  ScalarField out(grid);
  for (std::size_t idx = 0; idx < grid->size(); ++idx) out[idx] = static_cast<real>(f(grid->point(idx)));
  return out;
}

namespace detail {

inline std::array<double, 4> lagrange4(std::span<const double, 4> x, double t) {
  std::array<double, 4> w{};
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (t - x[static_cast<std::size_t>(b)]) / (x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]);
    w[static_cast<std::size_t>(a)] = l;
  }
  return w;
}

// Trigonometric interpolation of ring i at angle phi, in the barycentric
// form for an even number of equispaced nodes.
inline double ring_value(const ScalarField& f, int i, double phi) {
  const PolarGrid& g = f.grid();
  if (i == 0) return static_cast<double>(f[0]);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < g.n_theta(); ++k) {
    const double half = 0.5 * (phi - g.theta(k));
    const double s = std::sin(half);
    if (std::fabs(s) < 1e-15) return static_cast<double>(f.at(i, k));
    const double w = (k % 2 == 0 ? 1.0 : -1.0) * std::cos(half) / s;
    num += w * static_cast<double>(f.at(i, k));
    den += w;
  }
  return num / den;
}

}  // namespace detail

/// Interpolation of a field at an arbitrary point of its disk: trigonometric
/// along rings, cubic across them. The radial stencil runs along the diameter
/// through z so the centre is handled by reflection (value at -r equals the
/// value at angle + pi).
inline double interpolate(const ScalarField& f, cplx z) {
  const PolarGrid& g = f.grid();
  const cplx w = z - g.centre();
  const double rho = std::abs(w);
  require(rho <= g.radius() * (1.0 + 1e-12), ErrorCode::InvalidInput, "interpolation point outside the grid");
  double phi = std::arg(w);
  if (phi < 0) phi += 2.0 * M_PI;

  // Signed radial nodes -r_n..r_n; locate the interval holding rho.
  int hi = 1;
  while (hi < g.n_r() && g.r(hi) < rho) ++hi;
  int first = hi - 2;  // signed index of the leftmost of 4 nodes
  if (first + 3 > g.n_r()) first = g.n_r() - 3;
  std::array<double, 4> x{};
  std::array<double, 4> v{};
  for (int a = 0; a < 4; ++a) {
    const int s = first + a;
    const int ring = std::abs(s);
    x[static_cast<std::size_t>(a)] = s < 0 ? -g.r(ring) : g.r(ring);
    double ang = s < 0 ? phi + M_PI : phi;
    if (ang >= 2.0 * M_PI) ang -= 2.0 * M_PI;
    v[static_cast<std::size_t>(a)] = detail::ring_value(f, ring, ang);
  }
  const auto wts = detail::lagrange4(x, rho);
  double out = 0.0;
  for (int a = 0; a < 4; ++a) out += wts[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(a)];
  return out;
}

}  // namespace affvortex
