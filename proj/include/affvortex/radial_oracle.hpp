#pragma once

#include <algorithm>
#include <array>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/poly.hpp"

namespace affvortex {

/// Rotationally symmetric solution for psi = z^d on the disk of radius R,
/// sampled on n uniform nodes 0 = r_0 < ... < r_{n-1} = R.
struct RadialProfile {
  int d = 0;
  double R = 0.0;
  double h0 = 0.0;  // shooting parameter h(0)
  std::vector<double> r;
  std::vector<double> h;
  std::vector<double> dh_dr;

  /// Cubic Hermite interpolation from the nodal values and slopes.
  double value(double rho) const {
    require(rho >= 0.0 && rho <= R * (1.0 + 1e-12), ErrorCode::InvalidInput, "radius outside the oracle profile");
    const double step = r[1] - r[0];
    const auto i = std::min(static_cast<std::size_t>(rho / step), r.size() - 2);
    const double t = (rho - r[i]) / step;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * h[i] + (t3 - 2 * t2 + t) * step * dh_dr[i] + (-2 * t3 + 3 * t2) * h[i + 1] +
           (t3 - t2) * step * dh_dr[i + 1];
  }
};

namespace oracle_detail {

using Ld = long double;
using State = std::array<Ld, 2>;

struct RadialRhs {
  int d;
  void operator()(const State& y, State& dy, Ld r) const {
    const Ld arg = std::clamp(2.0L * d * std::log(r) - 2.0L * y[0], -11000.0L, 11000.0L);
    dy[0] = y[1];
    dy[1] = -y[1] / r - 0.5L * (std::exp(arg) - 1.0L);
  }
};

// Truncated power series at the regular centre.
inline State series_start(int d, Ld a, Ld r) {
  const Ld c = std::exp(-2.0L * a) / (8.0L * (d + 1) * (d + 1));
  const Ld p = std::pow(r, 2 * d + 1);
  return {a + r * r / 8.0L - c * p * r, r / 4.0L - c * (2 * d + 2) * p};
}

struct Shot {
  Ld miss = 0;  // h(R) - d log R; -inf when the trajectory blew down
  std::vector<State> nodes;
};

inline constexpr int kSubsteps = 64;
inline constexpr Ld kBlowDown = -400.0L;

inline Shot shoot(int d, Ld R, int n, Ld a, bool record) {
  const int steps = (n - 1) * kSubsteps;
  const Ld dr = R / steps;
  boost::numeric::odeint::runge_kutta4<State, Ld> stepper;
  const RadialRhs rhs{d};
  Shot out;
  if (record) {
    out.nodes.reserve(static_cast<std::size_t>(n));
    out.nodes.push_back({a, 0.0L});
  }
  State y = series_start(d, a, dr);
  for (int s = 1; s < steps; ++s) {
    stepper.do_step(rhs, y, dr * s, dr);
    if (!std::isfinite(y[0]) || y[0] < kBlowDown) {
      out.miss = -std::numeric_limits<Ld>::infinity();
      return out;
    }
    if (record && (s + 1) % kSubsteps == 0) out.nodes.push_back(y);
  }
  out.miss = y[0] - d * std::log(R);
  return out;
}

}  // namespace oracle_detail

/// Shooting on h'' + h'/r + (e^{-2h} r^{2d} - 1) / 2 = 0 with h'(0) = 0 and
/// h(R) = d log R. h(R) is increasing in h(0), so bisection on h(0) after
/// an expanding bracket search converges to the unique profile.
inline RadialProfile radial_oracle(int d, double R, int n = 513) {
  using oracle_detail::Ld;
  require(d >= 0 && d <= kMaxDegree, ErrorCode::InvalidInput, "oracle degree must lie in [0, 30]");
  require(R > 0.0 && std::isfinite(R), ErrorCode::InvalidInput, "oracle radius must be positive");
  require(n >= 3, ErrorCode::InvalidInput, "oracle needs at least 3 nodes");

  RadialProfile prof;
  prof.d = d;
  prof.R = R;
  prof.r.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) prof.r[static_cast<std::size_t>(i)] = R * i / (n - 1);
  if (d == 0) {
    prof.h.assign(static_cast<std::size_t>(n), 0.0);
    prof.dh_dr.assign(static_cast<std::size_t>(n), 0.0);
    return prof;
  }

  const auto miss = [&](Ld a) { return oracle_detail::shoot(d, R, n, a, false).miss; };
  Ld lo = -1.0L;
  Ld hi = 1.0L;
  Ld width = 2.0L;
  int expansions = 0;
  while (!(miss(lo) < 0.0L)) {
    require(++expansions <= 40, ErrorCode::OracleDiverged, "could not bracket h(0) from below");
    lo -= width;
    width *= 2.0L;
  }
  width = 2.0L;
  while (!(miss(hi) > 0.0L)) {
    require(++expansions <= 80, ErrorCode::OracleDiverged, "could not bracket h(0) from above");
    hi += width;
    width *= 2.0L;
  }
  for (int it = 0; it < 200; ++it) {
    const Ld mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo < 1e-17L * (1.0L + std::fabs(mid))) break;
    (miss(mid) < 0.0L ? lo : hi) = mid;
  }

  // Of the two bracket ends keep the one hitting the boundary value closer.
  const auto shot_lo = oracle_detail::shoot(d, R, n, lo, true);
  const auto shot_hi = oracle_detail::shoot(d, R, n, hi, true);
  const bool use_hi = !std::isfinite(shot_lo.miss) || std::fabs(shot_hi.miss) < std::fabs(shot_lo.miss);
  const auto& best = use_hi ? shot_hi : shot_lo;
  require(std::isfinite(best.miss) && std::fabs(best.miss) < 1e-6L &&
              best.nodes.size() == static_cast<std::size_t>(n),
          ErrorCode::OracleDiverged, "shooting missed the boundary value");
  prof.h0 = static_cast<double>(use_hi ? hi : lo);
  for (const auto& y : best.nodes) {
    prof.h.push_back(static_cast<double>(y[0]));
    prof.dh_dr.push_back(static_cast<double>(y[1]));
  }
  return prof;
}

}  // namespace affvortex
