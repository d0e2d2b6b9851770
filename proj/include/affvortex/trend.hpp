#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "affvortex/error.hpp"

namespace affvortex {

enum class Trend { Bounded, Divergent };

inline constexpr double kMedianBound = 10.0;

struct TrendFit {
  Trend trend = Trend::Bounded;
  double extrapolated = 0.0;  // Aitken estimate of the limit; +inf when divergent
};

inline double median(std::vector<double> x) {
  require(!x.empty(), ErrorCode::InvalidInput, "median of an empty series");
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size() / 2;
  return x.size() % 2 ? x[m] : 0.5 * (x[m - 1] + x[m]);
}

/// Decides whether a non-negative series sampled along a diverging parameter
/// stays bounded, from its final three values x1, x2, x3 with increments
/// D0 = x2 - x1 and D = x3 - x2:
///  - non-increasing tails are bounded;
///  - increasing tails are bounded only if the increments contract
///    (|D| < |D0|) and the geometric extrapolation x3 + D^2/(D0 - D) stays
///    within 10x the median of the whole series;
///  - an infinite final value is divergent.
/// A tail that changes direction is reported as InconclusiveTrend. As with
/// Richardson extrapolation the parameter should be sampled geometrically
/// (e.g. doubling): with linear spacing slow divergence such as sqrt(k) also
/// has contracting increments.
inline TrendFit classify_trend(std::span<const double> x, const char* what) {
  require(x.size() >= 3, ErrorCode::InvalidInput, std::string(what) + ": trend needs at least 3 samples");
  for (double v : x)
    require(!std::isnan(v) && v >= 0.0, ErrorCode::InvalidInput, std::string(what) + ": series must be non-negative");
  const double x1 = x[x.size() - 3];
  const double x2 = x[x.size() - 2];
  const double x3 = x[x.size() - 1];
  const double inf = std::numeric_limits<double>::infinity();
  if (std::isinf(x3)) return {Trend::Divergent, inf};
  require(!std::isinf(x1) && !std::isinf(x2), ErrorCode::InconclusiveTrend,
          std::string(what) + ": series returns from infinity over the final samples");
  const double d0 = x2 - x1;
  const double d = x3 - x2;
  require(!(d0 > 0.0 && d < 0.0) && !(d0 < 0.0 && d > 0.0), ErrorCode::InconclusiveTrend,
          std::string(what) + ": no monotone trend over the final 3 samples");
  if (d <= 0.0 && d0 <= 0.0) return {Trend::Bounded, x3};
  if (!(d < d0)) return {Trend::Divergent, inf};
  const double limit = x3 + d * d / (d0 - d);
  const double bound = kMedianBound * median({x.begin(), x.end()});
  if (limit > bound) return {Trend::Divergent, inf};
  return {Trend::Bounded, limit};
}

}  // namespace affvortex
