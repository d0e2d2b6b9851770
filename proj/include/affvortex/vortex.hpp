#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/grid.hpp"
#include "affvortex/kw_solver.hpp"
#include "affvortex/poly.hpp"

namespace affvortex {

namespace detail {

/// Signed positions of the three radial stencil nodes for ring i >= 1 along
/// the diameter through angle index k (negative = reflected through the
/// centre); one-sided on the outer ring.
inline std::array<int, 3> radial_stencil(const PolarGrid& g, int i, int stride) {
  if (i + stride <= g.n_r()) return {i - stride, i, i + stride};
  return {i - 2 * stride, i - stride, i};
}

inline double signed_radius(const PolarGrid& g, int s) { return s >= 0 ? g.r(s) : -g.r(-s); }

/// Weights of the derivative at x0 of the quadratic through x[0..2].
inline std::array<double, 3> quadratic_derivative_weights(const std::array<double, 3>& x, double x0) {
  std::array<double, 3> w{};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      if (b == a) continue;
      double term = 1.0 / (x[a] - x[b]);
      for (std::size_t c = 0; c < 3; ++c)
        if (c != a && c != b) term *= (x0 - x[c]) / (x[a] - x[c]);
      w[a] += term;
    }
  return w;
}

/// Cartesian gradient of a nodal quantity f(i, k) at node (i, k). Radial
/// derivatives use three nodes along the diameter, angular ones central
/// differences; `stride` 2 gives the coarser stencil used for error
/// estimates. At the centre the gradient is read off the first Fourier mode
/// of ring `stride`.
template <typename T, typename F>
std::array<T, 2> nodal_gradient(const PolarGrid& g, F&& f, int i, int k, int stride = 1) {
  const int m = g.n_theta();
  if (i == 0) {
    T gx{};
    T gy{};
    for (int j = 0; j < m; ++j) {
      const T v = f(stride, j);
      gx += v * std::cos(g.theta(j));
      gy += v * std::sin(g.theta(j));
    }
    const double scale = 2.0 / (m * g.r(stride));
    return {gx * scale, gy * scale};
  }
  const auto nodes = radial_stencil(g, i, stride);
  std::array<double, 3> x{};
  for (std::size_t a = 0; a < 3; ++a) x[a] = signed_radius(g, nodes[a]);
  const auto w = quadratic_derivative_weights(x, g.r(i));
  T dr{};
  for (std::size_t a = 0; a < 3; ++a) dr += w[a] * (nodes[a] >= 0 ? f(nodes[a], k) : f(-nodes[a], k + m / 2));
  const T dth = (f(i, k + stride) - f(i, k - stride)) / (2.0 * stride * g.dtheta());
  const double c = std::cos(g.theta(k));
  const double s = std::sin(g.theta(k));
  const double r = g.r(i);
  return {dr * c - dth * (s / r), dr * s + dth * (c / r)};
}

}  // namespace detail

/// Gauge-theoretic data (A, u) rebuilt from an N-pair and the solution h of
/// the Kazdan-Warner equation: u = e^{-h} psi and A = d - del h + delbar h.
/// Gradients of h and the Higgs field are tabulated once at construction.
class VortexSolution {
 public:
  VortexSolution(NPair pair, ScalarField h) : pair_(std::move(pair)), h_(std::move(h)), d_(maslov_index(pair_)) {
    const PolarGrid& g = h_.grid();
    require(h_.all_finite(), ErrorCode::InvalidInput, "h holds non-finite values");
    u_.resize(g.size());
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double scale = std::exp(-static_cast<double>(h_[idx]));
      auto vals = eval_pair(pair_, g.point(idx));
      for (auto& v : vals) {
        v *= scale;
        require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::InvalidInput, "Higgs field overflows");
      }
      u_[idx] = std::move(vals);
    }
    grad_h_.resize(g.size());
    const auto hv = [&](int i, int k) { return static_cast<double>(h_.at(i, k)); };
    for (std::size_t idx = 0; idx < g.size(); ++idx)
      grad_h_[idx] = detail::nodal_gradient<double>(g, hv, g.ring_of(idx), g.angle_of(idx));
  }

  static VortexSolution solve(const NPair& pair, std::shared_ptr<const PolarGrid> grid, const SolverConfig& cfg = {}) {
    return VortexSolution(pair, solve_kw(pair, std::move(grid), cfg));
  }

  const NPair& pair() const { return pair_; }
  const ScalarField& h() const { return h_; }
  const PolarGrid& grid() const { return h_.grid(); }
  int d() const { return d_; }

  const std::vector<cplx>& u(std::size_t idx) const { return u_[idx]; }
  /// (dh/ds, dh/dt) at a node.
  const std::array<double, 2>& grad_h(std::size_t idx) const { return grad_h_[idx]; }

 private:
  NPair pair_;
  ScalarField h_;
  int d_;
  std::vector<std::vector<cplx>> u_;
  std::vector<std::array<double, 2>> grad_h_;
};

inline std::vector<cplx> higgs_field(const VortexSolution& sol, std::size_t idx) { return sol.u(idx); }

/// Imaginary parts (a_s, a_t) of the connection 1-form alpha = a_s ds + a_t dt
/// of A = d + alpha. With A = d - del h + delbar h this is alpha = i (h_t ds - h_s dt),
/// the sign for which u = e^{-h} psi is A-holomorphic.
inline std::array<double, 2> connection_form(const VortexSolution& sol, std::size_t idx) {
  const auto& gh = sol.grad_h(idx);
  return {gh[1], -gh[0]};
}

/// F_A / (i ds^dt) = d_s a_t - d_t a_s, differencing the nodal connection form.
inline double curvature(const VortexSolution& sol, std::size_t idx, int stride = 1) {
  const PolarGrid& g = sol.grid();
  const auto comp = [&](int c) {
    return [&, c](int i, int k) { return connection_form(sol, g.index(i, k))[static_cast<std::size_t>(c)]; };
  };
  const auto grad_as = detail::nodal_gradient<double>(g, comp(0), g.ring_of(idx), g.angle_of(idx), stride);
  const auto grad_at = detail::nodal_gradient<double>(g, comp(1), g.ring_of(idx), g.angle_of(idx), stride);
  return grad_at[0] - grad_as[1];
}

/// Real scalar (1 - |u|^2) / 2 of the moment map.
inline double moment_map(const VortexSolution& sol, std::size_t idx) {
  double n2 = 0.0;
  for (const auto& v : sol.u(idx)) n2 += std::norm(v);
  return 0.5 * (1.0 - n2);
}

/// Defect of the second vortex equation F_A / i = (|u|^2 - 1) / 2 at a node.
inline double bogomolny_defect(const VortexSolution& sol, std::size_t idx) {
  return curvature(sol, idx) + moment_map(sol, idx);
}

struct EnergyRoutes {
  double analytic = 0.0;   // 2 |e^{-h} (psi' - 2 h_z psi)|^2 + (|u|^2 - 1)^2 / 2
  double covariant = 0.0;  // |du + alpha u|^2 + (|u|^2 - 1)^2 / 2 by differences
  double estimate = 0.0;   // summed change of both routes on the doubled stencil
};

namespace detail {

/// Gauge-covariant gradient (D_s u_j, D_t u_j) of D = d + alpha: neighbours
/// are parallel-transported to the node with link phases exp(i int a) (the
/// integral by the trapezoid rule) before differencing, so the stencil error
/// involves only gauge-invariant derivatives.
inline std::array<cplx, 2> covariant_gradient(const VortexSolution& sol, std::size_t j, int i, int k, int stride);

inline double covariant_energy(const VortexSolution& sol, std::size_t idx, int stride) {
  const PolarGrid& g = sol.grid();
  double sum = 0.0;
  for (std::size_t j = 0; j < sol.u(idx).size(); ++j) {
    const auto du = covariant_gradient(sol, j, g.ring_of(idx), g.angle_of(idx), stride);
    sum += std::norm(du[0]) + std::norm(du[1]);
  }
  const double mu = moment_map(sol, idx);
  return sum + 2.0 * mu * mu;
}

inline std::array<cplx, 2> covariant_gradient(const VortexSolution& sol, std::size_t j, int i, int k, int stride) {
  const PolarGrid& g = sol.grid();
  const int m = g.n_theta();
  const auto alpha = [&](int ii, int kk) { return connection_form(sol, g.index(ii, kk)); };
  const auto uj = [&](int ii, int kk) { return sol.u(g.index(ii, kk))[j]; };
  const auto along = [](const std::array<double, 2>& a, double th) { return std::cos(th) * a[0] + std::sin(th) * a[1]; };
  const auto transport = [](double phase) { return std::polar(1.0, phase); };
  const auto a0 = alpha(0, 0);

  if (i == 0) {
    const double rs = g.r(stride);
    cplx gx{};
    cplx gy{};
    for (int q = 0; q < m; ++q) {
      const double th = g.theta(q);
      const double link = 0.5 * rs * (along(a0, th) + along(alpha(stride, q), th));
      const cplx v = transport(link) * uj(stride, q);
      gx += v * std::cos(th);
      gy += v * std::sin(th);
    }
    const double scale = 2.0 / (m * rs);
    return {gx * scale, gy * scale};
  }

  const double th = g.theta(k);
  const double r = g.r(i);
  const double a_here = along(alpha(i, k), th);
  const auto nodes = radial_stencil(g, i, stride);
  std::array<double, 3> x{};
  for (std::size_t a = 0; a < 3; ++a) x[a] = signed_radius(g, nodes[a]);
  const auto w = quadratic_derivative_weights(x, r);
  cplx dr{};
  for (std::size_t a = 0; a < 3; ++a) {
    const int s = nodes[a];
    const int ring = std::abs(s);
    const int kk = s >= 0 ? k : k + m / 2;
    const double a_there = along(alpha(ring, kk), th);
    double link = 0.0;
    if (s >= 0) {
      link = 0.5 * (x[a] - r) * (a_there + a_here);
    } else {
      const double a_centre = along(a0, th);
      link = -0.5 * r * (a_centre + a_here) + 0.5 * x[a] * (a_there + a_centre);
    }
    dr += w[a] * transport(link) * uj(ring, kk);
  }
  const auto a_theta = [&](int kk) {
    const double t = g.theta(kk);
    const auto a = alpha(i, kk);
    return r * (-std::sin(t) * a[0] + std::cos(t) * a[1]);
  };
  const double span = stride * g.dtheta();
  const double here = a_theta(k);
  const double link_plus = 0.5 * span * (a_theta(k + stride) + here);
  const double link_minus = -0.5 * span * (a_theta(k - stride) + here);
  const cplx dth = (transport(link_plus) * uj(i, k + stride) - transport(link_minus) * uj(i, k - stride)) / (2.0 * span);
  const double c = std::cos(th);
  const double sn = std::sin(th);
  return {dr * c - dth * (sn / r), dr * sn + dth * (c / r)};
}

}  // namespace detail

namespace detail {

inline double analytic_energy(const VortexSolution& sol, std::size_t idx, const std::array<double, 2>& gh) {
  const cplx z = sol.grid().point(idx);
  const cplx hz = 0.5 * cplx(gh[0], -gh[1]);
  const double scale = std::exp(-static_cast<double>(sol.h()[idx]));
  double sum = 0.0;
  for (int j = 0; j < sol.pair().n(); ++j) {
    const CPoly& p = sol.pair()[j];
    sum += 2.0 * std::norm(scale * (p.derivative()(z) - 2.0 * hz * p(z)));
  }
  const double mu = moment_map(sol, idx);
  return sum + 2.0 * mu * mu;
}

}  // namespace detail

inline EnergyRoutes energy_routes(const VortexSolution& sol, std::size_t idx) {
  const PolarGrid& g = sol.grid();
  const auto hv = [&](int i, int k) { return static_cast<double>(sol.h().at(i, k)); };
  const auto coarse_grad = detail::nodal_gradient<double>(g, hv, g.ring_of(idx), g.angle_of(idx), 2);
  EnergyRoutes out;
  out.analytic = detail::analytic_energy(sol, idx, sol.grad_h(idx));
  out.covariant = detail::covariant_energy(sol, idx, 1);
  out.estimate = std::fabs(out.covariant - detail::covariant_energy(sol, idx, 2)) +
                 std::fabs(out.analytic - detail::analytic_energy(sol, idx, coarse_grad));
  return out;
}

inline constexpr double kDerivativeSafety = 10.0;

/// Energy density |d_A u|^2 + (|u|^2 - 1)^2 / 2, reported from the analytic
/// route after checking it against covariant differences.
inline double energy_density(const VortexSolution& sol, std::size_t idx) {
  const EnergyRoutes e = energy_routes(sol, idx);
  const double tol = kDerivativeSafety * e.estimate + 1e-9 * (1.0 + e.analytic);
  require(std::fabs(e.analytic - e.covariant) <= tol, ErrorCode::DerivativeMismatch,
          "energy density routes disagree at node " + std::to_string(idx) + ": " + std::to_string(e.analytic) + " vs " +
              std::to_string(e.covariant));
  return e.analytic;
}

inline std::vector<double> energy_field(const VortexSolution& sol) {
  std::vector<double> out(sol.grid().size());
  for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = energy_density(sol, idx);
  return out;
}

struct PowerFit {
  double coefficient = 0.0;  // C in e ~ C r^{-s}
  double slope = 0.0;        // -s
};

/// Ring means below this are treated as zero energy (trivial vortex).
inline constexpr double kNegligibleEnergy = 1e-16;

/// Least-squares fit of log(ring mean of e) against log r for rings with
/// r in [lo, hi]; empty when fewer than 3 rings carry non-negligible energy.
inline std::optional<PowerFit> fit_power_law(const PolarGrid& g, const std::vector<double>& e, double lo, double hi) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 1; i <= g.n_r(); ++i) {
    if (g.r(i) < lo || g.r(i) > hi) continue;
    double mean = 0.0;
    for (int k = 0; k < g.n_theta(); ++k) mean += e[g.index(i, k)];
    mean /= g.n_theta();
    if (!(mean > kNegligibleEnergy)) return std::nullopt;
    xs.push_back(std::log(g.r(i)));
    ys.push_back(std::log(mean));
  }
  if (xs.size() < 3) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    sx += xs[a];
    sy += ys[a];
    sxx += xs[a] * xs[a];
    sxy += xs[a] * ys[a];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return PowerFit{std::exp(intercept), slope};
}

struct EnergyBreakdown {
  double core = 0.0;  // quadrature over the disk
  double tail = 0.0;  // closed-form integral of the fitted power law beyond R
  std::optional<double> decay_slope;
  double total() const { return core + tail; }
};

/// Core quadrature plus the tail 2 pi C R^{2-s} / (s - 2) of the power law
/// fitted on the outer annulus R/2 <= |z| <= R (no tail if the fit is absent
/// or s <= 2). The reported decay slope comes from the inner annulus
/// R/4 <= |z| <= R/2, away from the Dirichlet ring.
inline EnergyBreakdown energy_breakdown(const VortexSolution& sol, const std::vector<double>& e) {
  const PolarGrid& g = sol.grid();
  EnergyBreakdown out;
  for (std::size_t idx = 0; idx < g.size(); ++idx) out.core += e[idx] * g.weight(idx);
  const double R = g.radius();
  if (const auto fit = fit_power_law(g, e, R / 4.0, R / 2.0)) out.decay_slope = fit->slope;
  if (const auto fit = fit_power_law(g, e, R / 2.0, R)) {
    const double s = -fit->slope;
    if (s > 2.0) out.tail = 2.0 * M_PI * fit->coefficient * std::pow(R, 2.0 - s) / (s - 2.0);
  }
  return out;
}

inline EnergyBreakdown energy_breakdown(const VortexSolution& sol) { return energy_breakdown(sol, energy_field(sol)); }

inline double total_energy(const VortexSolution& sol) { return energy_breakdown(sol).total(); }

inline constexpr double kEvInfTolerance = 1e-2;

/// Top eigenvector of the boundary average of the projector u u^* / |u|^2.
inline ProjPoint boundary_direction(const VortexSolution& sol) {
  const PolarGrid& g = sol.grid();
  const int n = sol.pair().n();
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < g.n_theta(); ++k) {
    const auto& u = sol.u(g.index(g.n_r(), k));
    Eigen::VectorXcd v(n);
    for (int j = 0; j < n; ++j) v[j] = u[static_cast<std::size_t>(j)];
    const double n2 = v.squaredNorm();
    if (n2 > 0.0) avg += v * v.adjoint() / n2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(avg);
  const Eigen::VectorXcd top = eig.eigenvectors().col(n - 1);
  return ProjPoint::from(std::vector<cplx>(top.data(), top.data() + n));
}

/// Evaluation at infinity: the class of the leading coefficient vector,
/// confirmed against the Higgs field on the boundary circle.
inline ProjPoint ev_infinity(const VortexSolution& sol) {
  const ProjPoint exact = ProjPoint::from(leading_vector(sol.pair()));
  const ProjPoint numeric = boundary_direction(sol);
  const double dist = fubini_study_distance(exact, numeric);
  require(dist < kEvInfTolerance, ErrorCode::EvInfMismatch,
          "boundary Higgs field is " + std::to_string(dist) + " away from the leading coefficients");
  return exact;
}

struct Observables {
  int d = 0;
  double energy = 0.0;
  double energy_tail = 0.0;
  std::optional<double> decay_slope;
  ProjPoint ev_inf;
  double max_moment_boundary = 0.0;
};

inline Observables observables(const VortexSolution& sol) {
  const auto e = energy_field(sol);
  const auto br = energy_breakdown(sol, e);
  const PolarGrid& g = sol.grid();
  double mu = 0.0;
  for (int k = 0; k < g.n_theta(); ++k) mu = std::max(mu, std::fabs(moment_map(sol, g.index(g.n_r(), k))));
  return {sol.d(), br.total(), br.tail, br.decay_slope, ev_infinity(sol), mu};
}

}  // namespace affvortex
