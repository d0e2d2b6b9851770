#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "affvortex/error.hpp"
#include "affvortex/grid.hpp"
#include "affvortex/poly.hpp"

namespace affvortex {

struct SolverConfig {
  double tol_residual = 1e-10;
  int max_newton = 50;
  double min_step = 1.0 / 64.0;
  double linear_tol = 1e-8;
  int max_cg = 0;  // 0 selects 10 * n_r * n_theta

  void validate() const {
    require(tol_residual > 0.0 && tol_residual < 1e-4, ErrorCode::InvalidInput, "tol_residual must lie in (0, 1e-4)");
    require(max_newton > 0, ErrorCode::InvalidInput, "max_newton must be positive");
    require(min_step > 0.0 && min_step <= 1.0, ErrorCode::InvalidInput, "min_step must lie in (0, 1]");
    require(linear_tol > 0.0 && linear_tol < 1.0, ErrorCode::InvalidInput, "linear_tol must lie in (0, 1)");
    require(max_cg >= 0, ErrorCode::InvalidInput, "max_cg must be non-negative");
  }
};

enum class InitialGuess {
  LogWeightPlusOne,   // h0 = log(W + 1) / 2
  BoundaryExtension,  // boundary values continued inward along rays
};

/// W(z) = sum_j |psi_j(z)|^2 on the grid.
inline ScalarField weight_field(const NPair& pair, std::shared_ptr<const PolarGrid> grid) {
  return sample_function(std::move(grid), [&](cplx z) { return weight(pair, z); });
}

namespace kw {

inline constexpr real kExpClamp = 700.0L;

/// e^{-2h} W with the exponent argument clamped to [-700, 700].
inline real coupling(real h, real w) {
  if (w <= 0.0L) return 0.0L;
  return std::exp(std::clamp(std::log(w) - 2.0L * h, -kExpClamp, kExpClamp));
}

/// Finite-volume weights of the 5-point polar Laplacian. Row i couples to
/// ring i + 1 through radial[i] and to its angular neighbours through
/// angular[i]; dividing by the node area gives the Laplacian. The centre row
/// reduces to 4 (mean of ring 1 - h_0) / r_1^2.
struct Stencil {
  std::vector<real> radial;
  std::vector<real> angular;
  std::vector<real> area;

  explicit Stencil(const PolarGrid& g) {
    const int n = g.n_r();
    radial.resize(static_cast<std::size_t>(n));
    angular.assign(static_cast<std::size_t>(n) + 1, 0.0L);
    area.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) radial[static_cast<std::size_t>(i)] = g.r_half(i) * g.dtheta() / (g.r(i + 1) - g.r(i));
    for (int i = 1; i < n; ++i)
      angular[static_cast<std::size_t>(i)] = (g.r_half(i) - g.r_half(i - 1)) / (g.r(i) * g.dtheta());
    for (int i = 0; i <= n; ++i) area[static_cast<std::size_t>(i)] = g.node_area(i);
  }
};

/// Discrete Laplacian at every interior node; boundary entries are zero.
inline ScalarField laplacian(const ScalarField& h, const Stencil& st) {
  const PolarGrid& g = h.grid();
  const int n = g.n_r();
  const int m = g.n_theta();
  ScalarField out(h.grid_ptr());
  real flux = 0.0L;
  for (int k = 0; k < m; ++k) flux += h.at(1, k) - h[0];
  out[0] = st.radial[0] * flux / st.area[0];
  for (int i = 1; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    for (int k = 0; k < m; ++k) {
      const real c = h.at(i, k);
      const real s = st.radial[iu] * (h.at(i + 1, k) - c) - st.radial[iu - 1] * (c - h.at(i - 1, k)) +
                     st.angular[iu] * (h.at(i, k + 1) - 2.0L * c + h.at(i, k - 1));
      out.at(i, k) = s / st.area[iu];
    }
  }
  return out;
}

inline ScalarField residual(const ScalarField& h, const ScalarField& w, const Stencil& st) {
  ScalarField out = laplacian(h, st);
  const std::size_t interior = h.grid().interior_size();
  for (std::size_t idx = 0; idx < interior; ++idx) out[idx] += 0.5L * (coupling(h[idx], w[idx]) - 1.0L);
  return out;
}

/// J delta = Laplacian(delta) - e^{-2h} W delta at interior nodes, with delta
/// taken as zero on the Dirichlet ring.
inline ScalarField apply_jacobian(const ScalarField& h, const ScalarField& w, const ScalarField& delta, const Stencil& st) {
  ScalarField d = delta;
  const PolarGrid& g = h.grid();
  for (int k = 0; k < g.n_theta(); ++k) d.at(g.n_r(), k) = 0.0L;
  ScalarField out = laplacian(d, st);
  for (std::size_t idx = 0; idx < g.interior_size(); ++idx) out[idx] -= coupling(h[idx], w[idx]) * d[idx];
  return out;
}

/// Area-weighted negative Laplacian on interior unknowns (symmetric, SPD).
inline Eigen::SparseMatrix<double> assemble_negative_laplacian(const PolarGrid& g, const Stencil& st) {
  const int n = g.n_r();
  const int m = g.n_theta();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.interior_size() * 5);
  auto add = [&](std::size_t a, std::size_t b, real v) {
    trip.emplace_back(static_cast<int>(a), static_cast<int>(b), static_cast<double>(v));
  };
  for (int k = 0; k < m; ++k) {
    const std::size_t ring = g.index(1, k);
    add(0, 0, st.radial[0]);
    add(0, ring, -st.radial[0]);
    add(ring, 0, -st.radial[0]);
    add(ring, ring, st.radial[0]);
  }
  for (int i = 1; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    for (int k = 0; k < m; ++k) {
      const std::size_t a = g.index(i, k);
      // radial face to ring i + 1 (Dirichlet neighbour contributes only to the diagonal)
      add(a, a, st.radial[iu]);
      if (i + 1 < n) {
        const std::size_t b = g.index(i + 1, k);
        add(a, b, -st.radial[iu]);
        add(b, a, -st.radial[iu]);
        add(b, b, st.radial[iu]);
      }
      const std::size_t c = g.index(i, k + 1);
      add(a, a, st.angular[iu]);
      add(c, c, st.angular[iu]);
      add(a, c, -st.angular[iu]);
      add(c, a, -st.angular[iu]);
    }
  }
  Eigen::SparseMatrix<double> mat(static_cast<int>(g.interior_size()), static_cast<int>(g.interior_size()));
  mat.setFromTriplets(trip.begin(), trip.end());
  return mat;
}

inline real interior_sup(const ScalarField& f) {
  return f.sup_norm(0, f.grid().n_r() - 1);
}

inline std::string format_norm(real v) {
  std::ostringstream os;
  os.precision(3);
  os << static_cast<double>(v);
  return os.str();
}

}  // namespace kw

/// Residual of Delta h + (e^{-2h} W - 1) / 2 = 0 at interior nodes; the
/// Dirichlet ring carries zero.
inline ScalarField residual(const ScalarField& h, const NPair& pair) {
  const kw::Stencil st(h.grid());
  return kw::residual(h, weight_field(pair, h.grid_ptr()), st);
}

struct SolveReport {
  ScalarField h;
  int newton_iterations = 0;
  long cg_iterations = 0;
  std::vector<double> residual_history;  // sup norm before each step and at exit
  std::vector<double> step_sizes;
};

namespace detail {

inline void check_boundary(const NPair& pair, const PolarGrid& g, const ScalarField& w) {
  for (int k = 0; k < g.n_theta(); ++k)
    require(w.at(g.n_r(), k) > 0.0L && std::isfinite(std::log(w.at(g.n_r(), k))), ErrorCode::BoundaryInvalid,
            "W vanishes on the boundary circle");
  for (const auto& bp : base_locus(pair))
    require(std::abs(bp.z - g.centre()) < g.radius(), ErrorCode::BoundaryInvalid,
            "base point at |z - centre| >= R lies outside the disk");
}

inline ScalarField initial_field(InitialGuess guess, const ScalarField& w) {
  const PolarGrid& g = w.grid();
  ScalarField h(w.grid_ptr());
  if (guess == InitialGuess::LogWeightPlusOne) {
    for (std::size_t idx = 0; idx < g.size(); ++idx) h[idx] = 0.5L * std::log(w[idx] + 1.0L);
    return h;
  }
  real mean = 0.0L;
  for (int k = 0; k < g.n_theta(); ++k) {
    const real edge = 0.5L * std::log(w.at(g.n_r(), k));
    mean += edge;
    for (int i = 1; i <= g.n_r(); ++i) h.at(i, k) = edge;
  }
  h[0] = mean / g.n_theta();
  return h;
}

}  // namespace detail

/// Damped Newton iteration for the Kazdan-Warner equation on the disk with
/// Dirichlet data h = log(W) / 2 on |z - centre| = R. Each step solves the
/// area-weighted system (-J) delta = F by Jacobi-preconditioned CG in double
/// precision while the field and residual stay in extended precision.
inline SolveReport solve_kw_detailed(const NPair& pair, std::shared_ptr<const PolarGrid> grid, const SolverConfig& cfg,
                                     const std::optional<ScalarField>& start, InitialGuess guess) {
  cfg.validate();
  const PolarGrid& g = *grid;
  const ScalarField w = weight_field(pair, grid);
  detail::check_boundary(pair, g, w);
  const kw::Stencil st(g);

  ScalarField h = start ? *start : detail::initial_field(guess, w);
  require(h.grid().same_shape(g), ErrorCode::InvalidInput, "initial field lives on a different grid");
  for (int k = 0; k < g.n_theta(); ++k) h.at(g.n_r(), k) = 0.5L * std::log(w.at(g.n_r(), k));

  const Eigen::SparseMatrix<double> base = kw::assemble_negative_laplacian(g, st);
  const int unknowns = static_cast<int>(g.interior_size());
  const int max_cg = cfg.max_cg > 0 ? cfg.max_cg : 10 * g.n_r() * g.n_theta();

  SolveReport report{h, 0, 0, {}, {}};
  ScalarField f = kw::residual(h, w, st);
  real norm = kw::interior_sup(f);
  report.residual_history.push_back(static_cast<double>(norm));

  while (norm > cfg.tol_residual) {
    require(report.newton_iterations < cfg.max_newton, ErrorCode::NewtonStalled,
            "no convergence after " + std::to_string(cfg.max_newton) + " Newton steps (residual " +
                kw::format_norm(norm) + ")");

    Eigen::SparseMatrix<double> mat = base;
    Eigen::VectorXd rhs(unknowns);
    for (int a = 0; a < unknowns; ++a) {
      const auto idx = static_cast<std::size_t>(a);
      const real area = st.area[static_cast<std::size_t>(g.ring_of(idx))];
      mat.coeffRef(a, a) += static_cast<double>(area * kw::coupling(h[idx], w[idx]));
      rhs[a] = static_cast<double>(area * f[idx]);
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg.linear_tol);
    cg.setMaxIterations(max_cg);
    cg.compute(mat);
    const Eigen::VectorXd delta = cg.solve(rhs);
    report.cg_iterations += cg.iterations();
    require(cg.info() == Eigen::Success, ErrorCode::LinearSolveFailed,
            "CG did not reach relative tolerance within " + std::to_string(max_cg) + " iterations");

    double step = 1.0;
    bool accepted = false;
    while (step >= cfg.min_step) {
      ScalarField trial = h;
      for (int a = 0; a < unknowns; ++a) trial[static_cast<std::size_t>(a)] += static_cast<real>(step) * delta[a];
      ScalarField trial_f = kw::residual(trial, w, st);
      const real trial_norm = kw::interior_sup(trial_f);
      if (std::isfinite(trial_norm) && trial_norm < norm) {
        h = std::move(trial);
        f = std::move(trial_f);
        norm = trial_norm;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    require(accepted, ErrorCode::NewtonStalled,
            "line search could not reduce the residual below " + kw::format_norm(norm) + " after " +
                std::to_string(report.newton_iterations) + " steps");
    ++report.newton_iterations;
    report.step_sizes.push_back(step);
    report.residual_history.push_back(static_cast<double>(norm));
  }
  report.h = std::move(h);
  return report;
}

inline ScalarField solve_kw(const NPair& pair, std::shared_ptr<const PolarGrid> grid, const SolverConfig& cfg = {},
                            InitialGuess guess = InitialGuess::LogWeightPlusOne) {
  return solve_kw_detailed(pair, std::move(grid), cfg, std::nullopt, guess).h;
}

}  // namespace affvortex
