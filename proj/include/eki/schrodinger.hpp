#pragma once

// Nonlinear layer for the stationary Schroedinger problem
//
//   -1/2 u'' + f u = 0 on (0, 2*pi),   u(0) = g_0,  u(2*pi) = g_1.
//
// With v = -u'' restricted to u - g~ (g~ the harmonic, i.e. linear, lift of
// the boundary data) we have u = K v + g~ and hence f = -v / (2 (K v + g~)).
// The finite-difference solver below shares no spectral machinery with the
// pull-back and serves as its independent oracle.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "eki/error.hpp"
#include "eki/rng.hpp"
#include "eki/seq_model.hpp"
#include "eki/spectral.hpp"

namespace eki {

/// kRoundTrip: f = -v / (2(Kv + g~)), consistent with the PDE.
/// kPlus:      f = +v / (2(Kv + g~)).
enum class SignConvention { kRoundTrip, kPlus };

struct PullbackConfig {
  double guard_relative = 1e-8;  // points with |Kv + g~| < guard * max|Kv + g~| map to 0
  SignConvention sign = SignConvention::kRoundTrip;
  bool half_laplacian = true;    // -1/2 u'' (factor 2 in the ratio) vs -u''

  double sign_factor() const { return sign == SignConvention::kRoundTrip ? -1.0 : 1.0; }
  double laplacian_factor() const { return half_laplacian ? 2.0 : 1.0; }
};

struct PDEInstance {
  std::function<double(double)> potential;  // f >= 0
  double g_left = 0.0;
  double g_right = 0.0;
  bool half_laplacian = true;
};

struct PullbackResult {
  GridFunction f;
  std::vector<bool> guarded;

  std::size_t guarded_count() const {
    std::size_t c = 0;
    for (bool g : guarded) c += g ? 1 : 0;
    return c;
  }
};

/// Linear interpolation of the boundary data (harmonic for -d^2/dx^2).
inline GridFunction harmonic_lift(double g_left, double g_right, const Grid& grid) {
  Eigen::VectorXd values = grid.points().unaryExpr(
      [&](double x) { return g_left + (g_right - g_left) * x / kDomainLength; });
  return GridFunction(grid, std::move(values));
}

inline GridFunction zero_function(const Grid& grid) {
  return GridFunction(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
}

/// Pull-back with the guard mask exposed.
inline PullbackResult pullback(const SpectralBasis& basis, const SeqVector& v, const GridFunction& gtilde,
                               const PullbackConfig& cfg) {
  detail::require(cfg.guard_relative > 0.0, "pullback: guard must be positive");
  detail::require(v.allFinite(), "pullback: coefficients must be finite");
  const Grid& grid = gtilde.grid;
  const GridFunction vx = synthesize(basis, v, grid);
  const GridFunction kvx = synthesize(basis, apply_forward(basis, v), grid);
  const Eigen::VectorXd denom = kvx.values + gtilde.values;
  const double floor = cfg.guard_relative * denom.cwiseAbs().maxCoeff();

  Eigen::VectorXd f = Eigen::VectorXd::Zero(denom.size());
  std::vector<bool> guarded(static_cast<std::size_t>(denom.size()), false);
  const double scale = cfg.sign_factor() / cfg.laplacian_factor();
  for (Eigen::Index j = 0; j < denom.size(); ++j) {
    if (!(std::abs(denom[j]) > floor)) {
      guarded[static_cast<std::size_t>(j)] = true;
      continue;
    }
    f[j] = scale * vx.values[j] / denom[j];
  }
  return {GridFunction(grid, std::move(f)), std::move(guarded)};
}

/// f(x_j) = s v(x_j) / (2 (K v(x_j) + g~(x_j))), zero where the guard trips.
inline GridFunction solution_map_e(const SpectralBasis& basis, const SeqVector& v, const GridFunction& gtilde,
                                   const Grid& grid, const PullbackConfig& cfg) {
  detail::require(gtilde.grid.size() == grid.size(), "solution_map_e: g~ lives on a different grid");
  return pullback(basis, v, gtilde, cfg).f;
}

/**
 * Second-order central differences on the interior grid of size m with
 * Dirichlet data, solved by the Thomas algorithm.
 */
inline GridFunction fd_solve_schrodinger(const PDEInstance& inst, std::size_t m) {
  detail::require(m >= 16, "fd_solve_schrodinger: need m >= 16");
  detail::require(static_cast<bool>(inst.potential), "fd_solve_schrodinger: missing potential");
  const Grid grid(m);
  const double h = grid.spacing();
  const double a = (inst.half_laplacian ? 0.5 : 1.0) / (h * h);

  const auto n = static_cast<Eigen::Index>(m);
  Eigen::VectorXd diag(n), rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double f = inst.potential(grid.points()[j]);
    detail::require(std::isfinite(f), "fd_solve_schrodinger: potential not finite");
    diag[j] = 2.0 * a + f;
  }
  rhs[0] += a * inst.g_left;
  rhs[n - 1] += a * inst.g_right;

  // Thomas elimination; off-diagonals are all -a.
  Eigen::VectorXd c(n), d(n);
  double pivot = diag[0];
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j > 0) pivot = diag[j] + a * c[j - 1];
    if (!(std::abs(pivot) > 1e-14 * a)) throw WellPosednessError("fd_solve_schrodinger: singular system");
    c[j] = -a / pivot;
    d[j] = (rhs[j] + (j > 0 ? a * d[j - 1] : 0.0)) / pivot;
  }
  Eigen::VectorXd u(n);
  u[n - 1] = d[n - 1];
  for (Eigen::Index j = n - 2; j >= 0; --j) u[j] = d[j] - c[j] * u[j + 1];
  return GridFunction(grid, std::move(u));
}

/// Samples inst.potential on `grid`.
inline GridFunction sample_potential(const PDEInstance& inst, const Grid& grid) {
  return GridFunction(grid, grid.points().unaryExpr([&](double x) { return inst.potential(x); }));
}

/**
 * Solve, linearise spectrally (v_i = lambda_i <u - g~, phi_i>, i <= D), pull back
 * and compare: max |f_hat - f| over unguarded points divided by max |f|
 * (plain max error when f vanishes identically).
 */
inline double round_trip_error(const PDEInstance& inst, std::size_t m, const SpectralBasis& basis, std::size_t dim,
                               const PullbackConfig& cfg) {
  const GridFunction u = fd_solve_schrodinger(inst, m);
  const Grid& grid = u.grid;
  const GridFunction lift = harmonic_lift(inst.g_left, inst.g_right, grid);
  const GridFunction w(grid, u.values - lift.values);
  const SeqVector coeffs = analyze(basis, w, dim);
  const SeqVector v = basis.eigenvalues().head(coeffs.size()).cwiseProduct(coeffs);

  PullbackConfig c = cfg;
  c.half_laplacian = inst.half_laplacian;
  const PullbackResult back = pullback(basis, v, lift, c);
  const GridFunction f = sample_potential(inst, grid);

  double err = 0.0;
  for (Eigen::Index j = 0; j < f.values.size(); ++j)
    if (!back.guarded[static_cast<std::size_t>(j)]) err = std::max(err, std::abs(back.f.values[j] - f.values[j]));
  const double ref = f.values.cwiseAbs().maxCoeff();
  return ref > 0.0 ? err / ref : err;
}

/**
 * Largest observed ratio |e(v1) - e(v2)| / |v1 - v2| (grid L^2 norms, g~ = 0)
 * over `samples` pairs drawn uniformly from the coefficient ball of `radius`
 * around `center`. Pairs touching the guard are skipped.
 */
inline double lipschitz_probe(const SpectralBasis& basis, const SeqVector& center, double radius,
                              std::size_t samples, const Grid& grid, const PullbackConfig& cfg, std::uint64_t seed) {
  detail::require(radius > 0.0, "lipschitz_probe: radius must be positive");
  detail::require(samples >= 1, "lipschitz_probe: need at least one sample");
  auto gen = make_stream(seed, StreamPurpose::kProbe);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const auto dim = center.size();
  const double inv_dim = 1.0 / static_cast<double>(dim);

  auto draw = [&] {
    SeqVector dir(dim);
    for (Eigen::Index i = 0; i < dim; ++i) dir[i] = normal(gen);
    const double r = radius * std::pow(unit(gen), inv_dim);
    return SeqVector(center + (r / dir.norm()) * dir);
  };

  const GridFunction lift = zero_function(grid);
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const SeqVector v1 = draw();
    const SeqVector v2 = draw();
    const PullbackResult e1 = pullback(basis, v1, lift, cfg);
    const PullbackResult e2 = pullback(basis, v2, lift, cfg);
    if (e1.guarded_count() > 0 || e2.guarded_count() > 0) continue;
    const double dv = synthesize(basis, SeqVector(v1 - v2), grid).l2_norm();
    if (!(dv > 0.0)) continue;
    const double df = GridFunction(grid, e1.f.values - e2.f.values).l2_norm();
    best = std::max(best, df / dv);
    ++used;
  }
  if (used == 0) throw ProbeUndefined("lipschitz_probe: every sample hit the guard");
  return best;
}

}  // namespace eki
