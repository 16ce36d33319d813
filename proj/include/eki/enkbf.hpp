#pragma once

// Deterministic discrete-time ensemble Kalman-Bucy filter for the diagonal
// sequence model, with discrepancy-principle stopping.
//
// One step, with gain fixed from the pre-update moments:
//
//   K_k       = dt C_k (dt S_k + R)^{-1}
//   v_{k+1}^j = v_k^j - 1/2 K_k (K v_k^j + m_{K,k} - 2 Y)
//
// C_k is the ensemble cross-covariance of (v, Kv), S_k the covariance of Kv
// and R = I/n the observation noise covariance. Then k*dt tracks the
// homotopy time tau of the tempered posterior.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "eki/error.hpp"
#include "eki/io.hpp"
#include "eki/rng.hpp"
#include "eki/seq_model.hpp"
#include "eki/spectral.hpp"

namespace eki {

/// Particles stored column-wise: particles.col(j) is v^(j), a D-vector.
struct Ensemble {
  Eigen::MatrixXd particles;
  std::size_t k = 0;
  double dt = 0.01;

  std::size_t dim() const { return static_cast<std::size_t>(particles.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(particles.cols()); }
  double tau() const { return static_cast<double>(k) * dt; }
  SeqVector mean() const { return particles.rowwise().mean(); }
};

struct EmpiricalMoments {
  SeqVector mean;             // m^J
  SeqVector forward_mean;     // m^J_K
  Eigen::MatrixXd cov;        // C^J,   cov(v, v)
  Eigen::MatrixXd cross_cov;  // cov(v, Kv)
  Eigen::MatrixXd forward_cov;  // S^J, cov(Kv, Kv)
};

struct StopReport {
  std::size_t k_dp = 0;
  double tau_dp = 0.0;
  std::vector<double> residual_path;  // R_0 .. R_{k_dp}
  bool hit_cap = false;
};

struct FilterRun {
  Ensemble ensemble;
  StopReport report;
};

/// J independent draws from N(0, prior.scale * C0). Particle-major draw order.
inline Ensemble init_ensemble(std::size_t particles, const PriorSpec& prior, std::uint64_t seed, double dt = 0.01,
                              std::uint64_t replicate = 0, std::uint64_t slot = 0) {
  if (particles < 2) throw InvalidArgument("init_ensemble: need at least two particles");
  detail::require(prior.scale >= 0.0, "init_ensemble: prior scale must be non-negative");
  const Eigen::VectorXd sd = prior.variances().cwiseSqrt();
  Ensemble ens;
  ens.dt = dt;
  ens.particles.resize(static_cast<Eigen::Index>(prior.dim), static_cast<Eigen::Index>(particles));
  auto gen = make_stream(seed, StreamPurpose::kEnsemble, replicate, slot);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < ens.particles.cols(); ++j)
    for (Eigen::Index i = 0; i < ens.particles.rows(); ++i) ens.particles(i, j) = sd[i] * normal(gen);
  return ens;
}

/// Ensemble means and (J-1)-normalised covariances.
inline EmpiricalMoments empirical_moments(const SpectralBasis& basis, const Ensemble& ens) {
  const auto J = ens.particles.cols();
  if (J < 2) throw InvalidArgument("empirical_moments: need at least two particles");
  if (ens.dim() > basis.dim()) throw InvalidArgument("empirical_moments: ensemble dimension exceeds basis");

  EmpiricalMoments m;
  const auto D = ens.particles.rows();
  const Eigen::VectorXd kap = basis.singular_values().head(D);
  m.mean = ens.particles.rowwise().mean();
  m.forward_mean = kap.cwiseProduct(m.mean);
  const Eigen::MatrixXd dv = ens.particles.colwise() - m.mean;
  // K is diagonal, so cov(v, Kv) = C K and cov(Kv, Kv) = K C K.
  m.cov = Eigen::MatrixXd::Zero(D, D);
  m.cov.selfadjointView<Eigen::Lower>().rankUpdate(dv, 1.0 / static_cast<double>(J - 1));
  m.cov.triangularView<Eigen::StrictlyUpper>() = m.cov.transpose();
  m.cross_cov = m.cov * kap.asDiagonal();
  m.forward_cov = kap.asDiagonal() * m.cross_cov;
  return m;
}

/// K = dt * C (dt * S + noise_variance * I)^{-1}, via a Cholesky solve.
inline Eigen::MatrixXd kalman_gain(const EmpiricalMoments& moments, double dt, double noise_variance = 1.0) {
  detail::require(dt >= 0.0, "kalman_gain: dt must be non-negative");
  detail::require(noise_variance > 0.0, "kalman_gain: noise variance must be positive");
  const auto dim = moments.forward_cov.rows();
  if (dt == 0.0) return Eigen::MatrixXd::Zero(moments.cross_cov.rows(), dim);

  Eigen::MatrixXd system = dt * moments.forward_cov;
  system.diagonal().array() += noise_variance;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalFailure("kalman_gain: Cholesky factorisation failed");
  // system is symmetric, so K^T = system^{-1} (dt C)^T.
  return llt.solve(dt * moments.cross_cov.transpose()).transpose();
}

/// Advances `ens` by one filter step in place.
inline void advance(const SpectralBasis& basis, Ensemble& ens, const ObservationSet& obs) {
  if (ens.dim() != obs.dim()) throw InvalidArgument("enkbf_step: ensemble and data dimensions differ");
  const EmpiricalMoments m = empirical_moments(basis, ens);
  const Eigen::MatrixXd gain = kalman_gain(m, ens.dt, obs.noise_variance());
  const Eigen::VectorXd kap = basis.singular_values().head(ens.particles.rows());

  // K v^j + m_K - 2Y, column by column.
  Eigen::MatrixXd innovation = kap.asDiagonal() * ens.particles;
  innovation.colwise() += m.forward_mean - 2.0 * obs.ytilde;
  ens.particles.noalias() -= 0.5 * gain * innovation;
  ++ens.k;

  if (!ens.particles.allFinite())
    throw DivergenceError("enkbf_step: non-finite particles at k=" + std::to_string(ens.k) +
                          " (dt=" + format_number(ens.dt) + " may be too large)");
}

inline Ensemble enkbf_step(const SpectralBasis& basis, const Ensemble& ens, const ObservationSet& obs) {
  Ensemble next = ens;
  advance(basis, next, obs);
  return next;
}

/// Runs a fixed number of steps without stopping.
inline Ensemble run_steps(const SpectralBasis& basis, Ensemble ens, const ObservationSet& obs, std::size_t steps) {
  for (std::size_t s = 0; s < steps; ++s) advance(basis, ens, obs);
  return ens;
}

/**
 * Iterates until the first k >= k0 with R_k = |Y - K m_k|^2 <= kappa, or until
 * k = k_max (hit_cap). R is evaluated at the ensemble mean.
 */
inline FilterRun run_until_discrepancy(const SpectralBasis& basis, Ensemble ens, const ObservationSet& obs,
                                       double kappa, std::size_t k0, std::size_t k_max) {
  detail::require(kappa >= 0.0, "run_until_discrepancy: kappa must be non-negative");
  detail::require(k_max > k0, "run_until_discrepancy: k_max must exceed k0");

  FilterRun run;
  run.report.residual_path.push_back(residual(basis, obs, ens.mean()));
  for (;;) {
    const double r = run.report.residual_path.back();
    if (ens.k >= k0 && r <= kappa) break;
    if (ens.k >= k_max) {
      run.report.hit_cap = true;
      break;
    }
    advance(basis, ens, obs);
    run.report.residual_path.push_back(residual(basis, obs, ens.mean()));
  }
  run.report.k_dp = ens.k;
  run.report.tau_dp = ens.tau();
  run.ensemble = std::move(ens);
  return run;
}

struct QuantileBand {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd width() const { return hi - lo; }
  bool contains(Eigen::Index i, double x) const { return lo[i] <= x && x <= hi[i]; }
};

/// Empirical q-quantile of `values` with linear interpolation between order
/// statistics at position (N-1) q. Sorts `values`.
inline double empirical_quantile(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Row-wise central `level` band of a (rows x samples) matrix.
inline QuantileBand quantile_band(const Eigen::MatrixXd& samples, double level) {
  detail::require(level > 0.0 && level < 1.0, "quantile_band: level must lie in (0, 1)");
  detail::require(samples.cols() >= 2, "quantile_band: need at least two samples");
  QuantileBand band{Eigen::VectorXd(samples.rows()), Eigen::VectorXd(samples.rows())};
  std::vector<double> row(static_cast<std::size_t>(samples.cols()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) row[static_cast<std::size_t>(j)] = samples(i, j);
    band.lo[i] = empirical_quantile(row, 0.5 * (1.0 - level));
    band.hi[i] = empirical_quantile(row, 0.5 * (1.0 + level));
  }
  return band;
}

inline QuantileBand ensemble_quantiles(const Ensemble& ens, double level) {
  if (ens.size() < 2) throw InvalidArgument("ensemble_quantiles: need at least two particles");
  return quantile_band(ens.particles, level);
}

/// CSV with columns k, tau, residual.
inline CsvTable residual_path_table(const StopReport& report, double dt) {
  CsvTable t({"k", "tau", "residual"});
  const std::size_t first = report.k_dp + 1 - report.residual_path.size();
  for (std::size_t j = 0; j < report.residual_path.size(); ++j) {
    const std::size_t k = first + j;
    t.add_row({static_cast<unsigned long>(k), static_cast<double>(k) * dt, report.residual_path[j]});
  }
  return t;
}

}  // namespace eki
