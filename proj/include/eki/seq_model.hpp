#pragma once

// Linearised observation model in sequence space:
//
//   Ytilde_i = kappa_i v_i + n^{-1/2} xi_i,   i = 1..D,
//
// together with the Gaussian prior spectrum, the ground truth used in the
// experiments, and the residual that drives discrepancy stopping.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "eki/error.hpp"
#include "eki/io.hpp"
#include "eki/rng.hpp"
#include "eki/spectral.hpp"

namespace eki {

/// Exponent family of the prior eigenvalues.
///   kStandard: lambda_i = i^{-1-2 alpha}
///   kHalf:     lambda_i = i^{-1/2-alpha}
enum class PriorDecay { kStandard, kHalf };

inline double prior_exponent(PriorDecay decay, double alpha) {
  return decay == PriorDecay::kStandard ? 1.0 + 2.0 * alpha : 0.5 + alpha;
}

/// Centred Gaussian prior N(0, scale * C0) with C0 diagonal in the eigenbasis.
struct PriorSpec {
  double alpha = 2.0;
  double scale = 1.0;
  std::size_t dim = 1;
  PriorDecay decay = PriorDecay::kStandard;

  /// Eigenvalues of C0 (without the scale factor).
  Eigen::VectorXd eigenvalues() const {
    Eigen::VectorXd lam(static_cast<Eigen::Index>(dim));
    const double e = prior_exponent(decay, alpha);
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::pow(static_cast<double>(i + 1), -e);
    return lam;
  }

  /// Per-coordinate prior variances scale * lambda_i.
  Eigen::VectorXd variances() const { return scale * eigenvalues(); }
};

struct ModelConfig {
  double alpha = 2.0;
  double p = 2.0;                              // decay of kappa_i ~ i^{-p}
  std::size_t n = 10000;
  std::optional<std::size_t> dim_override;     // fixes D, bypassing D(n)
  double dim_constant = 1.0;                   // c in D(n) = round(c n^{1/(2p+1)})
  double kappa_constant = 1.0;                 // C in kappa = C D / n
  double dt = 0.01;
  std::size_t particles = 512;
  std::uint64_t seed = 20250101;
  std::size_t k0 = 1;
  std::size_t k_max = 20000;
  double quantile_level = 0.95;
  double truth_decay = 2.5;                    // v_{0,i} = i^{-truth_decay}
  PriorDecay prior_decay = PriorDecay::kStandard;
  bool noise_free = false;

  void validate() const {
    detail::require(alpha > 0.0, "alpha must be positive");
    detail::require(p > 0.0, "p must be positive");
    detail::require(n >= 1, "n must be at least 1");
    detail::require(!dim_override || *dim_override >= 1, "dim must be at least 1");
    detail::require(dim_constant > 0.0, "dim_constant must be positive");
    detail::require(kappa_constant > 0.0 && kappa_constant <= 1.0, "kappa_constant must lie in (0, 1]");
    detail::require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
    detail::require(particles >= 2, "particles must be at least 2");
    detail::require(k_max > k0, "k_max must exceed k0");
    detail::require(quantile_level > 0.0 && quantile_level < 1.0, "quantile_level must lie in (0, 1)");
    detail::require(truth_decay > 0.5, "truth_decay must exceed 1/2");
  }

  PriorSpec prior(std::size_t dim) const { return PriorSpec{alpha, 1.0, dim, prior_decay}; }
};

/// D(n) = max(1, round(c * n^{1/(2p+1)})).
inline std::size_t effective_dimension(std::size_t n, double p, double c) {
  detail::require(n >= 1 && p > 0.0 && c > 0.0, "effective_dimension: arguments must be positive");
  const double d = std::round(c * std::pow(static_cast<double>(n), 1.0 / (2.0 * p + 1.0)));
  return d < 1.0 ? 1 : static_cast<std::size_t>(d);
}

/// Projection dimension for sample size n under `config`.
inline std::size_t model_dimension(const ModelConfig& config, std::size_t n) {
  if (config.dim_override) return *config.dim_override;
  return effective_dimension(n, config.p, config.dim_constant);
}

/// v_{0,i} = i^{-decay}.
inline SeqVector ground_truth(std::size_t dim, double decay) {
  detail::require(dim >= 1, "ground_truth: dimension must be positive");
  detail::require(decay > 0.5, "ground_truth: decay must exceed 1/2");
  SeqVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::pow(static_cast<double>(i + 1), -decay);
  return v;
}

/// Partial sums S_N = sum_{i<=N} i^{2 beta} v_i^2, N = 1..len(v).
inline Eigen::VectorXd sobolev_partial_sums(const SeqVector& v, double beta) {
  Eigen::VectorXd s(v.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    acc += std::pow(static_cast<double>(i + 1), 2.0 * beta) * v[i] * v[i];
    s[i] = acc;
  }
  return s;
}

/// (K v)_i = kappa_i v_i.
inline SeqVector apply_forward(const SpectralBasis& basis, const SeqVector& v) {
  if (static_cast<std::size_t>(v.size()) > basis.dim())
    throw InvalidArgument("apply_forward: vector longer than basis");
  return basis.singular_values().head(v.size()).cwiseProduct(v);
}

struct ObservationSet {
  SeqVector ytilde;        // linearised data, length D
  std::size_t n = 1;       // inverse noise variance
  std::uint64_t seed = 0;
  SeqVector truth;         // v0, for evaluation only
  bool noise_free = false;

  std::size_t dim() const { return static_cast<std::size_t>(ytilde.size()); }
  double noise_variance() const { return 1.0 / static_cast<double>(n); }
};

/**
 * Ytilde_i = kappa_i v0_i + n^{-1/2} xi_i, i = 1..D, with xi drawn from the
 * observation stream of (seed, replicate, slot). With `noise_free` the noise
 * term is omitted.
 */
inline ObservationSet generate_observations(const SpectralBasis& basis, const SeqVector& v0, std::size_t n,
                                            std::size_t dim, std::uint64_t seed, std::uint64_t replicate = 0,
                                            std::uint64_t slot = 0, bool noise_free = false) {
  detail::require(n >= 1, "generate_observations: n must be positive");
  detail::require(dim >= 1 && dim <= static_cast<std::size_t>(v0.size()) &&
                      static_cast<std::size_t>(v0.size()) <= basis.dim(),
                  "generate_observations: need D <= len(v0) <= basis dimension");
  ObservationSet obs;
  obs.n = n;
  obs.seed = seed;
  obs.noise_free = noise_free;
  obs.truth = v0.head(static_cast<Eigen::Index>(dim));
  obs.ytilde = apply_forward(basis, obs.truth);
  if (!noise_free) {
    auto gen = make_stream(seed, StreamPurpose::kObservations, replicate, slot);
    std::normal_distribution<double> normal;
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index i = 0; i < obs.ytilde.size(); ++i) obs.ytilde[i] += sd * normal(gen);
  }
  return obs;
}

/// R = sum_{i<=D} (Ytilde_i - kappa_i v_i)^2.
inline double residual(const SpectralBasis& basis, const ObservationSet& obs, const SeqVector& v) {
  if (v.size() != obs.ytilde.size()) throw InvalidArgument("residual: dimension mismatch");
  return (obs.ytilde - apply_forward(basis, v)).squaredNorm();
}

/// Discrepancy threshold kappa = C * D / n.
inline double discrepancy_threshold(const ModelConfig& config, std::size_t dim, std::size_t n) {
  detail::require(n >= 1, "discrepancy_threshold: n must be positive");
  return config.kappa_constant * static_cast<double>(dim) / static_cast<double>(n);
}

/// CSV with columns i, kappa_i, ytilde_i, truth_i.
inline CsvTable observations_table(const SpectralBasis& basis, const ObservationSet& obs) {
  CsvTable t({"i", "kappa_i", "ytilde_i", "truth_i"});
  for (Eigen::Index i = 0; i < obs.ytilde.size(); ++i)
    t.add_row({static_cast<long>(i + 1), basis.singular_values()[i], obs.ytilde[i], obs.truth[i]});
  return t;
}

}  // namespace eki
