#pragma once

// Closed-form Gaussian homotopy family for the diagonal linear model. With
// noise covariance R = I/n and prior N(0, s*C0), the tempered posterior
//
//   pi_tau(v) ~ exp(-tau/2 (Kv - Y)^T R^{-1} (Kv - Y)) pi_0(v)
//
// is Gaussian with independent coordinates.

#include <cmath>

#include "eki/error.hpp"
#include "eki/seq_model.hpp"
#include "eki/spectral.hpp"

namespace eki {

struct GaussianPosterior {
  SeqVector mean;
  Eigen::VectorXd variance;
  double tau = 0.0;
};

/// mean_i = tau l_i k_i Y_i / (tau l_i k_i^2 + 1/n),
/// var_i  = l_i - tau l_i^2 k_i^2 / (tau l_i k_i^2 + 1/n),   l_i = s*lambda_i.
inline GaussianPosterior posterior_moments(const SpectralBasis& basis, const PriorSpec& prior,
                                           const ObservationSet& obs, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("posterior_moments: tau must be non-negative");
  const auto dim = static_cast<Eigen::Index>(obs.dim());
  if (prior.dim < obs.dim() || basis.dim() < obs.dim())
    throw InvalidArgument("posterior_moments: prior/basis shorter than data");

  const Eigen::VectorXd lam = prior.variances().head(dim);
  const Eigen::VectorXd kap = basis.singular_values().head(dim);
  const double noise = obs.noise_variance();

  GaussianPosterior post;
  post.tau = tau;
  post.mean.resize(dim);
  post.variance.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double denom = tau * lam[i] * kap[i] * kap[i] + noise;
    post.mean[i] = tau * lam[i] * kap[i] * obs.ytilde[i] / denom;
    // l - tau l^2 k^2 / denom == l * noise / denom, which avoids cancellation.
    post.variance[i] = lam[i] * noise / denom;
  }
  return post;
}

/// Gaussian mode; equals the minimiser of the Tikhonov functional with
/// regularisation weight 1/(n tau s).
inline SeqVector map_estimate(const GaussianPosterior& posterior) { return posterior.mean; }

/// Contraction exponent beta / (beta + p + alpha + 1).
inline double theoretical_rate(double beta, double p, double alpha) {
  if (!(beta > 0.0 && p > 0.0 && alpha > 0.0))
    throw InvalidArgument("theoretical_rate: arguments must be positive");
  return beta / (beta + p + alpha + 1.0);
}

/// False when beta >= 1 + 2 alpha + 2 p, where the rate statement no longer applies.
inline bool rate_regime_valid(double beta, double p, double alpha) { return beta < 1.0 + 2.0 * alpha + 2.0 * p; }

}  // namespace eki
