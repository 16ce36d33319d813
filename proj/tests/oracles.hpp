#pragma once

// Test-only reference computations. None of these reuse the code paths they
// are used to check.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace eki::oracle {

/// Smallest `count` eigenvalues of the second-order finite-difference
/// Dirichlet Laplacian on m interior points of (0, 2*pi).
inline std::vector<double> fd_laplacian_eigenvalues(int m, int count) {
  const double h = 2.0 * std::numbers::pi / (m + 1);
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(m, 2.0 / (h * h));
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(m - 1, -1.0 / (h * h));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

/// Double loop sum_i c_i pi^{-1/2} sin(i x_j / 2).
inline std::vector<double> brute_force_synthesis(const std::vector<double>& coeffs, const std::vector<double>& x) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      acc += coeffs[i] * std::sin(0.5 * static_cast<double>(i + 1) * x[j]) / std::sqrt(std::numbers::pi);
    out[j] = acc;
  }
  return out;
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/**
 * Tempered Gaussian posterior from the dense formulas
 *   m = m0 - C0 K^T (K C0 K^T + R/tau)^{-1} (K m0 - y)
 *   C = C0 - C0 K^T (K C0 K^T + R/tau)^{-1} K C0
 * with explicit matrix inverses, evaluated in long double because the
 * covariance subtraction cancels badly once tau * n * lambda * kappa^2 is
 * large. tau = 0 returns the prior.
 */
inline DensePosterior dense_tempered_posterior(const Eigen::MatrixXd& forward, const Eigen::MatrixXd& prior_cov,
                                               const Eigen::MatrixXd& noise_cov, const Eigen::VectorXd& y,
                                               double tau) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  if (tau == 0.0) return {Eigen::VectorXd::Zero(prior_cov.rows()), prior_cov};
  const Mat K = forward.cast<long double>(), C0 = prior_cov.cast<long double>(), R = noise_cov.cast<long double>();
  const Vec m0 = Vec::Zero(C0.rows());
  const Mat inner = (K * C0 * K.transpose() + R / static_cast<long double>(tau)).inverse();
  const Mat gain = C0 * K.transpose() * inner;
  const Vec mean = m0 - gain * (K * m0 - y.cast<long double>());
  const Mat cov = C0 - gain * K * C0;
  return {mean.cast<double>(), cov.cast<double>()};
}

/// Plain double-loop (J-1)-normalised covariance between rows of a and b,
/// where each column is one sample.
inline Eigen::MatrixXd naive_cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int J = static_cast<int>(a.cols());
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < b.rows(); ++k) {
      double ma = 0.0, mb = 0.0;
      for (int j = 0; j < J; ++j) {
        ma += a(i, j);
        mb += b(k, j);
      }
      ma /= J;
      mb /= J;
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += (a(i, j) - ma) * (b(k, j) - mb);
      out(i, k) = acc / (J - 1);
    }
  }
  return out;
}

/// Closed-form solution of -u'' + u = 0 on (0, L), u(0) = a, u(L) = b.
inline double cosh_sinh_solution(double x, double a, double b, double length) {
  return a * std::cosh(x) + (b - a * std::cosh(length)) / std::sinh(length) * std::sinh(x);
}

}  // namespace eki::oracle
