#pragma once

// Dirichlet-Laplacian eigenbasis on (0, 2*pi) and the transforms between
// coefficient vectors and grid samples.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "eki/error.hpp"

namespace eki {

/// Coefficients c_1..c_D in the Laplacian eigenbasis (index 0 holds c_1).
using SeqVector = Eigen::VectorXd;

inline constexpr double kDomainLength = 2.0 * std::numbers::pi;

/**
 * Analytic eigenpairs of -d^2/dx^2 on (0, 2*pi) with homogeneous Dirichlet
 * data:
 *
 *   phi_i(x) = pi^{-1/2} sin(i x / 2),   lambda_i = (i/2)^2,   kappa_i = 1/lambda_i.
 *
 * kappa_i are the singular values of the forward operator K = (-Laplacian)^{-1}.
 * The eigenfunctions are orthonormal in L^2(0, 2*pi).
 */
class SpectralBasis {
 public:
  explicit SpectralBasis(std::size_t dim) : eigenvalues_(static_cast<Eigen::Index>(dim)),
                                            kappa_(static_cast<Eigen::Index>(dim)) {
    detail::require(dim >= 1, "SpectralBasis: dimension must be at least 1");
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
      const double half = 0.5 * static_cast<double>(i + 1);
      eigenvalues_[i] = half * half;
      kappa_[i] = 1.0 / eigenvalues_[i];
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues_.size()); }

  /// lambda_1..lambda_D, strictly increasing.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// kappa_1..kappa_D, strictly decreasing.
  const Eigen::VectorXd& singular_values() const { return kappa_; }

  /// phi_i(x) for the 1-based mode index i.
  static double eigenfunction(std::size_t i, double x) {
    return std::sin(0.5 * static_cast<double>(i) * x) / std::sqrt(std::numbers::pi);
  }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd kappa_;
};

inline SpectralBasis eigenpairs(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("eigenpairs: dimension must be positive");
  return SpectralBasis(dim);
}

/// Uniform interior grid x_j = j*h, j = 1..m, h = 2*pi/(m+1); endpoints excluded.
class Grid {
 public:
  explicit Grid(std::size_t m) : points_(static_cast<Eigen::Index>(m)) {
    detail::require(m >= 2, "Grid: need at least two points");
    spacing_ = kDomainLength / static_cast<double>(m + 1);
    for (Eigen::Index j = 0; j < points_.size(); ++j) points_[j] = spacing_ * static_cast<double>(j + 1);
  }

  std::size_t size() const { return static_cast<std::size_t>(points_.size()); }
  double spacing() const { return spacing_; }
  const Eigen::VectorXd& points() const { return points_; }
  double operator[](std::size_t j) const { return points_[static_cast<Eigen::Index>(j)]; }

 private:
  Eigen::VectorXd points_;
  double spacing_ = 0.0;
};

struct GridFunction {
  Grid grid;
  Eigen::VectorXd values;

  GridFunction(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    detail::require(static_cast<std::size_t>(values.size()) == grid.size(),
                    "GridFunction: value count does not match grid");
  }

  /// Discrete L^2 norm, sqrt(h * sum v_j^2).
  double l2_norm() const { return std::sqrt(grid.spacing()) * values.norm(); }
};

/// m x D matrix with entries phi_i(x_j).
inline Eigen::MatrixXd synthesis_matrix(const Grid& grid, std::size_t dim) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < phi.cols(); ++i)
    for (Eigen::Index j = 0; j < phi.rows(); ++j)
      phi(j, i) = SpectralBasis::eigenfunction(static_cast<std::size_t>(i + 1), grid.points()[j]);
  return phi;
}

/// Pointwise evaluation of sum_i c_i phi_i(x_j).
inline GridFunction synthesize(const SpectralBasis& basis, const SeqVector& v, const Grid& grid) {
  if (static_cast<std::size_t>(v.size()) > basis.dim())
    throw InvalidArgument("synthesize: coefficient vector longer than basis");
  if (v.size() == 0) return GridFunction(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
  return GridFunction(grid, synthesis_matrix(grid, static_cast<std::size_t>(v.size())) * v);
}

/**
 * Coefficients c_i = int u phi_i dx, i = 1..D, by the composite trapezoid rule.
 * The endpoint terms vanish since phi_i(0) = phi_i(2*pi) = 0.
 *
 * Throws IllConditionedProjection when D > m/4.
 */
inline SeqVector analyze(const SpectralBasis& basis, const GridFunction& u, std::size_t dim) {
  if (dim > basis.dim()) throw InvalidArgument("analyze: requested more modes than the basis holds");
  if (4 * dim > u.grid.size())
    throw IllConditionedProjection("analyze: D=" + std::to_string(dim) + " exceeds m/4 for m=" +
                                   std::to_string(u.grid.size()));
  return u.grid.spacing() * (synthesis_matrix(u.grid, dim).transpose() * u.values);
}

/// Quadrature Gram matrix G_ij = h * sum_j phi_i(x_j) phi_k(x_j).
inline Eigen::MatrixXd gram_matrix(const Grid& grid, std::size_t dim) {
  const Eigen::MatrixXd phi = synthesis_matrix(grid, dim);
  return grid.spacing() * (phi.transpose() * phi);
}

}  // namespace eki
