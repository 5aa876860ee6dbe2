#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace pfe {

/// Diagonal-covariance Gaussian mixture over 3-channel features.
struct GmmModel {
  int k = 0;
  Eigen::MatrixXd means;      // k x 3
  Eigen::MatrixXd variances;  // k x 3, floored at 1e-6
  Eigen::VectorXd weights;    // simplex, length k
};

/// EM with k-means seeding. Deterministic given the seed. An emptied
/// component is re-seeded from the point farthest from all means, at most
/// five times.
GmmModel gmm_fit(const Eigen::MatrixXd& features, int k, std::uint64_t seed);

/// n x k posterior responsibilities; rows sum to one.
Eigen::MatrixXd responsibilities(const GmmModel& model, const Eigen::MatrixXd& features);

/// Responsibility columns orthonormalized in the D-inner-product so that
/// Y^T D Y = I. Rank-deficient responsibilities are perturbed with 1e-6
/// noise and retried once.
Eigen::MatrixXd init_embedding(const GmmModel& model, const Eigen::MatrixXd& features,
                               const Eigen::VectorXd& degrees);

/// Gram-Schmidt in the inner product <u, v> = u^T diag(degrees) v.
/// Throws NumericalError when the columns are numerically dependent.
Eigen::MatrixXd d_orthonormalize(const Eigen::MatrixXd& a, const Eigen::VectorXd& degrees);

/// Seeded Gaussian start for inputs without pixel features (edge-list
/// graphs), D-orthonormalized.
Eigen::MatrixXd random_embedding(int n, int d, std::uint64_t seed,
                                 const Eigen::VectorXd& degrees);

}  // namespace pfe
