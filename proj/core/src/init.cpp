#include "pfe/init.hpp"

#include <cmath>
#include <random>

#include "pfe/cluster.hpp"
#include "pfe/errors.hpp"

namespace pfe {

namespace {

constexpr double kVarianceFloor = 1e-6;
constexpr int kMaxEmIterations = 50;
constexpr double kLogLikTol = 1e-7;
constexpr int kMaxRepairs = 5;

// log N(x | mean, diag(var)) for one row
double diag_gaussian_loglik(const Eigen::RowVector3d& x, const Eigen::RowVector3d& mean,
                            const Eigen::RowVector3d& var) {
  double ll = -1.5 * std::log(2.0 * M_PI);
  for (int c = 0; c < 3; ++c) {
    double diff = x[c] - mean[c];
    ll -= 0.5 * (std::log(var[c]) + diff * diff / var[c]);
  }
  return ll;
}

// index of the point with the largest minimal distance to the current means
Eigen::Index farthest_point(const Eigen::MatrixXd& features, const Eigen::MatrixXd& means) {
  Eigen::Index best = 0;
  double best_dist = -1.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double d = (means.rowwise() - features.row(i)).rowwise().squaredNorm().minCoeff();
    if (d > best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

GmmModel gmm_fit(const Eigen::MatrixXd& features, int k, std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  if (k < 1) throw ConfigError("gmm_fit: k must be >= 1");
  if (n < k) throw ConfigError("gmm_fit: fewer points than components");
  if (features.cols() != 3) throw ConfigError("gmm_fit: features must be n x 3");
  if (!features.allFinite()) throw ConfigError("gmm_fit: non-finite features");

  GmmModel model;
  model.k = k;
  model.means.resize(k, 3);
  model.variances = Eigen::MatrixXd::Constant(k, 3, 1e-2);
  model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);

  // k-means seeding
  Segmentation seed_labels = kmeans(features, k, seed, 20);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  model.means.setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    model.means.row(seed_labels.labels[i]) += features.row(i);
    counts[seed_labels.labels[i]] += 1.0;
  }
  for (int j = 0; j < k; ++j) {
    if (counts[j] > 0.0) model.means.row(j) /= counts[j];
  }

  Eigen::MatrixXd resp(n, k);
  double prev_loglik = -std::numeric_limits<double>::infinity();
  int repairs = 0;

  for (int iter = 0; iter < kMaxEmIterations; ++iter) {
    // E-step with log-sum-exp
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd lp(k);
      for (int j = 0; j < k; ++j) {
        lp[j] = std::log(model.weights[j]) +
                diag_gaussian_loglik(features.row(i), model.means.row(j),
                                     model.variances.row(j));
      }
      double mx = lp.maxCoeff();
      Eigen::VectorXd e = (lp.array() - mx).exp();
      double s = e.sum();
      resp.row(i) = (e / s).transpose();
      loglik += mx + std::log(s);
    }

    // M-step
    bool repaired = false;
    for (int j = 0; j < k; ++j) {
      double nj = resp.col(j).sum();
      if (nj < 1e-8 && repairs < kMaxRepairs) {
        model.means.row(j) = features.row(farthest_point(features, model.means));
        model.variances.row(j).setConstant(1e-2);
        model.weights[j] = 1.0 / n;
        ++repairs;
        repaired = true;
        continue;
      }
      if (nj <= 0.0) continue;
      Eigen::RowVector3d mean = (resp.col(j).transpose() * features) / nj;
      Eigen::RowVector3d var = Eigen::RowVector3d::Zero();
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::RowVector3d diff = features.row(i) - mean;
        var += resp(i, j) * diff.cwiseProduct(diff);
      }
      var /= nj;
      model.means.row(j) = mean;
      model.variances.row(j) = var.cwiseMax(kVarianceFloor);
      model.weights[j] = nj / n;
    }
    model.weights /= model.weights.sum();

    if (!repaired && loglik - prev_loglik < kLogLikTol && iter > 0) break;
    prev_loglik = loglik;
  }
  return model;
}

Eigen::MatrixXd responsibilities(const GmmModel& model, const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  Eigen::MatrixXd resp(n, model.k);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd lp(model.k);
    for (int j = 0; j < model.k; ++j) {
      lp[j] = std::log(model.weights[j]) +
              diag_gaussian_loglik(features.row(i), model.means.row(j),
                                   model.variances.row(j));
    }
    double mx = lp.maxCoeff();
    Eigen::VectorXd e = (lp.array() - mx).exp();
    resp.row(i) = (e / e.sum()).transpose();
  }
  return resp;
}

Eigen::MatrixXd d_orthonormalize(const Eigen::MatrixXd& a, const Eigen::VectorXd& degrees) {
  if (a.rows() != degrees.size()) throw ConfigError("d_orthonormalize: size mismatch");
  Eigen::MatrixXd q = a;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      double proj = q.col(j).dot(degrees.cwiseProduct(q.col(i)));
      q.col(j) -= proj * q.col(i);
    }
    double norm = std::sqrt(q.col(j).dot(degrees.cwiseProduct(q.col(j))));
    if (norm < 1e-10) {
      throw NumericalError("d_orthonormalize: dependent column " + std::to_string(j));
    }
    q.col(j) /= norm;
  }
  return q;
}

Eigen::MatrixXd init_embedding(const GmmModel& model, const Eigen::MatrixXd& features,
                               const Eigen::VectorXd& degrees) {
  Eigen::MatrixXd resp = responsibilities(model, features);
  try {
    return d_orthonormalize(resp, degrees);
  } catch (const NumericalError&) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> dist(0.0, 1e-6);
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
      for (Eigen::Index j = 0; j < resp.cols(); ++j) resp(i, j) += dist(rng);
    }
    return d_orthonormalize(resp, degrees);
  }
}

Eigen::MatrixXd random_embedding(int n, int d, std::uint64_t seed,
                                 const Eigen::VectorXd& degrees) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd a(n, d);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = dist(rng);
  }
  return d_orthonormalize(a, degrees);
}

}  // namespace pfe
