#include "pfe/cluster.hpp"

#include <limits>
#include <random>

#include "pfe/errors.hpp"

namespace pfe {

namespace {

constexpr double kInertiaTol = 1e-6;

// k-means++ seeding
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());

  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist2[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  }

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    double total = dist2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double target = uniform(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);  // all points coincide with existing centroids
    }
    centroids.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], (points.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

}  // namespace

Segmentation kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (k > n) throw ConfigError("kmeans: k exceeds point count");

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centroids = seed_centroids(points, k, rng);

  Segmentation seg;
  seg.k = k;
  seg.labels.assign(n, 0);

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment (ties to the lowest centroid index)
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        double d = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      seg.labels[i] = best;
      inertia += best_d;
    }

    // update
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(seg.labels[i]) += points.row(i);
      counts[seg.labels[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // empty cluster: split the largest one at its farthest member
      int largest = 0;
      for (int c2 = 1; c2 < k; ++c2) {
        if (counts[c2] > counts[largest]) largest = c2;
      }
      Eigen::Index far_i = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (seg.labels[i] != largest) continue;
        double d = (points.row(i) - centroids.row(largest)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      centroids.row(c) = points.row(far_i);
      seg.labels[far_i] = c;
      counts[c] = 1;
      counts[largest]--;
    }

    if (prev_inertia - inertia <= kInertiaTol * std::max(prev_inertia, 1e-300) &&
        inertia <= prev_inertia) {
      break;
    }
    prev_inertia = inertia;
  }
  return seg;
}

}  // namespace pfe
