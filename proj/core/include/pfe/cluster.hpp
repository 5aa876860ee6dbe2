#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pfe {

/// Per-vertex integer labels in [0, k). height/width describe the image
/// layout when the segmentation came from a pixel grid (0 otherwise).
struct Segmentation {
  std::vector<int> labels;
  int k = 0;
  int height = 0;
  int width = 0;

  int size() const { return static_cast<int>(labels.size()); }
};

/// Lloyd's algorithm from k-means++ seeding. Deterministic given the seed;
/// an emptied cluster is repaired by splitting the largest cluster.
Segmentation kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int max_iter = 100);

}  // namespace pfe
