#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfe/imgio.hpp"
#include "pfe/sparse.hpp"

namespace pfe {

/// Undirected weighted graph; each edge stored once with i < j, edges in
/// lexicographic (i, j) order, all weights positive.
struct WeightedGraph {
  struct Edge {
    int i;
    int j;
    double w;
  };

  int n = 0;
  std::vector<Edge> edges;
  Eigen::VectorXd degree;  // weighted row sums, all > 0
  double sigma = 0.0;      // heat-kernel bandwidth used at construction, 0 if n/a

  int edge_count() const { return static_cast<int>(edges.size()); }
};

/// Pixel features for a (possibly downsampled) image: n x 3 RGB rows, vertex
/// index = row*width + col.
struct PixelGrid {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd features;  // n x 3
};

PixelGrid make_pixel_grid(const RgbImage& img);

/// Text edge list: lines "i j w" with 0-based indices, '#' comments allowed.
/// Duplicate and reversed edges are merged by summing weights.
WeightedGraph load_edge_list(const std::string& path);

/// 4-neighborhood graph with heat-kernel weights exp(-|dx|^2 / 2 sigma^2) on
/// the RGB features. Weights below 1e-12 are dropped; a vertex that would be
/// isolated by dropping keeps its strongest incident edge.
WeightedGraph build_image_graph(const PixelGrid& grid, double sigma);

/// Median RGB distance over grid-neighbor pairs; the default sigma heuristic.
double median_neighbor_distance(const PixelGrid& grid);

/// |E| x n matrix with one row per edge: +w at column i, -w at column j.
CsrMatrix difference_matrix(const WeightedGraph& g);

Eigen::VectorXd degree_vector(const WeightedGraph& g);

}  // namespace pfe
