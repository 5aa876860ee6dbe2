#include "pfe/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pfe/errors.hpp"

namespace pfe {

namespace {

Eigen::VectorXd degrees_from_edges(int n, const std::vector<WeightedGraph::Edge>& edges) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (const auto& e : edges) {
    d[e.i] += e.w;
    d[e.j] += e.w;
  }
  return d;
}

}  // namespace

PixelGrid make_pixel_grid(const RgbImage& img) {
  PixelGrid grid;
  grid.height = img.height;
  grid.width = img.width;
  grid.features.resize(static_cast<Eigen::Index>(img.height) * img.width, 3);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      Eigen::Index v = static_cast<Eigen::Index>(r) * img.width + c;
      for (int ch = 0; ch < 3; ++ch) grid.features(v, ch) = img.at(r, c, ch);
    }
  }
  return grid;
}

WeightedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_edge_list: cannot open " + path);

  std::map<std::pair<int, int>, double> merged;
  int max_index = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    int i, j;
    double w;
    if (!(is >> i)) continue;  // blank / comment-only line
    if (!(is >> j >> w)) {
      throw IoError("load_edge_list: malformed line " + std::to_string(line_no) +
                    " in " + path);
    }
    std::string rest;
    if (is >> rest) {
      throw IoError("load_edge_list: trailing tokens on line " + std::to_string(line_no) +
                    " in " + path);
    }
    if (i < 0 || j < 0 || i == j || !std::isfinite(w) || w <= 0.0) {
      throw IoError("load_edge_list: invalid edge on line " + std::to_string(line_no) +
                    " in " + path);
    }
    merged[{std::min(i, j), std::max(i, j)}] += w;
    max_index = std::max(max_index, std::max(i, j));
  }
  if (max_index < 1) throw IoError("load_edge_list: no edges in " + path);

  WeightedGraph g;
  g.n = max_index + 1;
  g.edges.reserve(merged.size());
  for (const auto& [key, w] : merged) g.edges.push_back({key.first, key.second, w});
  g.degree = degrees_from_edges(g.n, g.edges);
  for (int v = 0; v < g.n; ++v) {
    if (g.degree[v] <= 0.0) {
      throw IoError("load_edge_list: isolated vertex " + std::to_string(v) + " in " + path);
    }
  }
  return g;
}

double median_neighbor_distance(const PixelGrid& grid) {
  std::vector<double> dists;
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      Eigen::Index v = static_cast<Eigen::Index>(r) * grid.width + c;
      if (c + 1 < grid.width) {
        dists.push_back((grid.features.row(v) - grid.features.row(v + 1)).norm());
      }
      if (r + 1 < grid.height) {
        dists.push_back((grid.features.row(v) - grid.features.row(v + grid.width)).norm());
      }
    }
  }
  if (dists.empty()) return 0.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  return dists[dists.size() / 2];
}

WeightedGraph build_image_graph(const PixelGrid& grid, double sigma) {
  if (sigma <= 0.0) throw ConfigError("build_image_graph: sigma must be > 0");
  const long n = static_cast<long>(grid.height) * grid.width;
  if (n < 2) throw ConfigError("build_image_graph: grid must have at least 2 pixels");

  constexpr double kWeightFloor = 1e-12;
  const double inv = 1.0 / (2.0 * sigma * sigma);

  std::vector<WeightedGraph::Edge> kept;
  // Strongest incident (possibly dropped) edge per vertex, for isolation repair.
  std::vector<WeightedGraph::Edge> strongest(n, {-1, -1, -1.0});

  auto consider = [&](int a, int b) {
    double d2 = (grid.features.row(a) - grid.features.row(b)).squaredNorm();
    double w = std::exp(-d2 * inv);
    if (w >= kWeightFloor) kept.push_back({a, b, w});
    for (int v : {a, b}) {
      if (w > strongest[v].w) strongest[v] = {a, b, w};
    }
  };

  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      int v = r * grid.width + c;
      if (c + 1 < grid.width) consider(v, v + 1);
      if (r + 1 < grid.height) consider(v, v + grid.width);
    }
  }

  Eigen::VectorXd deg = degrees_from_edges(static_cast<int>(n), kept);
  for (long v = 0; v < n; ++v) {
    if (deg[v] > 0.0) continue;
    WeightedGraph::Edge e = strongest[v];
    e.w = std::max(e.w, kWeightFloor);  // keep degrees strictly positive
    kept.push_back(e);
    deg[e.i] += e.w;
    deg[e.j] += e.w;
  }

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  kept.erase(std::unique(kept.begin(), kept.end(),
                         [](const auto& a, const auto& b) {
                           return a.i == b.i && a.j == b.j;
                         }),
             kept.end());

  WeightedGraph g;
  g.n = static_cast<int>(n);
  g.edges = std::move(kept);
  g.degree = degrees_from_edges(g.n, g.edges);
  g.sigma = sigma;
  return g;
}

CsrMatrix difference_matrix(const WeightedGraph& g) {
  std::vector<Triplet> trips;
  trips.reserve(g.edges.size() * 2);
  for (int k = 0; k < g.edge_count(); ++k) {
    const auto& e = g.edges[k];
    trips.push_back({k, e.i, e.w});
    trips.push_back({k, e.j, -e.w});
  }
  return csr_from_triplets(g.edge_count(), g.n, trips);
}

Eigen::VectorXd degree_vector(const WeightedGraph& g) {
  return degrees_from_edges(g.n, g.edges);
}

}  // namespace pfe
