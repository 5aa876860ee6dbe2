// Microbenchmarks for the hot paths: SpMV, IC(0) factorization, PCG solves
// and a full Split-Bregman iteration on grid graphs of increasing size.

#include <algorithm>
#include <random>

#include <benchmark/benchmark.h>

#include "pfe/graph.hpp"
#include "pfe/init.hpp"
#include "pfe/pcg.hpp"
#include "pfe/solver.hpp"
#include "pfe/sparse.hpp"

namespace {

pfe::RgbImage gradient_image(int size) {
  pfe::RgbImage img;
  img.height = size;
  img.width = size;
  img.data.resize(static_cast<std::size_t>(size) * size * 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      img.at(r, c, 0) = std::clamp(r / (size - 1.0) + jitter(rng), 0.0, 1.0);
      img.at(r, c, 1) = std::clamp(c / (size - 1.0) + jitter(rng), 0.0, 1.0);
      img.at(r, c, 2) = 0.5;
    }
  }
  return img;
}

pfe::WeightedGraph grid_graph(int size) {
  pfe::PixelGrid grid = pfe::make_pixel_grid(gradient_image(size));
  return pfe::build_image_graph(grid, pfe::median_neighbor_distance(grid));
}

pfe::CsrMatrix normal_matrix(const pfe::WeightedGraph& g) {
  return pfe::form_normal_matrix(pfe::difference_matrix(g), g.degree, 100.0, 1.0);
}

void bm_spmv(benchmark::State& state) {
  pfe::WeightedGraph g = grid_graph(static_cast<int>(state.range(0)));
  pfe::CsrMatrix a = normal_matrix(g);
  Eigen::VectorXd x = Eigen::VectorXd::Random(a.ncols);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pfe::spmv(a, x));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.values.size()));
}
BENCHMARK(bm_spmv)->Arg(32)->Arg(64)->Arg(128);

void bm_incomplete_cholesky(benchmark::State& state) {
  pfe::WeightedGraph g = grid_graph(static_cast<int>(state.range(0)));
  pfe::CsrMatrix a = normal_matrix(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pfe::incomplete_cholesky(a));
  }
}
BENCHMARK(bm_incomplete_cholesky)->Arg(32)->Arg(64)->Arg(128);

void bm_pcg_solve(benchmark::State& state) {
  pfe::WeightedGraph g = grid_graph(static_cast<int>(state.range(0)));
  pfe::PcgOperator op(normal_matrix(g), {1e-6, 1000, pfe::Preconditioner::Ic0});
  Eigen::VectorXd b = Eigen::VectorXd::Random(g.n);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(g.n);
  for (auto _ : state) {
    auto [x, rep] = op.solve(b, x0);
    benchmark::DoNotOptimize(x);
    state.counters["iters"] = rep.iterations;
  }
}
BENCHMARK(bm_pcg_solve)->Arg(32)->Arg(64)->Arg(128);

void bm_split_bregman_iteration(benchmark::State& state) {
  int size = static_cast<int>(state.range(0));
  pfe::WeightedGraph g = grid_graph(size);
  pfe::PfeParams params;
  params.conv_tol = 0.0;
  pfe::PfeSolver solver(g, params);
  Eigen::MatrixXd y0 = pfe::random_embedding(g.n, params.dim, 1, g.degree);
  pfe::SolverState state0 = solver.make_state(y0);
  for (auto _ : state) {
    pfe::SolverState st = state0;
    solver.split_bregman(st, 1);
    benchmark::DoNotOptimize(st.y);
  }
}
BENCHMARK(bm_split_bregman_iteration)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
