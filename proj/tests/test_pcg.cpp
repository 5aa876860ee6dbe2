#include <limits>
#include <random>

#include <doctest.h>

#include "pfe/errors.hpp"
#include "pfe/pcg.hpp"
#include "oracles.hpp"

namespace {

pfe::CsrMatrix normal_matrix_from_random_graph(int n, std::mt19937_64& rng) {
  pfe::WeightedGraph g = oracles::random_graph(n, 2 * n, rng);
  return pfe::form_normal_matrix(pfe::difference_matrix(g), g.degree, 2.0, 1.0);
}

}  // namespace

TEST_CASE("pcg trivial cases") {
  pfe::PcgConfig cfg;
  SUBCASE("identity system solves in at most one iteration") {
    pfe::CsrMatrix eye =
        pfe::csr_from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    Eigen::VectorXd b = Eigen::VectorXd::Random(3);
    auto [x, report] = pfe::pcg_solve(eye, b, Eigen::VectorXd::Zero(3), cfg);
    CHECK(report.converged);
    CHECK(report.iterations <= 1);
    CHECK((x - b).norm() < 1e-12);
  }
  SUBCASE("zero right-hand side returns zero immediately") {
    std::mt19937_64 rng(1);
    pfe::CsrMatrix a = normal_matrix_from_random_graph(10, rng);
    auto [x, report] = pfe::pcg_solve(a, Eigen::VectorXd::Zero(10),
                                      Eigen::VectorXd::Random(10), cfg);
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    CHECK(x == Eigen::VectorXd::Zero(10));
  }
}

TEST_CASE("pcg matches the dense direct solve") {
  std::mt19937_64 rng(7);
  pfe::PcgConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_iter = 500;
  for (int trial = 0; trial < 10; ++trial) {
    pfe::CsrMatrix a = normal_matrix_from_random_graph(50, rng);
    Eigen::VectorXd b = Eigen::VectorXd::Random(50);
    auto [x, report] = pfe::pcg_solve(a, b, Eigen::VectorXd::Zero(50), cfg);
    Eigen::VectorXd exact = oracles::to_dense(a).partialPivLu().solve(b);
    CHECK(report.converged);
    CHECK((x - exact).norm() / exact.norm() < 1e-8);
  }
}

TEST_CASE("preconditioner variants agree") {
  std::mt19937_64 rng(13);
  pfe::CsrMatrix a = normal_matrix_from_random_graph(40, rng);
  Eigen::VectorXd b = Eigen::VectorXd::Random(40);
  pfe::PcgConfig cfg;
  cfg.rel_tol = 1e-10;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(40);

  cfg.preconditioner = pfe::Preconditioner::Ic0;
  auto [x_ic, rep_ic] = pfe::pcg_solve(a, b, x0, cfg);
  cfg.preconditioner = pfe::Preconditioner::Jacobi;
  auto [x_jac, rep_jac] = pfe::pcg_solve(a, b, x0, cfg);
  cfg.preconditioner = pfe::Preconditioner::None;
  auto [x_none, rep_none] = pfe::pcg_solve(a, b, x0, cfg);

  CHECK(rep_ic.converged);
  CHECK(rep_jac.converged);
  CHECK(rep_none.converged);
  CHECK((x_ic - x_none).norm() < 10 * cfg.rel_tol * x_none.norm() + 1e-12);
  CHECK((x_jac - x_none).norm() < 10 * cfg.rel_tol * x_none.norm() + 1e-12);
}

TEST_CASE("ic0 preconditioning does not increase iterations on a grid graph") {
  // 16x16 grid graph via a random image
  pfe::RgbImage img;
  img.height = 16;
  img.width = 16;
  img.data.resize(16 * 16 * 3);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.data) v = u(rng);
  pfe::WeightedGraph g = pfe::build_image_graph(pfe::make_pixel_grid(img), 0.5);
  pfe::CsrMatrix a = pfe::form_normal_matrix(pfe::difference_matrix(g), g.degree, 100.0, 1.0);

  Eigen::VectorXd b = Eigen::VectorXd::Random(a.nrows);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(a.nrows);
  pfe::PcgConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.max_iter = 5000;

  cfg.preconditioner = pfe::Preconditioner::Ic0;
  auto [x_ic, rep_ic] = pfe::pcg_solve(a, b, x0, cfg);
  cfg.preconditioner = pfe::Preconditioner::None;
  auto [x_none, rep_none] = pfe::pcg_solve(a, b, x0, cfg);
  CHECK(rep_ic.converged);
  CHECK(rep_none.converged);
  CHECK(rep_ic.iterations <= rep_none.iterations);
}

TEST_CASE("A-norm error is nonincreasing across iterations") {
  std::mt19937_64 rng(19);
  pfe::CsrMatrix a = normal_matrix_from_random_graph(20, rng);
  Eigen::MatrixXd ad = oracles::to_dense(a);
  Eigen::VectorXd b = Eigen::VectorXd::Random(20);
  Eigen::VectorXd exact = ad.partialPivLu().solve(b);

  // re-run with increasing iteration caps; CG theory says the A-norm error
  // is monotone in the iteration count
  double prev = std::numeric_limits<double>::infinity();
  for (int cap = 1; cap <= 20; ++cap) {
    pfe::PcgConfig cfg;
    cfg.rel_tol = 1e-15;
    cfg.max_iter = cap;
    auto [x, report] = pfe::pcg_solve(a, b, Eigen::VectorXd::Zero(20), cfg);
    Eigen::VectorXd err = exact - x;
    double a_norm = std::sqrt(err.dot(ad * err));
    CHECK(a_norm <= prev + 1e-10);
    prev = a_norm;
  }
}

TEST_CASE("pcg_solve_multi") {
  std::mt19937_64 rng(23);
  pfe::CsrMatrix a = normal_matrix_from_random_graph(30, rng);
  pfe::PcgConfig cfg;
  cfg.rel_tol = 1e-10;

  SUBCASE("identical columns give identical solutions") {
    Eigen::MatrixXd b(30, 2);
    b.col(0) = Eigen::VectorXd::Random(30);
    b.col(1) = b.col(0);
    auto [x, reports] = pfe::pcg_solve_multi(a, b, Eigen::MatrixXd::Zero(30, 2), cfg);
    CHECK(x.col(0) == x.col(1));
  }
  SUBCASE("identity matrix gives X = B") {
    std::vector<pfe::Triplet> trips;
    for (int i = 0; i < 5; ++i) trips.push_back({i, i, 1.0});
    pfe::CsrMatrix eye = pfe::csr_from_triplets(5, 5, trips);
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(5, 3);
    auto [x, reports] = pfe::pcg_solve_multi(eye, b, Eigen::MatrixXd::Zero(5, 3), cfg);
    CHECK((x - b).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("columns match sequential single-RHS solves bitwise") {
    Eigen::MatrixXd b = Eigen::MatrixXd::Random(30, 4);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Random(30, 4);
    auto [x, reports] = pfe::pcg_solve_multi(a, b, x0, cfg);
    pfe::PcgOperator op(a, cfg);
    for (int j = 0; j < 4; ++j) {
      auto [xj, rep] = op.solve(b.col(j), x0.col(j));
      CHECK(x.col(j) == xj);
      CHECK(rep.iterations == reports[j].iterations);
    }
  }
}

TEST_CASE("bad configs are rejected") {
  pfe::CsrMatrix eye = pfe::csr_from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  pfe::PcgConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(pfe::pcg_solve(eye, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), cfg),
                  pfe::ConfigError);
  cfg = pfe::PcgConfig{};
  CHECK_THROWS_AS(pfe::pcg_solve(eye, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), cfg),
                  pfe::ConfigError);
}
