#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfe/sparse.hpp"

namespace pfe {

enum class Preconditioner { Ic0, Jacobi, None };

struct PcgConfig {
  double rel_tol = 1e-6;
  int max_iter = 1000;
  Preconditioner preconditioner = Preconditioner::Ic0;
};

struct PcgReport {
  int iterations = 0;
  double final_rel_residual = 0.0;
  bool converged = false;
  bool jacobi_fallback = false;  // IC(0) broke down and jacobi was used instead
};

/// SPD system A plus its preconditioner, reusable across many right-hand
/// sides. The factorization happens once at construction; IC(0) breakdown
/// silently degrades to the jacobi preconditioner (reported per solve).
class PcgOperator {
 public:
  PcgOperator(CsrMatrix a, PcgConfig cfg);

  std::pair<Eigen::VectorXd, PcgReport> solve(const Eigen::VectorXd& b,
                                              const Eigen::VectorXd& x0) const;

  /// Column j of the result is solve(b.col(j), x0.col(j)); the factor is
  /// shared read-only across columns.
  std::pair<Eigen::MatrixXd, std::vector<PcgReport>> solve_multi(
      const Eigen::MatrixXd& b, const Eigen::MatrixXd& x0) const;

  const CsrMatrix& matrix() const { return a_; }
  bool jacobi_fallback() const { return fallback_; }

 private:
  Eigen::VectorXd apply_preconditioner(const Eigen::VectorXd& r) const;

  CsrMatrix a_;
  PcgConfig cfg_;
  std::optional<IcFactor> ic_;
  Eigen::VectorXd inv_diag_;
  bool fallback_ = false;
};

std::pair<Eigen::VectorXd, PcgReport> pcg_solve(const CsrMatrix& a, const Eigen::VectorXd& b,
                                                const Eigen::VectorXd& x0,
                                                const PcgConfig& cfg);

std::pair<Eigen::MatrixXd, std::vector<PcgReport>> pcg_solve_multi(const CsrMatrix& a,
                                                                   const Eigen::MatrixXd& b,
                                                                   const Eigen::MatrixXd& x0,
                                                                   const PcgConfig& cfg);

}  // namespace pfe
