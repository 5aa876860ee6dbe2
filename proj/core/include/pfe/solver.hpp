#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "pfe/graph.hpp"
#include "pfe/pcg.hpp"
#include "pfe/sparse.hpp"

namespace pfe {

using Embedding = Eigen::MatrixXd;  // n x d, column-major

struct PfeParams {
  int dim = 5;
  double lambda = 100.0;  // split-Bregman penalty
  double r = 1.0;         // orthogonality-splitting penalty
  int soc_max = 10;
  int sb_max_stage1 = 5;
  int sb_max_stage2 = 100;
  double conv_tol = 1e-4;  // relative Frobenius change of Y
  PcgConfig pcg{1e-6, 1000, Preconditioner::Ic0};
};

/// All iterates of the nested Bregman scheme.
struct SolverState {
  Eigen::MatrixXd y;        // n x d embedding
  Eigen::MatrixXd p;        // n x d orthogonality split variable
  Eigen::MatrixXd bregman;  // n x d outer Bregman variable
  Eigen::MatrixXd split_b;  // |E| x d inner Bregman variable
  Eigen::MatrixXd split_s;  // |E| x d shrinkage variable
};

using IterateCallback = std::function<void(int iteration, const Eigen::MatrixXd& y)>;

/// Sum over edges of w_ij * |y_i - y_j|_1, evaluated as the l1 norm of M Y.
double objective(const CsrMatrix& m, const Embedding& y);

/// Elementwise soft threshold sign(v) * max(|v| - gamma, 0).
Eigen::MatrixXd shrink(const Eigen::MatrixXd& v, double gamma);

/// Frobenius-nearest matrix with orthonormal columns (thin SVD, P = U V^T).
/// Throws on rank deficiency, reporting the number of deficient columns.
Eigen::MatrixXd project_orthogonal(const Eigen::MatrixXd& a);

/// The PFE solver for one graph. Builds M, M^T and the shared normal matrix
/// (lambda/2) M^T M + (r/2) D once; the IC factor is reused by every inner
/// linear solve.
class PfeSolver {
 public:
  PfeSolver(const WeightedGraph& g, const PfeParams& params);

  /// Split-Bregman iterations on state.y / split_b / split_s with state.p and
  /// state.bregman held fixed. Stops on the relative-change test or after
  /// max_iter iterations. The callback, when set, observes Y after each
  /// linear solve.
  void split_bregman(SolverState& state, int max_iter,
                     const IterateCallback& on_iterate = {}) const;

  /// Outer Bregman loop: alternates split_bregman (inner variables re-zeroed
  /// per call) with the orthogonality projection and outer Bregman update.
  void run_soc(SolverState& state, int soc_max, int sb_max) const;

  /// Stage I: run_soc with the stage-1 caps. Stage II: split_bregman
  /// continued from the Stage-I inner variables with P and B frozen.
  SolverState two_stage(const Embedding& y0) const;

  SolverState make_state(const Embedding& y0) const;

  const CsrMatrix& diff_matrix() const { return m_; }
  const PfeParams& params() const { return params_; }

 private:
  PfeParams params_;
  int n_;
  CsrMatrix m_;
  CsrMatrix mt_;
  Eigen::VectorXd degree_;
  Eigen::VectorXd sqrt_degree_;
  PcgOperator op_;
};

/// One self-contained Split-Bregman solve with fresh (zero) inner variables.
Embedding split_bregman(const CsrMatrix& m, const Eigen::VectorXd& d_vec,
                        const Eigen::MatrixXd& p, const Eigen::MatrixXd& b,
                        const PfeParams& params, const Embedding& y_init, int max_iter,
                        const IterateCallback& on_iterate = {});

Embedding soc(const WeightedGraph& g, const PfeParams& params, const Embedding& y0);

Embedding pfe_two_stage(const WeightedGraph& g, const PfeParams& params, const Embedding& y0);

/// Embedding CSV: first line "n d", then n rows of d comma-separated values
/// with 17 significant digits.
void save_embedding(const Embedding& y, const std::string& path);
Embedding load_embedding(const std::string& path);

}  // namespace pfe
