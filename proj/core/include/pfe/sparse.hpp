#pragma once

#include <vector>

#include <Eigen/Dense>

namespace pfe {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. After construction each row is sorted by
/// column index and holds no duplicates or explicit zeros.
struct CsrMatrix {
  int nrows = 0;
  int ncols = 0;
  std::vector<int> row_ptr;  // length nrows+1, nondecreasing
  std::vector<int> col_idx;
  std::vector<double> values;

  int nnz() const { return static_cast<int>(values.size()); }
};

/// Builds a CSR matrix from (row, col, value) triplets. Duplicate entries are
/// summed; entries that sum to exactly zero are dropped.
CsrMatrix csr_from_triplets(int nrows, int ncols, const std::vector<Triplet>& triplets);

CsrMatrix transpose(const CsrMatrix& a);

/// y = A x. Each row is accumulated left to right so results are bitwise
/// reproducible.
Eigen::VectorXd spmv(const CsrMatrix& a, const Eigen::VectorXd& x);

/// Y = A X, column by column; column j is exactly spmv(a, x.col(j)).
Eigen::MatrixXd spmm_dense(const CsrMatrix& a, const Eigen::MatrixXd& x);

/// A = (lambda/2) M^T M + (r/2) diag(degrees). Symmetric positive definite
/// for r > 0 and positive degrees.
CsrMatrix form_normal_matrix(const CsrMatrix& m, const Eigen::VectorXd& degrees,
                             double lambda, double r);

/// Zero-fill incomplete Cholesky factor: lower triangular, pattern contained
/// in the lower triangle of the input.
struct IcFactor {
  CsrMatrix lower;
  double shift = 0.0;  // diagonal shift applied before the factorization succeeded
};

enum class TriangularMode { Forward, Backward };

/// IC(0) factorization. On pivot breakdown the matrix is refactorized as
/// A + alpha*I with alpha doubling from 1e-3*max(diag), at most 8 attempts;
/// afterwards a NumericalError is thrown.
IcFactor incomplete_cholesky(const CsrMatrix& a);

/// Forward mode solves L x = b, backward mode solves L^T x = b.
Eigen::VectorXd triangular_solve(const IcFactor& factor, const Eigen::VectorXd& b,
                                 TriangularMode mode);

}  // namespace pfe
