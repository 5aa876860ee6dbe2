#include "pfe/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfe/errors.hpp"

namespace pfe {

CsrMatrix csr_from_triplets(int nrows, int ncols, const std::vector<Triplet>& triplets) {
  if (nrows < 0 || ncols < 0) throw ConfigError("csr_from_triplets: negative dimensions");
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      std::ostringstream os;
      os << "csr_from_triplets: entry (" << t.row << "," << t.col << ") outside "
         << nrows << "x" << ncols;
      throw ConfigError(os.str());
    }
    if (!std::isfinite(t.value)) throw ConfigError("csr_from_triplets: non-finite value");
  }

  std::vector<Triplet> sorted = triplets;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m;
  m.nrows = nrows;
  m.ncols = ncols;
  m.row_ptr.assign(static_cast<std::size_t>(nrows) + 1, 0);

  std::size_t i = 0;
  for (int row = 0; row < nrows; ++row) {
    while (i < sorted.size() && sorted[i].row == row) {
      int col = sorted[i].col;
      double sum = 0.0;
      while (i < sorted.size() && sorted[i].row == row && sorted[i].col == col) {
        sum += sorted[i].value;
        ++i;
      }
      if (sum != 0.0) {
        m.col_idx.push_back(col);
        m.values.push_back(sum);
      }
    }
    m.row_ptr[static_cast<std::size_t>(row) + 1] = static_cast<int>(m.values.size());
  }
  return m;
}

CsrMatrix transpose(const CsrMatrix& a) {
  CsrMatrix t;
  t.nrows = a.ncols;
  t.ncols = a.nrows;
  t.row_ptr.assign(static_cast<std::size_t>(a.ncols) + 1, 0);
  t.col_idx.resize(a.values.size());
  t.values.resize(a.values.size());

  for (int c : a.col_idx) t.row_ptr[static_cast<std::size_t>(c) + 1]++;
  for (int c = 0; c < a.ncols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];

  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < a.nrows; ++r) {
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      int pos = next[a.col_idx[k]]++;
      t.col_idx[pos] = r;
      t.values[pos] = a.values[k];
    }
  }
  return t;
}

Eigen::VectorXd spmv(const CsrMatrix& a, const Eigen::VectorXd& x) {
  if (x.size() != a.ncols) throw ConfigError("spmv: dimension mismatch");
  Eigen::VectorXd y(a.nrows);
  for (int r = 0; r < a.nrows; ++r) {
    double sum = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      sum += a.values[k] * x[a.col_idx[k]];
    }
    y[r] = sum;
  }
  return y;
}

Eigen::MatrixXd spmm_dense(const CsrMatrix& a, const Eigen::MatrixXd& x) {
  if (x.rows() != a.ncols) throw ConfigError("spmm_dense: dimension mismatch");
  Eigen::MatrixXd y(a.nrows, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    y.col(j) = spmv(a, x.col(j));
  }
  return y;
}

CsrMatrix form_normal_matrix(const CsrMatrix& m, const Eigen::VectorXd& degrees,
                             double lambda, double r) {
  if (degrees.size() != m.ncols) throw ConfigError("form_normal_matrix: degree size mismatch");
  if (lambda < 0.0) throw ConfigError("form_normal_matrix: lambda must be >= 0");
  if (r <= 0.0) throw ConfigError("form_normal_matrix: r must be > 0");
  for (Eigen::Index i = 0; i < degrees.size(); ++i) {
    if (degrees[i] <= 0.0) {
      throw ConfigError("form_normal_matrix: nonpositive degree at vertex " +
                        std::to_string(i) + " (isolated vertex)");
    }
  }

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(m.nnz()) * 2 + degrees.size());
  const double hl = 0.5 * lambda;
  for (int row = 0; row < m.nrows; ++row) {
    for (int p = m.row_ptr[row]; p < m.row_ptr[row + 1]; ++p) {
      for (int q = m.row_ptr[row]; q < m.row_ptr[row + 1]; ++q) {
        trips.push_back({m.col_idx[p], m.col_idx[q], hl * m.values[p] * m.values[q]});
      }
    }
  }
  for (int i = 0; i < m.ncols; ++i) {
    trips.push_back({i, i, 0.5 * r * degrees[i]});
  }
  return csr_from_triplets(m.ncols, m.ncols, trips);
}

namespace {

// Lower-triangular pattern (diagonal included) of a, values copied with an
// optional diagonal shift.
CsrMatrix lower_triangle(const CsrMatrix& a, double shift) {
  CsrMatrix l;
  l.nrows = a.nrows;
  l.ncols = a.ncols;
  l.row_ptr.assign(static_cast<std::size_t>(a.nrows) + 1, 0);
  for (int r = 0; r < a.nrows; ++r) {
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      int c = a.col_idx[k];
      if (c > r) continue;
      l.col_idx.push_back(c);
      l.values.push_back(c == r ? a.values[k] + shift : a.values[k]);
    }
    l.row_ptr[r + 1] = static_cast<int>(l.values.size());
  }
  return l;
}

// One IC(0) sweep in place. Returns false on a nonpositive pivot.
bool ic0_factorize(CsrMatrix& l) {
  for (int i = 0; i < l.nrows; ++i) {
    int begin = l.row_ptr[i];
    int end = l.row_ptr[i + 1];
    if (begin == end || l.col_idx[end - 1] != i) return false;  // missing diagonal
    for (int k = begin; k < end; ++k) {
      int j = l.col_idx[k];
      // dot of rows i and j over columns < j
      double dot = 0.0;
      int pi = begin;
      int pj = l.row_ptr[j];
      int ej = l.row_ptr[j + 1];
      while (pi < k && pj < ej && l.col_idx[pj] < j) {
        if (l.col_idx[pi] == l.col_idx[pj]) {
          dot += l.values[pi] * l.values[pj];
          ++pi;
          ++pj;
        } else if (l.col_idx[pi] < l.col_idx[pj]) {
          ++pi;
        } else {
          ++pj;
        }
      }
      if (j == i) {
        double pivot = l.values[k] - dot;
        if (!(pivot > 0.0)) return false;
        l.values[k] = std::sqrt(pivot);
      } else {
        double diag = l.values[l.row_ptr[j + 1] - 1];
        l.values[k] = (l.values[k] - dot) / diag;
      }
    }
  }
  return true;
}

}  // namespace

IcFactor incomplete_cholesky(const CsrMatrix& a) {
  if (a.nrows != a.ncols) throw ConfigError("incomplete_cholesky: matrix not square");

  double max_diag = 0.0;
  for (int r = 0; r < a.nrows; ++r) {
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (a.col_idx[k] == r) max_diag = std::max(max_diag, a.values[k]);
    }
  }

  double shift = 0.0;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    CsrMatrix l = lower_triangle(a, shift);
    if (ic0_factorize(l)) return IcFactor{std::move(l), shift};
    shift = (shift == 0.0) ? 1e-3 * std::max(max_diag, 1.0) : 2.0 * shift;
  }
  throw NumericalError(
      "incomplete_cholesky: breakdown persists after 8 diagonal shifts; "
      "fall back to the jacobi preconditioner");
}

Eigen::VectorXd triangular_solve(const IcFactor& factor, const Eigen::VectorXd& b,
                                 TriangularMode mode) {
  const CsrMatrix& l = factor.lower;
  if (b.size() != l.nrows) throw ConfigError("triangular_solve: dimension mismatch");

  Eigen::VectorXd x = b;
  if (mode == TriangularMode::Forward) {
    for (int i = 0; i < l.nrows; ++i) {
      double sum = x[i];
      double diag = 0.0;
      for (int k = l.row_ptr[i]; k < l.row_ptr[i + 1]; ++k) {
        if (l.col_idx[k] == i) {
          diag = l.values[k];
        } else {
          sum -= l.values[k] * x[l.col_idx[k]];
        }
      }
      if (diag == 0.0) throw NumericalError("triangular_solve: zero diagonal");
      x[i] = sum / diag;
    }
  } else {
    // L^T x = b via column sweeps over the rows of L.
    for (int i = l.nrows - 1; i >= 0; --i) {
      int end = l.row_ptr[i + 1];
      double diag = (end > l.row_ptr[i] && l.col_idx[end - 1] == i) ? l.values[end - 1] : 0.0;
      if (diag == 0.0) throw NumericalError("triangular_solve: zero diagonal");
      x[i] /= diag;
      for (int k = l.row_ptr[i]; k < end - 1; ++k) {
        x[l.col_idx[k]] -= l.values[k] * x[i];
      }
    }
  }
  return x;
}

}  // namespace pfe
