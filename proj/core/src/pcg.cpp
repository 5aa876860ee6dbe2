#include "pfe/pcg.hpp"

#include <cmath>

#include "pfe/errors.hpp"

namespace pfe {

PcgOperator::PcgOperator(CsrMatrix a, PcgConfig cfg) : a_(std::move(a)), cfg_(cfg) {
  if (a_.nrows != a_.ncols) throw ConfigError("PcgOperator: matrix not square");
  if (cfg_.rel_tol <= 0.0) throw ConfigError("PcgOperator: rel_tol must be > 0");
  if (cfg_.max_iter < 1) throw ConfigError("PcgOperator: max_iter must be >= 1");

  if (cfg_.preconditioner != Preconditioner::None) {
    inv_diag_ = Eigen::VectorXd::Ones(a_.nrows);
    for (int r = 0; r < a_.nrows; ++r) {
      for (int k = a_.row_ptr[r]; k < a_.row_ptr[r + 1]; ++k) {
        if (a_.col_idx[k] == r && a_.values[k] > 0.0) inv_diag_[r] = 1.0 / a_.values[k];
      }
    }
  }
  if (cfg_.preconditioner == Preconditioner::Ic0) {
    try {
      ic_ = incomplete_cholesky(a_);
    } catch (const NumericalError&) {
      fallback_ = true;
    }
  }
}

Eigen::VectorXd PcgOperator::apply_preconditioner(const Eigen::VectorXd& r) const {
  if (ic_) {
    Eigen::VectorXd t = triangular_solve(*ic_, r, TriangularMode::Forward);
    return triangular_solve(*ic_, t, TriangularMode::Backward);
  }
  if (cfg_.preconditioner != Preconditioner::None) return inv_diag_.cwiseProduct(r);
  return r;
}

std::pair<Eigen::VectorXd, PcgReport> PcgOperator::solve(const Eigen::VectorXd& b,
                                                         const Eigen::VectorXd& x0) const {
  if (b.size() != a_.nrows || x0.size() != a_.nrows) {
    throw ConfigError("pcg_solve: dimension mismatch");
  }

  PcgReport report;
  report.jacobi_fallback = fallback_;

  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report.converged = true;
    return {Eigen::VectorXd::Zero(a_.nrows), report};
  }

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = b - spmv(a_, x);
  double rel = r.norm() / bnorm;
  if (rel <= cfg_.rel_tol) {
    report.converged = true;
    report.final_rel_residual = rel;
    return {x, report};
  }

  Eigen::VectorXd z = apply_preconditioner(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);

  for (int it = 1; it <= cfg_.max_iter; ++it) {
    Eigen::VectorXd q = spmv(a_, p);
    double pq = p.dot(q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      throw NumericalError("pcg_solve: indefinite or NaN curvature encountered");
    }
    double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    if (!x.allFinite()) throw NumericalError("pcg_solve: NaN in iterates");

    rel = r.norm() / bnorm;
    report.iterations = it;
    if (rel <= cfg_.rel_tol) {
      report.converged = true;
      break;
    }
    z = apply_preconditioner(r);
    double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  report.final_rel_residual = rel;
  return {x, report};
}

std::pair<Eigen::MatrixXd, std::vector<PcgReport>> PcgOperator::solve_multi(
    const Eigen::MatrixXd& b, const Eigen::MatrixXd& x0) const {
  if (b.rows() != a_.nrows || x0.rows() != a_.nrows || b.cols() != x0.cols()) {
    throw ConfigError("pcg_solve_multi: dimension mismatch");
  }
  Eigen::MatrixXd x(b.rows(), b.cols());
  std::vector<PcgReport> reports(b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    try {
      auto [xj, rep] = solve(b.col(j), x0.col(j));
      x.col(j) = xj;
      reports[j] = rep;
    } catch (const NumericalError&) {
      // one bad column must not abort the others
      x.col(j) = x0.col(j);
      reports[j].converged = false;
      reports[j].final_rel_residual = std::numeric_limits<double>::infinity();
    }
  }
  return {x, reports};
}

std::pair<Eigen::VectorXd, PcgReport> pcg_solve(const CsrMatrix& a, const Eigen::VectorXd& b,
                                                const Eigen::VectorXd& x0,
                                                const PcgConfig& cfg) {
  return PcgOperator(a, cfg).solve(b, x0);
}

std::pair<Eigen::MatrixXd, std::vector<PcgReport>> pcg_solve_multi(const CsrMatrix& a,
                                                                   const Eigen::MatrixXd& b,
                                                                   const Eigen::MatrixXd& x0,
                                                                   const PcgConfig& cfg) {
  return PcgOperator(a, cfg).solve_multi(b, x0);
}

}  // namespace pfe
