#include "pfe/solver.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <Eigen/SVD>

#include "pfe/errors.hpp"

namespace pfe {

double objective(const CsrMatrix& m, const Embedding& y) {
  if (y.rows() != m.ncols) throw ConfigError("objective: dimension mismatch");
  return spmm_dense(m, y).cwiseAbs().sum();
}

Eigen::MatrixXd shrink(const Eigen::MatrixXd& v, double gamma) {
  if (gamma < 0.0) throw ConfigError("shrink: gamma must be >= 0");
  return v.unaryExpr([gamma](double x) {
    double mag = std::abs(x) - gamma;
    return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
  });
}

Eigen::MatrixXd project_orthogonal(const Eigen::MatrixXd& a) {
  if (a.rows() < a.cols()) throw ConfigError("project_orthogonal: need rows >= cols");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double tol = 1e-12 * std::max(1.0, sv[0]);
  int deficient = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= tol) ++deficient;
  }
  if (deficient > 0) {
    throw NumericalError("project_orthogonal: input rank-deficient in " +
                         std::to_string(deficient) + " column(s)");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

PfeSolver::PfeSolver(const WeightedGraph& g, const PfeParams& params)
    : params_(params),
      n_(g.n),
      m_(difference_matrix(g)),
      mt_(transpose(m_)),
      degree_(g.degree),
      sqrt_degree_(g.degree.cwiseSqrt()),
      op_(form_normal_matrix(m_, g.degree, params.lambda, params.r), params.pcg) {
  if (params.dim < 1) throw ConfigError("PfeSolver: dim must be >= 1");
  if (params.lambda <= 0.0 || params.r <= 0.0) {
    throw ConfigError("PfeSolver: lambda and r must be > 0");
  }
  if (params.soc_max < 1 || params.sb_max_stage1 < 1) {
    throw ConfigError("PfeSolver: iteration caps must be >= 1");
  }
}

SolverState PfeSolver::make_state(const Embedding& y0) const {
  if (y0.rows() != n_ || y0.cols() != params_.dim) {
    throw ConfigError("PfeSolver: initial embedding has wrong shape");
  }
  SolverState st;
  st.y = y0;
  st.p = sqrt_degree_.asDiagonal() * y0;
  st.bregman = Eigen::MatrixXd::Zero(n_, params_.dim);
  st.split_b = Eigen::MatrixXd::Zero(m_.nrows, params_.dim);
  st.split_s = Eigen::MatrixXd::Zero(m_.nrows, params_.dim);
  return st;
}

void PfeSolver::split_bregman(SolverState& state, int max_iter,
                              const IterateCallback& on_iterate) const {
  const double half_lambda = 0.5 * params_.lambda;
  const double half_r = 0.5 * params_.r;
  // The quadratic penalty is (r/2)|D^{1/2}Y - P + B|^2, so the right-hand
  // side carries D^{1/2}(P - B).
  const Eigen::MatrixXd rhs_quad =
      half_r * (sqrt_degree_.asDiagonal() * (state.p - state.bregman));

  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd rhs =
        half_lambda * spmm_dense(mt_, state.split_s - state.split_b) + rhs_quad;
    Eigen::MatrixXd y_old = state.y;
    auto [y_new, reports] = op_.solve_multi(rhs, state.y);
    for (std::size_t j = 0; j < reports.size(); ++j) {
      if (!reports[j].converged) {
        std::cerr << "pfe: inner solve column " << j << " stopped at rel residual "
                  << reports[j].final_rel_residual << "\n";
      }
    }
    state.y = y_new;
    if (!state.y.allFinite()) throw NumericalError("split_bregman: NaN in embedding");

    Eigen::MatrixXd my = spmm_dense(m_, state.y);
    state.split_s = shrink(my + state.split_b, 1.0 / params_.lambda);
    state.split_b += my - state.split_s;

    if (on_iterate) on_iterate(it, state.y);

    double denom = y_old.norm();
    if (params_.conv_tol > 0.0 && denom > 0.0 &&
        (state.y - y_old).norm() / denom <= params_.conv_tol) {
      break;
    }
  }
}

void PfeSolver::run_soc(SolverState& state, int soc_max, int sb_max) const {
  for (int k = 0; k < soc_max; ++k) {
    state.split_b.setZero();
    state.split_s.setZero();
    Eigen::MatrixXd y_old = state.y;
    split_bregman(state, sb_max);
    Eigen::MatrixXd dy = sqrt_degree_.asDiagonal() * state.y;
    state.p = project_orthogonal(dy + state.bregman);
    state.bregman += dy - state.p;

    double denom = y_old.norm();
    if (params_.conv_tol > 0.0 && denom > 0.0 &&
        (state.y - y_old).norm() / denom <= params_.conv_tol) {
      break;
    }
  }
}

SolverState PfeSolver::two_stage(const Embedding& y0) const {
  SolverState state = make_state(y0);
  run_soc(state, params_.soc_max, params_.sb_max_stage1);
  if (params_.sb_max_stage2 > 0) {
    // Orthogonality relaxed: P and B frozen, inner variables continued.
    split_bregman(state, params_.sb_max_stage2);
  }
  return state;
}

Embedding split_bregman(const CsrMatrix& m, const Eigen::VectorXd& d_vec,
                        const Eigen::MatrixXd& p, const Eigen::MatrixXd& b,
                        const PfeParams& params, const Embedding& y_init, int max_iter,
                        const IterateCallback& on_iterate) {
  PfeParams local = params;
  local.dim = static_cast<int>(y_init.cols());

  SolverState state;
  state.y = y_init;
  state.p = p;
  state.bregman = b;
  state.split_b = Eigen::MatrixXd::Zero(m.nrows, local.dim);
  state.split_s = Eigen::MatrixXd::Zero(m.nrows, local.dim);

  // Standalone entry point: build the operator for this call only.
  PcgOperator op(form_normal_matrix(m, d_vec, local.lambda, local.r), local.pcg);
  CsrMatrix mt = transpose(m);

  const double half_lambda = 0.5 * local.lambda;
  const double half_r = 0.5 * local.r;
  const Eigen::MatrixXd rhs_quad =
      half_r * (d_vec.cwiseSqrt().asDiagonal() * (state.p - state.bregman));

  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd rhs =
        half_lambda * spmm_dense(mt, state.split_s - state.split_b) + rhs_quad;
    Eigen::MatrixXd y_old = state.y;
    auto [y_new, reports] = op.solve_multi(rhs, state.y);
    state.y = y_new;
    if (!state.y.allFinite()) throw NumericalError("split_bregman: NaN in embedding");

    Eigen::MatrixXd my = spmm_dense(m, state.y);
    state.split_s = shrink(my + state.split_b, 1.0 / local.lambda);
    state.split_b += my - state.split_s;

    if (on_iterate) on_iterate(it, state.y);

    double denom = y_old.norm();
    if (local.conv_tol > 0.0 && denom > 0.0 &&
        (state.y - y_old).norm() / denom <= local.conv_tol) {
      break;
    }
  }
  return state.y;
}

Embedding soc(const WeightedGraph& g, const PfeParams& params, const Embedding& y0) {
  PfeSolver solver(g, params);
  SolverState state = solver.make_state(y0);
  solver.run_soc(state, params.soc_max, params.sb_max_stage1);
  return state.y;
}

Embedding pfe_two_stage(const WeightedGraph& g, const PfeParams& params, const Embedding& y0) {
  return PfeSolver(g, params).two_stage(y0).y;
}

void save_embedding(const Embedding& y, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_embedding: cannot open " + path);
  out << y.rows() << " " << y.cols() << "\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j) out << ",";
      out << y(i, j);
    }
    out << "\n";
  }
  if (!out) throw IoError("save_embedding: write failed for " + path);
}

Embedding load_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_embedding: cannot open " + path);
  Eigen::Index n = 0, d = 0;
  if (!(in >> n >> d) || n < 1 || d < 1) {
    throw IoError("load_embedding: bad header in " + path);
  }
  Embedding y(n, d);
  std::string line;
  std::getline(in, line);  // rest of header line
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw IoError("load_embedding: truncated file " + path);
    std::istringstream is(line);
    std::string cell;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!std::getline(is, cell, ',')) {
        throw IoError("load_embedding: short row " + std::to_string(i) + " in " + path);
      }
      y(i, j) = std::stod(cell);
    }
  }
  return y;
}

}  // namespace pfe
