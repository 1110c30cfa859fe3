#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace sosc {

/// One entry of a symmetric constraint matrix: `value` at (row, col) and
/// (col, row). Only row <= col is stored.
template <class T>
struct BasicSymEntry {
  int row;
  int col;
  T value;
};

using SymEntry = BasicSymEntry<double>;

/// Primal-dual pair over one PSD block plus free variables:
///
///   min <C, X> + c_f^T x_f   s.t.  <A_i, X> + (B x_f)_i = b_i,  X PSD
///   max b^T y                s.t.  C - sum_i y_i A_i = Z PSD,  B^T y = c_f
///
/// The constraint matrices A_i must be linearly independent.
template <class T>
struct BasicSdpProblem {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  int dim = 0;
  std::vector<std::vector<BasicSymEntry<T>>> constraints;
  Vector rhs;
  Matrix cost;       // dim x dim, symmetric
  Matrix free_cols;  // m x nf
  Vector free_cost;  // nf
};

using SdpProblem = BasicSdpProblem<double>;

struct SdpOptions {
  double residual_tol = 1e-9;
  double gap_tol = 1e-10;
  int max_iterations = 120;
  double step_fraction = 0.95;
};

enum class SdpStatus { Converged, IterationLimit, NumericalBreakdown };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Converged:
      return "converged";
    case SdpStatus::IterationLimit:
      return "iteration-limit";
    case SdpStatus::NumericalBreakdown:
      return "numerical-breakdown";
  }
  return "?";
}

template <class T>
struct BasicSdpSolution {
  SdpStatus status = SdpStatus::NumericalBreakdown;
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> primal;  // X
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> slack;   // Z
  Eigen::Matrix<T, Eigen::Dynamic, 1> dual;                 // y
  Eigen::Matrix<T, Eigen::Dynamic, 1> free_vars;
  int iterations = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  double gap = 0;
  double primal_objective = 0;
  double dual_objective = 0;
  std::string message;
};

using SdpSolution = BasicSdpSolution<double>;

namespace detail {

// <A, X>; X need not be symmetric
template <class T, class M>
T apply_constraint(const std::vector<BasicSymEntry<T>>& a, const M& x) {
  T s = 0;
  for (const auto& e : a) s += e.value * (e.row == e.col ? x(e.row, e.row) : x(e.row, e.col) + x(e.col, e.row));
  return s;
}

template <class T, class M>
void add_constraint(const std::vector<BasicSymEntry<T>>& a, const T& w, M& out) {
  for (const auto& e : a) {
    out(e.row, e.col) += w * e.value;
    if (e.row != e.col) out(e.col, e.row) += w * e.value;
  }
}

/// Largest alpha with x + alpha * dx PSD, capped at `cap`. The scaled
/// direction L^-1 dx L^-T is well conditioned, so its spectrum is taken in
/// double precision whatever the working scalar.
template <class M>
double max_step(const M& x, const M& dx, double cap) {
  Eigen::LLT<M> llt(x);
  if (llt.info() != Eigen::Success) return 0;
  M l_inv_dx = llt.matrixL().solve(dx);
  M s = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::MatrixXd sd = s.unaryExpr([](const auto& v) { return static_cast<double>(v); });
  sd = (0.5 * (sd + sd.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues()(0);
  if (lmin >= 0) return cap;
  return std::min(cap, -1.0 / lmin);
}

/// Schur complement M_ij = tr(A_i X A_j Z^{-1}).
template <class T>
class SchurBuilder {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

  explicit SchurBuilder(const BasicSdpProblem<T>& p) : p_(p) {
    const int n = p.dim;
    const std::size_t m = p.constraints.size();
    std::size_t nnz = 0;
    for (const auto& a : p.constraints) nnz += a.size();
    const double sparse_cost = 4.0 * static_cast<double>(nnz) * static_cast<double>(nnz) / 2.0;
    const double dense_cost = static_cast<double>(m) * 2.0 * n * n * n + static_cast<double>(m) * m * n * n / 2.0;
    dense_ = dense_cost < sparse_cost;
    if (!dense_) {
      directed_.resize(m);
      for (std::size_t i = 0; i < m; ++i)
        for (const auto& e : p.constraints[i]) {
          directed_[i].push_back({e.row, e.col, e.value});
          if (e.row != e.col) directed_[i].push_back({e.col, e.row, e.value});
        }
    } else {
      mats_.reserve(m);
      for (const auto& a : p.constraints) {
        Matrix d = Matrix::Zero(n, n);
        add_constraint(a, T(1), d);
        mats_.push_back(std::move(d));
      }
    }
  }

  Matrix build(const Matrix& x, const Matrix& zinv) const {
    const std::size_t m = p_.constraints.size();
    Matrix schur(m, m);
    if (dense_) {
      for (std::size_t j = 0; j < m; ++j) {
        Matrix t = x * mats_[j] * zinv;
        for (std::size_t i = 0; i <= j; ++i) {
          T v = mats_[i].cwiseProduct(t.transpose()).sum();
          schur(i, j) = v;
          schur(j, i) = v;
        }
      }
    } else {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
          T s = 0;
          for (const auto& a : directed_[i])
            for (const auto& c : directed_[j]) s += a.value * c.value * x(a.col, c.row) * zinv(c.col, a.row);
          schur(i, j) = s;
          schur(j, i) = s;
        }
    }
    return schur;
  }

 private:
  const BasicSdpProblem<T>& p_;
  bool dense_ = false;
  std::vector<std::vector<BasicSymEntry<T>>> directed_;
  std::vector<Matrix> mats_;
};

}  // namespace detail

/// Infeasible-start primal-dual path following with the HKM search
/// direction and Mehrotra's predictor-corrector. Deterministic. T is the
/// working scalar (double, or a multiprecision float for hard instances).
template <class T>
BasicSdpSolution<T> solve_sdp(const BasicSdpProblem<T>& p, const SdpOptions& opt = {}) {
  using MatrixXt = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorXt = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using std::abs;
  using std::pow;
  using std::sqrt;
  const int n = p.dim;
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  const Eigen::Index nf = p.free_cols.cols();
  BasicSdpSolution<T> sol;

  auto a_op = [&](const MatrixXt& x) {
    VectorXt r(m);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = detail::apply_constraint(p.constraints[i], x);
    return r;
  };
  auto a_adj = [&](const VectorXt& y) {
    MatrixXt out = MatrixXt::Zero(n, n);
    for (Eigen::Index i = 0; i < m; ++i) detail::add_constraint(p.constraints[i], T(y(i)), out);
    return out;
  };
  auto sym = [](const MatrixXt& a) -> MatrixXt { return (T(0.5) * (a + a.transpose())).eval(); };

  // starting point scaled to the data
  T max_a = 1, max_ratio = 1;
  for (Eigen::Index i = 0; i < m; ++i) {
    T fro = 0;
    for (const auto& e : p.constraints[i]) fro += T(e.row == e.col ? 1 : 2) * e.value * e.value;
    fro = sqrt(fro);
    max_a = std::max(max_a, fro);
    max_ratio = std::max(max_ratio, T((1 + abs(p.rhs(i))) / (1 + fro)));
  }
  const T xi = std::max({T(10), T(sqrt(T(n))), T(n * max_ratio)});
  const T eta = std::max({T(10), T(sqrt(T(n))), max_a, T(p.cost.norm())});
  MatrixXt x = xi * MatrixXt::Identity(n, n);
  MatrixXt z = eta * MatrixXt::Identity(n, n);
  VectorXt y = VectorXt::Zero(m);
  VectorXt xf = VectorXt::Zero(nf);

  detail::SchurBuilder<T> schur_builder(p);
  const T b_norm = 1 + p.rhs.norm();
  const T c_norm = 1 + p.cost.norm() + p.free_cost.norm();
  const T reg_scale = T(100) * Eigen::NumTraits<T>::epsilon();
  // iterates can drift once the problem stalls; keep the most accurate one
  BasicSdpSolution<T> best;
  double best_merit = std::numeric_limits<double>::infinity();
  auto finish = [&](SdpStatus status, const char* message) {
    best.status = status;
    best.message = message;
    return best;
  };

  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    VectorXt rp = p.rhs - a_op(x) - p.free_cols * xf;
    MatrixXt rd = p.cost - a_adj(y) - z;
    VectorXt rf = p.free_cost - p.free_cols.transpose() * y;
    const T mu = (x.cwiseProduct(z)).sum() / T(n);
    const T pobj = (p.cost.cwiseProduct(x)).sum() + p.free_cost.dot(xf);
    const T dobj = p.rhs.dot(y);
    sol.primal_objective = static_cast<double>(pobj);
    sol.dual_objective = static_cast<double>(dobj);
    sol.primal_residual = static_cast<double>(T(rp.norm() / b_norm));
    sol.dual_residual = static_cast<double>(T((rd.norm() + rf.norm()) / c_norm));
    sol.gap = static_cast<double>(T(abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))));
    sol.iterations = iter;
    sol.primal = x;
    sol.slack = z;
    sol.dual = y;
    sol.free_vars = xf;
    const double merit = std::max({sol.primal_residual, sol.dual_residual, sol.gap});
    if (merit < best_merit) {
      best_merit = merit;
      best = sol;
    }
    if (sol.primal_residual < opt.residual_tol && sol.dual_residual < opt.residual_tol && sol.gap < opt.gap_tol &&
        static_cast<double>(T(mu * T(n) / (1 + abs(pobj)))) < opt.gap_tol) {
      sol.status = SdpStatus::Converged;
      return sol;
    }
    if (iter == opt.max_iterations) break;

    Eigen::LLT<MatrixXt> zchol(z);
    if (zchol.info() != Eigen::Success) return finish(SdpStatus::NumericalBreakdown, "slack lost definiteness");
    MatrixXt zinv = sym(zchol.solve(MatrixXt::Identity(n, n)));
    MatrixXt schur = schur_builder.build(x, zinv);
    // tiny diagonal regularization keeps the factorization alive near the end
    const T reg = reg_scale * std::max(T(1), T(schur.diagonal().cwiseAbs().maxCoeff()));
    schur.diagonal().array() += reg;
    Eigen::LLT<MatrixXt> schur_chol(schur);
    if (schur_chol.info() != Eigen::Success)
      return finish(SdpStatus::NumericalBreakdown, "Schur complement not positive definite");
    // free-variable block: (B^T M^-1 B) dxf = B^T M^-1 r1 - rf
    MatrixXt minv_b = schur_chol.solve(p.free_cols);
    MatrixXt reduced = p.free_cols.transpose() * minv_b;
    Eigen::LDLT<MatrixXt> reduced_f(reduced);

    auto direction = [&](const MatrixXt& target_xz, MatrixXt& dx, VectorXt& dy, MatrixXt& dz, VectorXt& dxf) {
      // target_xz: desired value of X Z after the step, expressed as R with
      // dX = (R - X dZ) Z^{-1}
      VectorXt r1 = rp - a_op(((target_xz - x * rd) * zinv).eval());
      if (nf > 0) {
        VectorXt rhs_f = minv_b.transpose() * r1 - rf;
        dxf = reduced_f.solve(rhs_f);
        dy = schur_chol.solve(r1 - p.free_cols * dxf);
      } else {
        dxf.resize(0);
        dy = schur_chol.solve(r1);
      }
      dz = rd - a_adj(dy);
      dx = sym((target_xz - x * dz) * zinv);
    };
    // r1 derivation: A(dX) + B dxf = rp with dX = (R - X dZ) Z^{-1} and
    // dZ = Rd - A*(dy) gives M dy + B dxf = rp - A((R - X Rd) Z^{-1}).

    MatrixXt dx, dz;
    VectorXt dy, dxf;
    MatrixXt target = -x * z;
    direction(target, dx, dy, dz, dxf);
    double ap = detail::max_step(x, dx, 1.0);
    double ad = detail::max_step(z, dz, 1.0);
    const T mu_aff = ((x + T(ap) * dx).cwiseProduct(z + T(ad) * dz)).sum() / T(n);
    const double ratio = static_cast<double>(T(mu_aff / mu));
    const double sigma = std::clamp(std::pow(ratio, 3), 0.0, 1.0);
    target = T(sigma) * mu * MatrixXt::Identity(n, n) - x * z - dx * dz;
    direction(target, dx, dy, dz, dxf);
    ap = std::min(1.0, opt.step_fraction * detail::max_step(x, dx, 1e6));
    ad = std::min(1.0, opt.step_fraction * detail::max_step(z, dz, 1e6));
    if (!(ap > 0) || !(ad > 0) || !std::isfinite(ap) || !std::isfinite(ad))
      return finish(SdpStatus::NumericalBreakdown, "zero step length");
    x = sym(x + T(ap) * dx);
    xf += T(ap) * dxf;
    y += T(ad) * dy;
    z = sym(z + T(ad) * dz);
  }
  return finish(SdpStatus::IterationLimit, "iteration limit reached");
}

}  // namespace sosc
