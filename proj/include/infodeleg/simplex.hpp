#pragma once

// Revised primal simplex for  max c'x  s.t.  Ax = b, x >= 0,  started from a
// caller-supplied feasible basis. Columns flagged fixed are held at zero: they
// never enter, and leave as soon as a pivot touches their row. That lets a
// caller seed rows with zero-level artificials instead of running phase 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "infodeleg/errors.hpp"

namespace infodeleg {

// Column-compressed sparse matrix.
struct SparseColumns {
  std::size_t rows = 0;
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> index;
  std::vector<double> value;

  std::size_t cols() const noexcept { return start.size() - 1; }

  std::size_t add(std::initializer_list<std::pair<std::size_t, double>> entries) {
    for (const auto& [r, v] : entries) {
      if (v != 0.0) {
        index.push_back(r);
        value.push_back(v);
      }
    }
    start.push_back(index.size());
    return cols() - 1;
  }
};

struct SimplexOptions {
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
  std::size_t refactor_every = 100;
  std::size_t max_iterations = 500000;
  std::size_t degenerate_run_before_bland = 0;  // 0: twice the row count
};

class RevisedSimplex {
 public:
  RevisedSimplex(SparseColumns a, std::vector<double> b, std::vector<std::size_t> basis,
                 std::vector<bool> fixed, SimplexOptions opt = {})
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)), fixed_(std::move(fixed)), opt_(opt) {
    const std::size_t m = a_.rows;
    if (b_.size() != m || basis_.size() != m || fixed_.size() != a_.cols()) {
      throw DomainError("simplex dimensions do not agree");
    }
    if (opt_.degenerate_run_before_bland == 0) opt_.degenerate_run_before_bland = 2 * m;
    in_basis_.assign(a_.cols(), false);
    for (std::size_t j : basis_) in_basis_[j] = true;
    allowed_.assign(a_.cols(), true);
    refactor();
    for (std::size_t i = 0; i < m; ++i) {
      if (xb_[i] < -1e-9) throw DomainError("initial basis is not primal feasible");
    }
  }

  // Restricts entering candidates to columns with mask[j] = true.
  void restrict_columns(const std::vector<bool>& mask) { allowed_ = mask; }

  // Maximizes c'x from the current basis. Returns the iteration count.
  std::size_t maximize(const std::vector<double>& c) {
    const std::size_t m = a_.rows;
    c_ = c;
    std::size_t iters = 0, since_refactor = 0, degenerate_run = 0;
    Eigen::VectorXd alpha(m);
    while (true) {
      if (iters++ >= opt_.max_iterations) throw NumericError("simplex iteration limit reached", double(iters));
      compute_duals();
      const bool bland = degenerate_run >= opt_.degenerate_run_before_bland;
      std::size_t q = npos;
      double best = opt_.optimality_tol;
      for (std::size_t j = 0; j < a_.cols(); ++j) {
        if (in_basis_[j] || fixed_[j] || !allowed_[j]) continue;
        const double d = reduced_cost(j);
        if (d > best) {
          q = j;
          if (bland) break;
          best = d;
        }
      }
      if (q == npos) break;

      alpha.setZero();
      for (std::size_t k = a_.start[q]; k < a_.start[q + 1]; ++k) alpha += binv_.col(a_.index[k]) * a_.value[k];

      std::size_t r = npos;
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const bool fixed_row = fixed_[basis_[i]];
        double ratio;
        if (fixed_row) {
          if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
          ratio = 0.0;
        } else {
          if (alpha[i] <= opt_.pivot_tol) continue;
          ratio = std::max(0.0, xb_[i]) / alpha[i];
        }
        const bool better = ratio < theta - 1e-14 ||
                            (ratio <= theta + 1e-14 && r != npos && prefer_leaving(i, r, alpha, bland));
        if (r == npos || better) {
          r = i;
          theta = std::min(theta, ratio);
        }
      }
      if (r == npos) throw NumericError("simplex problem is unbounded", 0.0);
      theta = fixed_[basis_[r]] ? 0.0 : std::max(0.0, xb_[r]) / alpha[r];

      for (std::size_t i = 0; i < m; ++i) xb_[i] -= theta * alpha[i];
      xb_[r] = theta;
      const Eigen::RowVectorXd pivot_row = binv_.row(r) / alpha[r];
      binv_.noalias() -= alpha * pivot_row;
      binv_.row(r) = pivot_row;
      in_basis_[basis_[r]] = false;
      basis_[r] = q;
      in_basis_[q] = true;

      degenerate_run = theta <= 1e-14 ? degenerate_run + 1 : 0;
      if (++since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      ++pivots_;
    }
    refactor();
    compute_duals();
    return iters - 1;
  }

  // Primal values for every column.
  std::vector<double> solution() const {
    std::vector<double> x(a_.cols(), 0.0);
    for (std::size_t i = 0; i < basis_.size(); ++i) x[basis_[i]] = std::max(0.0, xb_[i]);
    return x;
  }

  // c_j - y'a_j for the objective of the last maximize call.
  double reduced_cost(std::size_t j) const {
    double d = c_[j];
    for (std::size_t k = a_.start[j]; k < a_.start[j + 1]; ++k) d -= y_[a_.index[k]] * a_.value[k];
    return d;
  }

  std::size_t pivots() const noexcept { return pivots_; }
  const SparseColumns& columns() const noexcept { return a_; }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // Among tied rows: fixed columns leave first; then Bland's smallest index or
  // the largest pivot.
  bool prefer_leaving(std::size_t i, std::size_t r, const Eigen::VectorXd& alpha, bool bland) const {
    const bool fi = fixed_[basis_[i]], fr = fixed_[basis_[r]];
    if (fi != fr) return fi;
    if (bland) return basis_[i] < basis_[r];
    return std::abs(alpha[i]) > std::abs(alpha[r]);
  }

  void refactor() {
    const std::size_t m = a_.rows;
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = basis_[i];
      for (std::size_t k = a_.start[j]; k < a_.start[j + 1]; ++k) basis_matrix(a_.index[k], i) = a_.value[k];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    binv_ = lu.inverse();
    Eigen::Map<const Eigen::VectorXd> b(b_.data(), m);
    xb_ = binv_ * b;
    for (std::size_t i = 0; i < m; ++i) {
      if (fixed_[basis_[i]] || (xb_[i] < 0.0 && xb_[i] > -1e-9)) xb_[i] = 0.0;
    }
  }

  void compute_duals() {
    const std::size_t m = a_.rows;
    Eigen::VectorXd cb(m);
    for (std::size_t i = 0; i < m; ++i) cb[i] = c_.empty() ? 0.0 : c_[basis_[i]];
    y_ = binv_.transpose() * cb;
  }

  SparseColumns a_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::vector<bool> fixed_;
  std::vector<bool> in_basis_;
  std::vector<bool> allowed_;
  SimplexOptions opt_;
  std::vector<double> c_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd y_;
  std::size_t pivots_ = 0;
};

}  // namespace infodeleg
