#pragma once

#include <vector>

#include <Eigen/Dense>

namespace polysr {

/// Constraint operator A of a standard-form LP, exposed through the three
/// products an interior-point method needs.
class LpOperator {
 public:
  virtual ~LpOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const = 0;
  /// A diag(d) A^T.
  virtual Eigen::MatrixXd normal(const Eigen::VectorXd& d) const = 0;
  /// The listed columns of A as a dense matrix.
  virtual Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const = 0;
};

class DenseLpOperator final : public LpOperator {
 public:
  explicit DenseLpOperator(Eigen::MatrixXd a) : a_(std::move(a)) {}
  Eigen::Index rows() const override { return a_.rows(); }
  Eigen::Index cols() const override { return a_.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return a_ * x; }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const override {
    return a_.transpose() * y;
  }
  Eigen::MatrixXd normal(const Eigen::VectorXd& d) const override;
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const override {
    return a_(Eigen::all, idx);
  }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }

 private:
  Eigen::MatrixXd a_;
};

/// [A, -A]: the split c = c+ - c- of a free variable into two nonnegative
/// parts, sharing A's normal-matrix assembly.
class SplitLpOperator final : public LpOperator {
 public:
  explicit SplitLpOperator(const LpOperator& base) : base_(base) {}
  Eigen::Index rows() const override { return base_.rows(); }
  Eigen::Index cols() const override { return 2 * base_.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const override;
  Eigen::MatrixXd normal(const Eigen::VectorXd& d) const override;
  Eigen::MatrixXd columns(const std::vector<Eigen::Index>& idx) const override;

 private:
  const LpOperator& base_;
};

struct LpOptions {
  double gap_tol = 1e-9;       ///< relative duality gap at termination
  double feas_tol = 1e-9;      ///< relative primal / dual residual at termination
  double infeasible_tol = 1e-7;
  int max_iterations = 200;
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  ///< lambda
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  ///< ||b - Ax|| / (1 + ||b||)
  int iterations = 0;
  bool crossover = false;  ///< solution came from the support solve
};

/// min c^T x subject to A x = b, x >= 0, by Mehrotra predictor-corrector.
/// Once the iterates settle, the apparent support is tried as an optimal
/// basis (least squares on its columns plus a matching dual); a candidate
/// that passes the feasibility and gap tests ends the iteration.
LpResult solve_lp(const LpOperator& a, const Eigen::VectorXd& cost, const Eigen::VectorXd& b,
                  const LpOptions& options = {});

}  // namespace polysr
