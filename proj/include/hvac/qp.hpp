#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hvac {

/// Convex quadratic program
///
///   minimize    0.5 x' H x + g' x + constant
///   subject to  A x  = b    (eq_matrix, eq_rhs)
///               G x <= h    (ineq_matrix, ineq_rhs)
///
/// H must be symmetric positive definite.
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  double constant = 0.0;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;

  explicit QuadraticProgram(Eigen::Index n = 0);

  Eigen::Index size() const { return hessian.rows(); }
  double objective(const Eigen::VectorXd &x) const;
  /// Largest violation over all constraints (0 when feasible).
  double max_violation(const Eigen::VectorXd &x) const;
  void add_equality(const Eigen::RowVectorXd &row, double rhs);
  void add_inequality(const Eigen::RowVectorXd &row, double rhs);
  void validate() const;
};

struct QpOptions {
  double feasibility_tol = 1e-10;
  int max_iterations = 500;
};

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers; // >= 0; nonzero only on the active set
  std::vector<int> active_inequalities;
  int iterations = 0;
};

/// Dual active-set method (Goldfarb-Idnani). Starts from the unconstrained
/// minimizer and adds the most violated constraint each outer iteration, so
/// no feasible starting point is needed. Variables and constraint rows are
/// rescaled internally; the result is reported in the caller's units.
///
/// Throws NumericalError when H is not positive definite, the constraints
/// are inconsistent, or the iteration cap is reached.
QpSolution solve_qp(const QuadraticProgram &qp, const QpOptions &opts = {});

} // namespace hvac
