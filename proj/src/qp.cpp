#include "hvac/qp.hpp"

#include "hvac/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hvac {

QuadraticProgram::QuadraticProgram(Eigen::Index n)
    : hessian(Eigen::MatrixXd::Zero(n, n)), gradient(Eigen::VectorXd::Zero(n)),
      eq_matrix(0, n), eq_rhs(0), ineq_matrix(0, n), ineq_rhs(0) {}

double QuadraticProgram::objective(const Eigen::VectorXd &x) const {
  return 0.5 * x.dot(hessian * x) + gradient.dot(x) + constant;
}

double QuadraticProgram::max_violation(const Eigen::VectorXd &x) const {
  double worst = 0.0;
  if (eq_matrix.rows() > 0)
    worst = std::max(worst, (eq_matrix * x - eq_rhs).cwiseAbs().maxCoeff());
  if (ineq_matrix.rows() > 0)
    worst = std::max(worst, (ineq_matrix * x - ineq_rhs).maxCoeff());
  return worst;
}

void QuadraticProgram::add_equality(const Eigen::RowVectorXd &row, double rhs) {
  const Eigen::Index m = eq_matrix.rows();
  eq_matrix.conservativeResize(m + 1, size());
  eq_matrix.row(m) = row;
  eq_rhs.conservativeResize(m + 1);
  eq_rhs(m) = rhs;
}

void QuadraticProgram::add_inequality(const Eigen::RowVectorXd &row, double rhs) {
  const Eigen::Index m = ineq_matrix.rows();
  ineq_matrix.conservativeResize(m + 1, size());
  ineq_matrix.row(m) = row;
  ineq_rhs.conservativeResize(m + 1);
  ineq_rhs(m) = rhs;
}

void QuadraticProgram::validate() const {
  const Eigen::Index n = size();
  if (n == 0)
    throw ValidationError("QP has no variables");
  if (hessian.cols() != n || gradient.size() != n)
    throw ValidationError("QP Hessian and gradient dimensions disagree");
  if (eq_matrix.cols() != n || eq_matrix.rows() != eq_rhs.size())
    throw ValidationError("QP equality block dimensions disagree");
  if (ineq_matrix.cols() != n || ineq_matrix.rows() != ineq_rhs.size())
    throw ValidationError("QP inequality block dimensions disagree");
  if (!hessian.allFinite() || !gradient.allFinite() || !eq_matrix.allFinite() ||
      !eq_rhs.allFinite() || !ineq_matrix.allFinite() || !ineq_rhs.allFinite())
    throw ValidationError("QP data must be finite");
}

namespace {

// Constraint i in the working form  normal' y (>= or =) rhs.
struct Row {
  Eigen::VectorXd normal;
  double rhs = 0.0;
  bool equality = false;
  int source = -1; // row index in the caller's equality or inequality block
};

class ActiveSet {
public:
  explicit ActiveSet(const Eigen::MatrixXd &hinv) : hinv_(hinv) {}

  std::size_t size() const { return rows_.size(); }
  const Row &row(std::size_t i) const { return *rows_[i]; }

  void push(const Row *r) {
    rows_.push_back(r);
    refresh();
  }
  void erase(std::size_t i) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
    refresh();
  }

  // Primal step direction z and dual step r for adding constraint `n`.
  void directions(const Eigen::VectorXd &n, Eigen::VectorXd &z, Eigen::VectorXd &r) const {
    const Eigen::VectorXd hn = hinv_ * n;
    if (rows_.empty()) {
      z = hn;
      r.resize(0);
      return;
    }
    r = gram_.solve(normals_.transpose() * hn);
    z = hn - hinv_ * (normals_ * r);
  }

  // Minimizer of the QP restricted to the active constraints held as
  // equalities; also returns their multipliers. Solves the KKT system
  // directly so accuracy does not depend on the explicit inverse.
  void equality_solution(const Eigen::MatrixXd &h, const Eigen::VectorXd &g, Eigen::VectorXd &x,
                         Eigen::VectorXd &u) const {
    const Eigen::Index n = h.rows();
    const auto m = static_cast<Eigen::Index>(rows_.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs(n + m);
    kkt.topLeftCorner(n, n) = h;
    rhs.head(n) = -g;
    if (m > 0) {
      kkt.topRightCorner(n, m) = -normals_;
      kkt.bottomLeftCorner(m, n) = normals_.transpose();
      for (Eigen::Index i = 0; i < m; ++i)
        rhs(n + i) = rows_[static_cast<std::size_t>(i)]->rhs;
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol); // one step of iterative refinement
    x = sol.head(n);
    u = sol.tail(m);
  }

private:
  void refresh() {
    const Eigen::Index n = hinv_.rows();
    normals_.resize(n, static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i)
      normals_.col(static_cast<Eigen::Index>(i)) = rows_[i]->normal;
    if (!rows_.empty())
      gram_.compute(normals_.transpose() * hinv_ * normals_);
  }

  const Eigen::MatrixXd &hinv_;
  std::vector<const Row *> rows_;
  Eigen::MatrixXd normals_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;
};

} // namespace

QpSolution solve_qp(const QuadraticProgram &qp, const QpOptions &opts) {
  qp.validate();
  const Eigen::Index n = qp.size();

  // Jacobi scaling x = D y.
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hii = qp.hessian(i, i);
    if (!(hii > 0.0))
      throw NumericalError("QP Hessian is not positive definite");
    d(i) = 1.0 / std::sqrt(hii);
  }
  const Eigen::MatrixXd h = d.asDiagonal() * qp.hessian * d.asDiagonal();
  const Eigen::VectorXd g = d.cwiseProduct(qp.gradient);

  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (h + h.transpose()));
  if (llt.info() != Eigen::Success)
    throw NumericalError("QP Hessian is not positive definite");
  const Eigen::MatrixXd hinv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  // Constraint rows in scaled variables, normalized to unit length.
  std::vector<Row> eqs;
  std::vector<Row> ineqs;
  for (Eigen::Index i = 0; i < qp.eq_matrix.rows(); ++i) {
    Eigen::VectorXd nrm = qp.eq_matrix.row(i).transpose().cwiseProduct(d);
    const double len = nrm.norm();
    if (len == 0.0) {
      if (std::abs(qp.eq_rhs(i)) > opts.feasibility_tol)
        throw NumericalError("QP equality constraint with zero row is infeasible");
      continue;
    }
    eqs.push_back(Row{nrm / len, qp.eq_rhs(i) / len, true, static_cast<int>(i)});
  }
  for (Eigen::Index i = 0; i < qp.ineq_matrix.rows(); ++i) {
    // G x <= h  becomes  -G x >= -h
    Eigen::VectorXd nrm = -qp.ineq_matrix.row(i).transpose().cwiseProduct(d);
    const double len = nrm.norm();
    if (len == 0.0) {
      if (qp.ineq_rhs(i) < -opts.feasibility_tol)
        throw NumericalError("QP inequality constraint with zero row is infeasible");
      continue;
    }
    ineqs.push_back(Row{nrm / len, -qp.ineq_rhs(i) / len, false, static_cast<int>(i)});
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double tiny = 1e-14;
  ActiveSet active(hinv);
  Eigen::VectorXd y = -hinv * g;
  std::vector<double> u; // multipliers aligned with the active set
  std::vector<bool> in_active(ineqs.size(), false);
  Eigen::VectorXd z, r;
  int iterations = 0;

  for (const auto &row : eqs) {
    active.directions(row.normal, z, r);
    const double residual = row.rhs - row.normal.dot(y);
    const double zn = z.dot(row.normal);
    if (z.norm() <= 1e-12 || std::abs(zn) <= tiny) {
      if (std::abs(residual) > 1e-9)
        throw NumericalError("QP equality constraints are inconsistent");
      continue; // redundant
    }
    const double t = residual / zn;
    y += t * z;
    for (std::size_t k = 0; k < u.size(); ++k)
      u[k] -= t * r(static_cast<Eigen::Index>(k));
    active.push(&row);
    u.push_back(t);
  }

  for (;;) {
    if (++iterations > opts.max_iterations)
      throw NumericalError("QP solver reached its iteration cap");

    int worst = -1;
    double worst_slack = -opts.feasibility_tol;
    for (std::size_t i = 0; i < ineqs.size(); ++i) {
      if (in_active[i])
        continue;
      const double s = ineqs[i].normal.dot(y) - ineqs[i].rhs;
      if (s < worst_slack) {
        worst_slack = s;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0)
      break;
    const Row &add = ineqs[static_cast<std::size_t>(worst)];
    double u_add = 0.0;

    for (;;) {
      if (++iterations > opts.max_iterations)
        throw NumericalError("QP solver reached its iteration cap");
      active.directions(add.normal, z, r);

      double t1 = inf;
      std::size_t drop = 0;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (active.row(k).equality)
          continue;
        const double rk = r(static_cast<Eigen::Index>(k));
        if (rk > tiny) {
          const double ratio = u[k] / rk;
          if (ratio < t1) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      const double zn = z.dot(add.normal);
      const double slack = add.normal.dot(y) - add.rhs;
      const double t2 = (z.norm() > 1e-12 && zn > tiny) ? -slack / zn : inf;
      const double t = std::min(t1, t2);
      if (t == inf)
        throw NumericalError("QP constraints are infeasible");

      if (t2 == inf) {
        // Dual-only step: the new normal is dependent on the active set.
        for (std::size_t k = 0; k < u.size(); ++k)
          u[k] -= t * r(static_cast<Eigen::Index>(k));
        u_add += t;
        in_active[static_cast<std::size_t>(active.row(drop).source)] = false;
        u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
        active.erase(drop);
        continue;
      }

      y += t * z;
      for (std::size_t k = 0; k < u.size(); ++k)
        u[k] -= t * r(static_cast<Eigen::Index>(k));
      u_add += t;
      if (t2 <= t1) {
        active.push(&add);
        u.push_back(u_add);
        in_active[static_cast<std::size_t>(worst)] = true;
        break;
      }
      in_active[static_cast<std::size_t>(active.row(drop).source)] = false;
      u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
      active.erase(drop);
    }
  }

  // Polish: re-solve the equality-constrained problem on the final active
  // set; keep it if it is still primal and dual feasible.
  {
    Eigen::VectorXd yp, up;
    active.equality_solution(h, g, yp, up);
    bool ok = yp.allFinite();
    for (std::size_t k = 0; ok && k < active.size(); ++k)
      if (!active.row(k).equality && up(static_cast<Eigen::Index>(k)) < -1e-9)
        ok = false;
    for (std::size_t i = 0; ok && i < ineqs.size(); ++i)
      if (!in_active[i] && ineqs[i].normal.dot(yp) - ineqs[i].rhs < -opts.feasibility_tol)
        ok = false;
    if (ok) {
      y = yp;
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double uk = up(static_cast<Eigen::Index>(k));
        u[k] = active.row(k).equality ? uk : std::max(0.0, uk);
      }
    }
  }

  QpSolution sol;
  sol.x = d.cwiseProduct(y);
  sol.objective = qp.objective(sol.x);
  sol.iterations = iterations;
  sol.eq_multipliers = Eigen::VectorXd::Zero(qp.eq_matrix.rows());
  sol.ineq_multipliers = Eigen::VectorXd::Zero(qp.ineq_matrix.rows());
  // Multipliers are reported for the caller's unnormalized rows.
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Row &row = active.row(k);
    const Eigen::Index src = row.source;
    if (row.equality) {
      const double len = qp.eq_matrix.row(src).transpose().cwiseProduct(d).norm();
      sol.eq_multipliers(src) = u[k] / len;
    } else {
      const double len = qp.ineq_matrix.row(src).transpose().cwiseProduct(d).norm();
      sol.ineq_multipliers(src) = u[k] / len;
      sol.active_inequalities.push_back(row.source);
    }
  }

  if (qp.max_violation(sol.x) > 1e-8)
    throw NumericalError("QP solution violates its constraints beyond tolerance");
  return sol;
}

} // namespace hvac
