#include "hvac/sysid.hpp"

#include "hvac/errors.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace hvac {

using std::chrono::minutes;

std::vector<SatCommand> ExperimentSchedule::commands() const {
  std::vector<SatCommand> out;
  for (const auto &b : blocks)
    for (std::size_t s = 0; s < b.samples; ++s)
      out.push_back(SatCommand{b.start + minutes{kSampleMinutes * static_cast<int>(s)}, b.mode, b.sat});
  return out;
}

std::vector<ModeWindow> ExperimentSchedule::windows() const {
  std::vector<ModeWindow> out;
  if (blocks.empty())
    return out;
  const std::size_t origin = blocks.front().first_sample;
  for (const auto &b : blocks)
    out.push_back(ModeWindow{b.mode, b.first_sample - origin, b.first_sample - origin + b.samples});
  return out;
}

std::size_t ExperimentSchedule::total_samples() const {
  std::size_t n = 0;
  for (const auto &b : blocks)
    n += b.samples;
  return n;
}

ExperimentSchedule experiment_schedule(std::span<const double> sats, minutes dwell, minutes start) {
  if (sats.empty())
    throw ValidationError("experiment schedule needs at least one mode");
  const auto modes = make_modes(sats, 1);
  if (dwell.count() <= 0)
    throw ValidationError("experiment dwell must be positive");
  if (dwell.count() % kSampleMinutes != 0 || start.count() % kSampleMinutes != 0)
    throw ValidationError("experiment dwell and start must be multiples of 15 minutes");
  if (start.count() < 0)
    throw ValidationError("experiment start must not precede midnight");

  ExperimentSchedule sched;
  minutes t = start;
  for (const auto &m : modes) {
    ScheduleBlock b;
    b.mode = m.index;
    b.sat = m.sat;
    b.start = t;
    b.end = t + dwell;
    b.first_sample = static_cast<std::size_t>(t.count() / kSampleMinutes);
    b.samples = static_cast<std::size_t>(dwell.count() / kSampleMinutes);
    sched.blocks.push_back(b);
    t += dwell;
  }
  return sched;
}

// ---------------------------------------------------------------------------

void Prior::validate(std::size_t modes) const {
  const auto check = [modes](const std::vector<double> &mean, const std::vector<double> &var,
                             const char *name) {
    if (mean.size() != modes || var.size() != modes) {
      std::ostringstream oss;
      oss << "prior for " << name << " needs one entry per mode (" << modes << ")";
      throw ValidationError(oss.str());
    }
    for (std::size_t m = 0; m < modes; ++m) {
      if (!std::isfinite(mean[m]) || !std::isfinite(var[m]) || !(var[m] > 0.0)) {
        std::ostringstream oss;
        oss << "prior for " << name << " must have finite mean and positive variance";
        throw ValidationError(oss.str());
      }
    }
  };
  check(a_mean, a_var, "a");
  check(b_mean, b_var, "b");
  check(c_mean, c_var, "c");
}

Prior Prior::shared(std::size_t modes, double a_mean, double a_var, std::vector<double> b_mean,
                    double b_var, double c_mean, double c_var) {
  Prior p;
  p.a_mean.assign(modes, a_mean);
  p.a_var.assign(modes, a_var);
  p.b_mean = std::move(b_mean);
  p.b_var.assign(modes, b_var);
  p.c_mean.assign(modes, c_mean);
  p.c_var.assign(modes, c_var);
  return p;
}

Prior Prior::defaults(std::span<const double> sats, GainOrder order) {
  const auto modes = make_modes(sats, 1);
  std::vector<double> b(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double ratio = modes[m].sat / modes[0].sat;
    // (Ts/Ts1)^2 growth keeps a margin over the verbatim ordering; 1/ratio
    // decay does the same for the flipped ordering.
    b[m] = order == GainOrder::Verbatim ? -1e-4 * ratio * ratio : -1e-4 / ratio;
  }
  return shared(modes.size(), 0.95, 0.01, std::move(b), 1e-6, 0.01, 1e-4);
}

void IdProblem::validate() const {
  const auto modes = make_modes(sats, 1);
  prior.validate(modes.size());
  if (data.empty())
    throw ValidationError("identification problem has no data windows");
  if (!(constraints.epsilon >= 0.0))
    throw ValidationError("ordering margin must be non-negative");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto &w = data[i].window;
    if (w.mode < 1 || static_cast<std::size_t>(w.mode) > modes.size())
      throw ValidationError("identification window refers to an unknown mode");
    if (!(w.first < w.last))
      throw ValidationError("identification window needs at least two samples");
    if (data[i].samples.size() != w.transitions() + 1)
      throw ValidationError("identification window sample count does not match its bounds");
    for (const auto &s : data[i].samples)
      if (!std::isfinite(s.temp) || !std::isfinite(s.flow) || !std::isfinite(s.reheat))
        throw ValidationError("identification samples must be finite");
    for (std::size_t j = 0; j < i; ++j) {
      const auto &o = data[j].window;
      if (w.first < o.last && o.first < w.last)
        throw ValidationError("identification windows overlap");
    }
  }
}

IdProblem make_id_problem(std::vector<double> sats, Prior prior, std::span<const ZoneState> series,
                          std::span<const ModeWindow> windows, CoeffConstraints constraints) {
  IdProblem prob;
  prob.sats = std::move(sats);
  prob.prior = std::move(prior);
  prob.constraints = constraints;
  for (const auto &w : windows) {
    if (w.last >= series.size()) {
      std::ostringstream oss;
      oss << "series has " << series.size() << " samples but window for mode " << w.mode
          << " ends at sample " << w.last;
      throw ValidationError(oss.str());
    }
    ModeData d;
    d.window = w;
    d.samples.assign(series.begin() + static_cast<std::ptrdiff_t>(w.first),
                     series.begin() + static_cast<std::ptrdiff_t>(w.last) + 1);
    prob.data.push_back(std::move(d));
  }
  prob.validate();
  return prob;
}

IdQp build_qp(const IdProblem &problem) {
  problem.validate();
  const std::size_t p = problem.mode_count();
  const Eigen::Index n = static_cast<Eigen::Index>(3 * p + 1);

  IdQp out;
  out.modes = p;
  out.qp = QuadraticProgram(n);
  auto &qp = out.qp;

  // Data term: sum of squared one-step residuals.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(n);
  double yy = 0.0;
  std::vector<Eigen::RowVectorXd> reduced_rows;
  for (const auto &d : problem.data) {
    const auto m = static_cast<std::size_t>(d.window.mode - 1);
    for (std::size_t k = 0; k + 1 < d.samples.size(); ++k) {
      const auto &s = d.samples[k];
      Eigen::RowVectorXd phi = Eigen::RowVectorXd::Zero(n);
      phi(out.a_index(m)) = s.temp;
      phi(out.b_index(m)) = s.flow;
      phi(out.c_index(m)) = s.reheat;
      phi(out.q_index()) = 1.0;
      const double y = d.samples[k + 1].temp;
      gram += phi.transpose() * phi;
      cross += phi.transpose() * y;
      yy += y * y;

      Eigen::RowVectorXd red = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(p + 3));
      red(0) = s.temp;
      red(static_cast<Eigen::Index>(1 + m)) = s.flow;
      red(static_cast<Eigen::Index>(p + 1)) = s.reheat;
      red(static_cast<Eigen::Index>(p + 2)) = 1.0;
      reduced_rows.push_back(red);
      ++out.transitions;
    }
  }

  // Prior term: sum over modes of (x - mean)^2 / var.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  const Prior &pr = problem.prior;
  for (std::size_t m = 0; m < p; ++m) {
    w(out.a_index(m)) = 1.0 / pr.a_var[m];
    mu(out.a_index(m)) = pr.a_mean[m];
    w(out.b_index(m)) = 1.0 / pr.b_var[m];
    mu(out.b_index(m)) = pr.b_mean[m];
    w(out.c_index(m)) = 1.0 / pr.c_var[m];
    mu(out.c_index(m)) = pr.c_mean[m];
  }

  qp.hessian = 2.0 * (gram + Eigen::MatrixXd(w.asDiagonal()));
  qp.gradient = -2.0 * (cross + w.cwiseProduct(mu));
  qp.constant = yy + mu.dot(w.cwiseProduct(mu));

  for (std::size_t m = 1; m < p; ++m) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(out.a_index(m)) = 1.0;
    row(out.a_index(0)) = -1.0;
    qp.add_equality(row, 0.0);
  }
  for (std::size_t m = 1; m < p; ++m) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(out.c_index(m)) = 1.0;
    row(out.c_index(0)) = -1.0;
    qp.add_equality(row, 0.0);
  }

  const double eps = problem.constraints.epsilon;
  for (std::size_t r = 0; r + 1 < p; ++r) {
    const double ratio = problem.sats[r + 1] / problem.sats[r];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    if (problem.constraints.order == GainOrder::Verbatim) {
      // b[r+1] - ratio b[r] <= -eps
      row(out.b_index(r + 1)) = 1.0;
      row(out.b_index(r)) = -ratio;
    } else {
      // ratio b[r] - b[r+1] <= -eps
      row(out.b_index(r + 1)) = -1.0;
      row(out.b_index(r)) = ratio;
    }
    qp.add_inequality(row, -eps);
  }
  {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row(out.a_index(0)) = -1.0;
    qp.add_inequality(row, -problem.constraints.a_min);
    row(out.a_index(0)) = 1.0;
    qp.add_inequality(row, problem.constraints.a_max);
  }

  out.free_variables = p + 3;

  // Conditioning of the data alone, columns normalized.
  const auto nr = static_cast<Eigen::Index>(p + 3);
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(reduced_rows.size()), nr);
  for (std::size_t i = 0; i < reduced_rows.size(); ++i)
    phi.row(static_cast<Eigen::Index>(i)) = reduced_rows[i];
  for (Eigen::Index c = 0; c < nr; ++c) {
    const double norm = phi.col(c).norm();
    if (norm > 0.0)
      phi.col(c) /= norm;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi.transpose() * phi);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  out.data_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  out.ill_conditioned = !(out.data_condition < 1e10);
  return out;
}

IdResult identify_zone(const IdProblem &problem, const QpOptions &opts) {
  const IdQp id = build_qp(problem);
  const QpSolution sol = solve_qp(id.qp, opts);
  const std::size_t p = id.modes;

  IdResult res;
  res.coeffs.a.resize(p);
  res.coeffs.b.resize(p);
  res.coeffs.c.resize(p);
  for (std::size_t m = 0; m < p; ++m) {
    res.coeffs.a[m] = sol.x(id.a_index(m));
    res.coeffs.b[m] = sol.x(id.b_index(m));
    res.coeffs.c[m] = sol.x(id.c_index(m));
  }
  res.q = sol.x(id.q_index());
  res.objective = sol.objective;
  res.transitions = id.transitions;
  res.ill_conditioned = id.ill_conditioned;

  double ss = 0.0;
  for (const auto &d : problem.data) {
    const auto m = static_cast<std::size_t>(d.window.mode - 1);
    for (std::size_t k = 0; k + 1 < d.samples.size(); ++k) {
      const auto &s = d.samples[k];
      const double r = d.samples[k + 1].temp - res.coeffs.a[m] * s.temp - res.coeffs.b[m] * s.flow -
                       res.coeffs.c[m] * s.reheat - res.q;
      ss += r * r;
    }
  }
  res.residual_ss = ss;

  const auto modes = make_modes(problem.sats, 1);
  try {
    check_coeffs(res.coeffs, modes, problem.constraints, 1e-8);
  } catch (const ValidationError &e) {
    throw NumericalError(std::string("identified coefficients break their constraints: ") +
                         e.what());
  }
  return res;
}

std::vector<IdResult> identify_zones(std::span<const IdProblem> problems, const QpOptions &opts) {
  std::vector<std::future<IdResult>> jobs;
  jobs.reserve(problems.size());
  for (const auto &prob : problems)
    jobs.push_back(std::async(std::launch::async, [&prob, &opts] { return identify_zone(prob, opts); }));
  std::vector<IdResult> out;
  out.reserve(problems.size());
  for (auto &j : jobs)
    out.push_back(j.get());
  return out;
}

} // namespace hvac
