#include "evcoord/loadflow.hpp"

#include <Eigen/LU>
#include <cmath>

#include "evcoord/errors.hpp"

namespace evcoord {

void compute_injections(const FeederModel& model, const Eigen::VectorXd& v_mag,
                        const Eigen::VectorXd& v_ang, Eigen::VectorXd& p_pu,
                        Eigen::VectorXd& q_pu) {
  const int n = model.n();
  const Eigen::MatrixXcd& y = model.admittance();
  p_pu.setZero(n);
  q_pu.setZero(n);
  for (int i = 0; i < n; ++i) {
    double p = 0.0, q = 0.0;
    for (int j = 0; j < n; ++j) {
      const double g = y(i, j).real();
      const double b = y(i, j).imag();
      const double d = v_ang[i] - v_ang[j];
      const double c = std::cos(d);
      const double s = std::sin(d);
      p += v_mag[j] * (g * c + b * s);
      q += v_mag[j] * (g * s - b * c);
    }
    p_pu[i] = v_mag[i] * p;
    q_pu[i] = v_mag[i] * q;
  }
}

std::vector<int> jacobian_bus_indices(const FeederModel& model) {
  std::vector<int> idx;
  idx.reserve(model.n() - 1);
  for (int i = 0; i < model.n(); ++i)
    if (i != model.slack_index()) idx.push_back(i);
  return idx;
}

namespace {

Eigen::MatrixXd jacobian_at_state(const FeederModel& model, const Eigen::VectorXd& v_mag,
                                  const Eigen::VectorXd& v_ang, const Eigen::VectorXd& p_pu,
                                  const Eigen::VectorXd& q_pu) {
  const Eigen::MatrixXcd& y = model.admittance();
  const std::vector<int> idx = jacobian_bus_indices(model);
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd jac(2 * m, 2 * m);
  for (int r = 0; r < m; ++r) {
    const int i = idx[r];
    const double vi = v_mag[i];
    for (int c = 0; c < m; ++c) {
      const int j = idx[c];
      const double gij = y(i, j).real();
      const double bij = y(i, j).imag();
      if (i == j) {
        jac(r, c) = -q_pu[i] - bij * vi * vi;              // dP_i/da_i
        jac(r, m + c) = p_pu[i] / vi + gij * vi;           // dP_i/dV_i
        jac(m + r, c) = p_pu[i] - gij * vi * vi;           // dQ_i/da_i
        jac(m + r, m + c) = q_pu[i] / vi - bij * vi;       // dQ_i/dV_i
      } else {
        const double vj = v_mag[j];
        const double d = v_ang[i] - v_ang[j];
        const double cs = std::cos(d);
        const double sn = std::sin(d);
        jac(r, c) = vi * vj * (gij * sn - bij * cs);       // dP_i/da_j
        jac(r, m + c) = vi * (gij * cs + bij * sn);        // dP_i/dV_j
        jac(m + r, c) = -vi * vj * (gij * cs + bij * sn);  // dQ_i/da_j
        jac(m + r, m + c) = vi * (gij * sn - bij * cs);    // dQ_i/dV_j
      }
    }
  }
  return jac;
}

}  // namespace

LoadFlowSolution solve_load_flow(const FeederModel& model,
                                 const std::vector<double>& injections_p_kw,
                                 const std::vector<double>& injections_q_kvar,
                                 const LoadFlowOptions& options,
                                 const LoadFlowSolution* warm_start) {
  const int n = model.n();
  if (static_cast<int>(injections_p_kw.size()) != n ||
      static_cast<int>(injections_q_kvar.size()) != n)
    throw ContractError("solve_load_flow: injection vectors must have one entry per bus");

  const double base_kw = model.base_power_kw();
  Eigen::VectorXd p_spec(n), q_spec(n);
  for (int i = 0; i < n; ++i) {
    p_spec[i] = injections_p_kw[i] / base_kw;
    q_spec[i] = injections_q_kvar[i] / base_kw;
  }

  LoadFlowSolution sol;
  if (warm_start != nullptr) {
    sol.v_mag = warm_start->v_mag;
    sol.v_ang = warm_start->v_ang;
  } else {
    sol.v_mag = Eigen::VectorXd::Ones(n);
    sol.v_ang = Eigen::VectorXd::Zero(n);
  }
  sol.v_mag[model.slack_index()] = 1.0;
  sol.v_ang[model.slack_index()] = 0.0;

  const std::vector<int> idx = jacobian_bus_indices(model);
  const int m = static_cast<int>(idx.size());
  Eigen::VectorXd p_calc, q_calc, mismatch(2 * m);

  double residual = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    compute_injections(model, sol.v_mag, sol.v_ang, p_calc, q_calc);
    for (int r = 0; r < m; ++r) {
      mismatch[r] = p_spec[idx[r]] - p_calc[idx[r]];
      mismatch[m + r] = q_spec[idx[r]] - q_calc[idx[r]];
    }
    residual = mismatch.cwiseAbs().maxCoeff();
    if (!std::isfinite(residual))
      throw NumericalError("load flow diverged (non-finite mismatch)", residual);
    if (residual <= options.tolerance) {
      sol.iterations = iter;
      sol.max_residual = residual;
      return sol;
    }

    const Eigen::MatrixXd jac = jacobian_at_state(model, sol.v_mag, sol.v_ang, p_calc, q_calc);
    const Eigen::VectorXd step = jac.partialPivLu().solve(mismatch);
    if (!step.allFinite())
      throw NumericalError("load flow Jacobian is singular", residual);
    for (int r = 0; r < m; ++r) {
      sol.v_ang[idx[r]] += step[r];
      sol.v_mag[idx[r]] += step[m + r];
    }
    if (!sol.v_mag.allFinite() || !sol.v_ang.allFinite() || sol.v_mag.minCoeff() <= 0.0)
      throw NumericalError("load flow diverged (voltage state left the solvable region)",
                           residual);
  }
  throw NumericalError("load flow did not converge within " +
                           std::to_string(options.max_iterations) + " iterations",
                       residual);
}

Eigen::MatrixXd compute_jacobian(const FeederModel& model, const LoadFlowSolution& at) {
  Eigen::VectorXd p_calc, q_calc;
  compute_injections(model, at.v_mag, at.v_ang, p_calc, q_calc);
  return jacobian_at_state(model, at.v_mag, at.v_ang, p_calc, q_calc);
}

}  // namespace evcoord
