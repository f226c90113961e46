#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evcoord/feeder.hpp"

namespace evcoord {

struct LoadFlowSolution {
  Eigen::VectorXd v_mag;  // pu, indexed like FeederModel buses
  Eigen::VectorXd v_ang;  // rad
  int iterations = 0;
  double max_residual = 0.0;  // pu power mismatch at exit
};

struct LoadFlowOptions {
  double tolerance = 1e-8;  // max |P,Q mismatch| in pu
  int max_iterations = 50;
};

// Net injected power (generation minus load) computed from a voltage state,
// in pu. Exposed so callers can check residuals of a candidate solution.
void compute_injections(const FeederModel& model, const Eigen::VectorXd& v_mag,
                        const Eigen::VectorXd& v_ang, Eigen::VectorXd& p_pu,
                        Eigen::VectorXd& q_pu);

// Newton-Raphson with the analytic Jacobian and a dense LU per step.
// Injections are per bus in kW / kvar, positive for generation (loads enter
// negative); the slack entry is ignored. Starts flat unless warm_start is
// given. Throws NumericalError when the iteration cap is hit or the state
// turns non-finite.
LoadFlowSolution solve_load_flow(const FeederModel& model,
                                 const std::vector<double>& injections_p_kw,
                                 const std::vector<double>& injections_q_kvar,
                                 const LoadFlowOptions& options = {},
                                 const LoadFlowSolution* warm_start = nullptr);

// Power-flow Jacobian at a solved operating point, ordered
// rows [dP; dQ] x cols [d_angle; d_vmag] over non-slack buses
// (ascending bus index within each block).
Eigen::MatrixXd compute_jacobian(const FeederModel& model, const LoadFlowSolution& at);

// Non-slack bus indices in Jacobian block order.
std::vector<int> jacobian_bus_indices(const FeederModel& model);

}  // namespace evcoord
