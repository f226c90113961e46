#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evcoord/feeder.hpp"
#include "evcoord/loadflow.hpp"

namespace evcoord {

// Linearized voltage response around an operating point: entry (p, c) is the
// change of v_mag at pilot node p, in pu, per pu of additional charging load
// at control node c. Loads are modeled as negative injections, so on a
// passive feeder every entry is negative: more charging lowers voltage.
struct SensitivityMatrix {
  std::vector<int> pilot_nodes;    // bus ids, row order
  std::vector<int> control_nodes;  // bus ids, column order
  Eigen::MatrixXd dv_dp;           // pu voltage per pu charging power
  LoadFlowSolution operating_point;
};

// Slices the voltage-magnitude versus active-power block of the inverse
// power-flow Jacobian. Pilot and control nodes must be non-slack buses.
SensitivityMatrix extract_sensitivity(const FeederModel& model,
                                      const Eigen::MatrixXd& jacobian,
                                      const LoadFlowSolution& operating_point,
                                      const std::vector<int>& pilot_nodes,
                                      const std::vector<int>& control_nodes);

}  // namespace evcoord
