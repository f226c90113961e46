#include "evcoord/sensitivity.hpp"

#include <Eigen/LU>
#include <map>

#include "evcoord/errors.hpp"

namespace evcoord {

SensitivityMatrix extract_sensitivity(const FeederModel& model,
                                      const Eigen::MatrixXd& jacobian,
                                      const LoadFlowSolution& operating_point,
                                      const std::vector<int>& pilot_nodes,
                                      const std::vector<int>& control_nodes) {
  const std::vector<int> idx = jacobian_bus_indices(model);
  const int m = static_cast<int>(idx.size());
  if (jacobian.rows() != 2 * m || jacobian.cols() != 2 * m)
    throw ContractError("extract_sensitivity: Jacobian size does not match the feeder");

  std::map<int, int> offset_of_id;
  for (int r = 0; r < m; ++r) offset_of_id[model.id_of(idx[r])] = r;
  const auto offset = [&](int bus_id, const char* role) {
    const auto it = offset_of_id.find(bus_id);
    if (it == offset_of_id.end())
      throw ContractError(std::string("extract_sensitivity: ") + role + " node " +
                          std::to_string(bus_id) + " is not a non-slack bus");
    return it->second;
  };

  // Full inverse: the lower-left quadrant is dV/dP, the lower-right dV/dQ.
  // Only the active-power block is consumed downstream.
  const Eigen::MatrixXd inverse = jacobian.partialPivLu().inverse();
  if (!inverse.allFinite())
    throw NumericalError("extract_sensitivity: Jacobian is singular at this operating point");
  const Eigen::MatrixXd dv_dp_injection = inverse.block(m, 0, m, m);

  SensitivityMatrix out;
  out.pilot_nodes = pilot_nodes;
  out.control_nodes = control_nodes;
  out.operating_point = operating_point;
  out.dv_dp.resize(static_cast<int>(pilot_nodes.size()),
                   static_cast<int>(control_nodes.size()));
  for (std::size_t p = 0; p < pilot_nodes.size(); ++p) {
    const int row = offset(pilot_nodes[p], "pilot");
    for (std::size_t c = 0; c < control_nodes.size(); ++c) {
      const int col = offset(control_nodes[c], "control");
      // Charging is a load, i.e. a negative injection.
      out.dv_dp(static_cast<int>(p), static_cast<int>(c)) = -dv_dp_injection(row, col);
    }
  }
  return out;
}

}  // namespace evcoord
