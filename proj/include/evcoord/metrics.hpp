#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <vector>

#include "evcoord/sensitivity.hpp"

namespace evcoord {

struct VoltageBand {
  double v_lo = 0.9;
  double v_hi = 1.1;
};

enum class PenaltyKind { Quadratic, Crenel };

// Band-violation cost for one voltage. Quadratic: squared distance to the
// nearer band edge outside [v_lo, v_hi], zero inside. Crenel: 1 outside,
// 0 inside. Band edges themselves count as inside for both kinds.
double penalty(double v_pu, const VoltageBand& band, PenaltyKind kind);

// Assigns every bus to a neighborhood and every neighborhood the pilot nodes
// its vehicles monitor.
struct NeighborhoodMap {
  std::map<int, int> neighborhood_of_node;
  std::map<int, std::vector<int>> pilot_nodes_by_neighborhood;
};

// Two zones split by bus id: ids below split_at form zone 1, the rest zone 2.
NeighborhoodMap two_zone_neighborhoods(const std::vector<int>& all_nodes,
                                       const std::vector<int>& pilot_nodes, int split_at);

// Neighborhood file format: '[nodes]'  node_id,neighborhood_id
//                           '[pilots]' neighborhood_id,pilot_node_id
NeighborhoodMap parse_neighborhoods(const std::string& text, const std::string& origin);
NeighborhoodMap load_neighborhood_file(const std::string& path);

// Everything needed to evaluate predicted voltage-band costs for candidate
// charging deviations around one operating point.
struct ObjectiveContext {
  std::vector<double> v_measured;  // pu at each pilot node, operating point
  double v_ref = 0.0;              // subtracted before the band test
  Eigen::MatrixXd dv_dp_kw;        // pilot x control, pu per kW of extra charging
  std::vector<int> pilot_nodes;    // bus ids, row order
  std::vector<int> control_nodes;  // bus ids, column order
  VoltageBand band;
  PenaltyKind kind = PenaltyKind::Quadratic;
  // Row subsets visible to each neighborhood, resolved against pilot_nodes.
  std::map<int, std::vector<int>> pilot_rows_by_neighborhood;
  std::map<int, int> neighborhood_of_node;

  // Pilot rows a vehicle at this bus evaluates under the local objective.
  const std::vector<int>& local_pilot_rows(int node) const;
};

// Builds the context from a sensitivity extraction: measured pilot voltages
// come from the embedded operating point, pu/pu columns convert to pu per
// kW on the model's power base. Neighborhoods may be empty when only the
// global objective is used.
ObjectiveContext make_objective_context(const FeederModel& model,
                                        const SensitivityMatrix& sensitivity,
                                        const VoltageBand& band, PenaltyKind kind,
                                        double v_ref,
                                        const NeighborhoodMap& neighborhoods = {});

// Predicted pilot voltages for charging deviations delta_p_kw (one entry per
// control column, added consumption positive).
std::vector<double> predicted_voltages(std::span<const double> delta_p_kw,
                                       const ObjectiveContext& ctx);

// Sum of band penalties over all pilot nodes at the predicted voltages.
double global_objective(std::span<const double> delta_p_kw, const ObjectiveContext& ctx);

// Same sum restricted to the pilots of the vehicle's neighborhood.
double local_objective(int vehicle_node, std::span<const double> delta_p_kw,
                       const ObjectiveContext& ctx);

// Alias of the global objective: a common function all vehicles jointly
// descend when they update one at a time against it.
double potential(std::span<const double> delta_p_kw, const ObjectiveContext& ctx);

}  // namespace evcoord
