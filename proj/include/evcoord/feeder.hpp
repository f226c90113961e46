#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace evcoord {

struct Bus {
  int id = 0;
  double base_load_p_kw = 0.0;
  double base_load_q_kvar = 0.0;
  bool is_slack = false;
};

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double resistance_ohm = 0.0;
  double reactance_ohm = 0.0;
};

// Bus admittance matrix in per unit: Y(i,i) = sum of incident line
// admittances, Y(i,j) = -y_ij. No shunt elements, so every row sums to zero.
Eigen::MatrixXcd assemble_admittance(const std::vector<Bus>& buses,
                                     const std::vector<Line>& lines,
                                     double impedance_base_ohm);

// Radial low-voltage feeder with its per-unit bases. Validates on
// construction: exactly one slack, unique ids, positive impedances,
// a connected tree (n-1 lines, no duplicates), non-negative loads.
class FeederModel {
 public:
  FeederModel(std::vector<Bus> buses, std::vector<Line> lines,
              double base_voltage_v, double base_power_va);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  int n() const { return static_cast<int>(buses_.size()); }
  double base_voltage_v() const { return base_voltage_v_; }
  double base_power_va() const { return base_power_va_; }
  double base_power_kw() const { return base_power_va_ / 1000.0; }
  double impedance_base_ohm() const {
    return base_voltage_v_ * base_voltage_v_ / base_power_va_;
  }

  const Eigen::MatrixXcd& admittance() const { return admittance_; }

  int slack_index() const { return slack_index_; }
  int index_of(int bus_id) const;  // ModelError for unknown ids
  int id_of(int index) const { return buses_[index].id; }
  bool has_bus(int bus_id) const;

  // Bus ids of all non-slack buses, ascending.
  std::vector<int> load_bus_ids() const;

  // Tree structure rooted at the slack: parent index per bus index (-1 at
  // the root). Lets callers walk root-to-leaf paths.
  const std::vector<int>& parent_index() const { return parent_; }
  int depth_of_index(int index) const { return depth_[index]; }

  double mean_r_over_x() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double base_voltage_v_;
  double base_power_va_;
  Eigen::MatrixXcd admittance_;
  int slack_index_ = -1;
  std::vector<int> parent_;
  std::vector<int> depth_;
};

// Feeder file format: '[base]'   v_volts,s_va
//                     '[buses]'  id,base_load_p_kw,base_load_q_kvar,is_slack
//                     '[lines]'  from,to,r_ohm,x_ohm
// '#' starts a comment. serialize/parse round-trip bit exactly.
FeederModel parse_feeder(const std::string& text, const std::string& origin);
FeederModel load_feeder_file(const std::string& path);
std::string serialize_feeder(const FeederModel& model);
void write_feeder_file(const FeederModel& model, const std::string& path);

}  // namespace evcoord
