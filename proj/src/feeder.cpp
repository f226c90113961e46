#include "evcoord/feeder.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "evcoord/errors.hpp"
#include "evcoord/table.hpp"

namespace evcoord {

Eigen::MatrixXcd assemble_admittance(const std::vector<Bus>& buses,
                                     const std::vector<Line>& lines,
                                     double impedance_base_ohm) {
  if (impedance_base_ohm <= 0.0) throw ModelError("impedance base must be positive");
  std::map<int, int> index;
  for (std::size_t i = 0; i < buses.size(); ++i) index[buses[i].id] = static_cast<int>(i);

  const int n = static_cast<int>(buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const Line& line : lines) {
    const auto it_from = index.find(line.from_bus);
    const auto it_to = index.find(line.to_bus);
    if (it_from == index.end() || it_to == index.end())
      throw ModelError("line references unknown bus " +
                       std::to_string(it_from == index.end() ? line.from_bus : line.to_bus));
    if (line.resistance_ohm <= 0.0 || line.reactance_ohm <= 0.0)
      throw ModelError("line " + std::to_string(line.from_bus) + "-" +
                       std::to_string(line.to_bus) + ": impedance must be positive");
    const std::complex<double> z(line.resistance_ohm / impedance_base_ohm,
                                 line.reactance_ohm / impedance_base_ohm);
    const std::complex<double> adm = 1.0 / z;
    const int a = it_from->second;
    const int b = it_to->second;
    if (a == b) throw ModelError("line connects bus " + std::to_string(line.from_bus) + " to itself");
    y(a, a) += adm;
    y(b, b) += adm;
    y(a, b) -= adm;
    y(b, a) -= adm;
  }
  return y;
}

FeederModel::FeederModel(std::vector<Bus> buses, std::vector<Line> lines,
                         double base_voltage_v, double base_power_va)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      base_voltage_v_(base_voltage_v),
      base_power_va_(base_power_va) {
  if (base_voltage_v_ <= 0.0 || base_power_va_ <= 0.0)
    throw ModelError("per-unit bases must be positive");
  if (buses_.empty()) throw ModelError("feeder has no buses");

  std::set<int> seen_ids;
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& bus = buses_[i];
    if (!seen_ids.insert(bus.id).second)
      throw ModelError("duplicate bus id " + std::to_string(bus.id));
    if (bus.is_slack) {
      if (slack_index_ >= 0) throw ModelError("more than one slack bus");
      slack_index_ = static_cast<int>(i);
    }
    if (bus.base_load_p_kw < 0.0 || bus.base_load_q_kvar < 0.0)
      throw ModelError("bus " + std::to_string(bus.id) + ": negative base load");
  }
  if (slack_index_ < 0) throw ModelError("no slack bus");

  if (lines_.size() != buses_.size() - 1)
    throw ModelError("radial feeder needs exactly n-1 lines, got " +
                     std::to_string(lines_.size()) + " for " +
                     std::to_string(buses_.size()) + " buses");
  std::set<std::pair<int, int>> pairs;
  for (const Line& line : lines_) {
    const auto key = std::minmax(line.from_bus, line.to_bus);
    if (!pairs.insert(key).second)
      throw ModelError("duplicate line " + std::to_string(line.from_bus) + "-" +
                       std::to_string(line.to_bus));
  }

  admittance_ = assemble_admittance(buses_, lines_, impedance_base_ohm());

  // BFS from the slack; a tree with n-1 edges is connected iff all reached.
  const int n = this->n();
  std::vector<std::vector<int>> adjacency(n);
  for (const Line& line : lines_) {
    const int a = index_of(line.from_bus);
    const int b = index_of(line.to_bus);
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  parent_.assign(n, -1);
  depth_.assign(n, -1);
  std::queue<int> frontier;
  frontier.push(slack_index_);
  depth_[slack_index_] = 0;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (const int v : adjacency[u]) {
      if (depth_[v] >= 0) continue;
      depth_[v] = depth_[u] + 1;
      parent_[v] = u;
      frontier.push(v);
      ++reached;
    }
  }
  if (reached != n) throw ModelError("feeder graph is not connected");
}

int FeederModel::index_of(int bus_id) const {
  for (std::size_t i = 0; i < buses_.size(); ++i)
    if (buses_[i].id == bus_id) return static_cast<int>(i);
  throw ModelError("unknown bus id " + std::to_string(bus_id));
}

bool FeederModel::has_bus(int bus_id) const {
  for (const Bus& bus : buses_)
    if (bus.id == bus_id) return true;
  return false;
}

std::vector<int> FeederModel::load_bus_ids() const {
  std::vector<int> ids;
  for (const Bus& bus : buses_)
    if (!bus.is_slack) ids.push_back(bus.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double FeederModel::mean_r_over_x() const {
  double sum = 0.0;
  for (const Line& line : lines_) sum += line.resistance_ohm / line.reactance_ohm;
  return sum / static_cast<double>(lines_.size());
}

namespace {

enum class Section { None, Base, Buses, Lines };

}  // namespace

FeederModel parse_feeder(const std::string& text, const std::string& origin) {
  double base_v = 0.0, base_s = 0.0;
  bool have_base = false;
  std::vector<Bus> buses;
  std::vector<Line> lines;

  Section section = Section::None;
  for (const NumberedLine& line : significant_lines(text)) {
    const std::string& body = line.text;
    if (body == "[base]") { section = Section::Base; continue; }
    if (body == "[buses]") { section = Section::Buses; continue; }
    if (body == "[lines]") { section = Section::Lines; continue; }
    if (body.front() == '[')
      throw ConfigError(origin + ":" + std::to_string(line.number) +
                        ": unknown section " + body);

    const std::vector<std::string> fields = split_csv(body);
    switch (section) {
      case Section::None:
        throw ConfigError(origin + ":" + std::to_string(line.number) +
                          ": data before any section header");
      case Section::Base: {
        if (fields.size() != 2 || have_base)
          throw ConfigError(origin + ":" + std::to_string(line.number) +
                            ": [base] takes one line: v_volts,s_va");
        base_v = parse_double_field(fields[0], origin, line.number);
        base_s = parse_double_field(fields[1], origin, line.number);
        have_base = true;
        break;
      }
      case Section::Buses: {
        if (fields.size() != 4)
          throw ConfigError(origin + ":" + std::to_string(line.number) +
                            ": [buses] rows are id,base_load_p_kw,base_load_q_kvar,is_slack");
        Bus bus;
        bus.id = parse_int_field(fields[0], origin, line.number);
        bus.base_load_p_kw = parse_double_field(fields[1], origin, line.number);
        bus.base_load_q_kvar = parse_double_field(fields[2], origin, line.number);
        const int slack = parse_int_field(fields[3], origin, line.number);
        if (slack != 0 && slack != 1)
          throw ConfigError(origin + ":" + std::to_string(line.number) +
                            ": is_slack must be 0 or 1");
        bus.is_slack = slack == 1;
        buses.push_back(bus);
        break;
      }
      case Section::Lines: {
        if (fields.size() != 4)
          throw ConfigError(origin + ":" + std::to_string(line.number) +
                            ": [lines] rows are from,to,r_ohm,x_ohm");
        Line edge;
        edge.from_bus = parse_int_field(fields[0], origin, line.number);
        edge.to_bus = parse_int_field(fields[1], origin, line.number);
        edge.resistance_ohm = parse_double_field(fields[2], origin, line.number);
        edge.reactance_ohm = parse_double_field(fields[3], origin, line.number);
        lines.push_back(edge);
        break;
      }
    }
  }
  if (!have_base) throw ConfigError(origin + ": missing [base] section");
  try {
    return FeederModel(std::move(buses), std::move(lines), base_v, base_s);
  } catch (const ModelError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

FeederModel load_feeder_file(const std::string& path) {
  return parse_feeder(read_text_file(path), path);
}

std::string serialize_feeder(const FeederModel& model) {
  std::ostringstream out;
  out << "[base]\n"
      << fmt_double(model.base_voltage_v()) << "," << fmt_double(model.base_power_va()) << "\n";
  out << "[buses]\n";
  for (const Bus& bus : model.buses())
    out << bus.id << "," << fmt_double(bus.base_load_p_kw) << ","
        << fmt_double(bus.base_load_q_kvar) << "," << (bus.is_slack ? 1 : 0) << "\n";
  out << "[lines]\n";
  for (const Line& line : model.lines())
    out << line.from_bus << "," << line.to_bus << "," << fmt_double(line.resistance_ohm)
        << "," << fmt_double(line.reactance_ohm) << "\n";
  return out.str();
}

void write_feeder_file(const FeederModel& model, const std::string& path) {
  write_text_file(path, serialize_feeder(model));
}

}  // namespace evcoord
