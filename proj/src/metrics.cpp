#include "evcoord/metrics.hpp"

#include <algorithm>

#include "evcoord/errors.hpp"
#include "evcoord/table.hpp"

namespace evcoord {

double penalty(double v_pu, const VoltageBand& band, PenaltyKind kind) {
  if (band.v_lo >= band.v_hi) throw ContractError("penalty: band is empty");
  if (v_pu >= band.v_lo && v_pu <= band.v_hi) return 0.0;
  if (kind == PenaltyKind::Crenel) return 1.0;
  const double d = v_pu < band.v_lo ? band.v_lo - v_pu : v_pu - band.v_hi;
  return d * d;
}

NeighborhoodMap two_zone_neighborhoods(const std::vector<int>& all_nodes,
                                       const std::vector<int>& pilot_nodes, int split_at) {
  NeighborhoodMap map;
  for (const int node : all_nodes)
    map.neighborhood_of_node[node] = node < split_at ? 1 : 2;
  map.pilot_nodes_by_neighborhood[1] = {};
  map.pilot_nodes_by_neighborhood[2] = {};
  for (const int pilot : pilot_nodes)
    map.pilot_nodes_by_neighborhood[pilot < split_at ? 1 : 2].push_back(pilot);
  return map;
}

NeighborhoodMap parse_neighborhoods(const std::string& text, const std::string& origin) {
  NeighborhoodMap map;
  enum class Section { None, Nodes, Pilots } section = Section::None;
  for (const NumberedLine& line : significant_lines(text)) {
    if (line.text == "[nodes]") { section = Section::Nodes; continue; }
    if (line.text == "[pilots]") { section = Section::Pilots; continue; }
    if (line.text.front() == '[')
      throw ConfigError(origin + ":" + std::to_string(line.number) + ": unknown section " +
                        line.text);
    const std::vector<std::string> fields = split_csv(line.text);
    if (section == Section::None || fields.size() != 2)
      throw ConfigError(origin + ":" + std::to_string(line.number) +
                        ": rows are two comma-separated integers under [nodes] or [pilots]");
    const int a = parse_int_field(fields[0], origin, line.number);
    const int b = parse_int_field(fields[1], origin, line.number);
    if (section == Section::Nodes) {
      if (!map.neighborhood_of_node.emplace(a, b).second)
        throw ConfigError(origin + ":" + std::to_string(line.number) + ": node " +
                          std::to_string(a) + " assigned twice");
    } else {
      map.pilot_nodes_by_neighborhood[a].push_back(b);
    }
  }
  return map;
}

NeighborhoodMap load_neighborhood_file(const std::string& path) {
  return parse_neighborhoods(read_text_file(path), path);
}

const std::vector<int>& ObjectiveContext::local_pilot_rows(int node) const {
  const auto zone = neighborhood_of_node.find(node);
  if (zone == neighborhood_of_node.end())
    throw ConfigError("no neighborhood assigned to bus " + std::to_string(node));
  const auto rows = pilot_rows_by_neighborhood.find(zone->second);
  if (rows == pilot_rows_by_neighborhood.end())
    throw ConfigError("neighborhood " + std::to_string(zone->second) +
                      " has no pilot nodes");
  return rows->second;
}

ObjectiveContext make_objective_context(const FeederModel& model,
                                        const SensitivityMatrix& sensitivity,
                                        const VoltageBand& band, PenaltyKind kind,
                                        double v_ref,
                                        const NeighborhoodMap& neighborhoods) {
  ObjectiveContext ctx;
  ctx.pilot_nodes = sensitivity.pilot_nodes;
  ctx.control_nodes = sensitivity.control_nodes;
  ctx.dv_dp_kw = sensitivity.dv_dp / model.base_power_kw();
  ctx.band = band;
  ctx.kind = kind;
  ctx.v_ref = v_ref;
  ctx.neighborhood_of_node = neighborhoods.neighborhood_of_node;

  ctx.v_measured.resize(sensitivity.pilot_nodes.size());
  for (std::size_t p = 0; p < sensitivity.pilot_nodes.size(); ++p)
    ctx.v_measured[p] = sensitivity.operating_point.v_mag[model.index_of(sensitivity.pilot_nodes[p])];

  for (auto& [zone, pilots] : neighborhoods.pilot_nodes_by_neighborhood) {
    std::vector<int> rows;
    for (const int pilot : pilots) {
      const auto it = std::find(ctx.pilot_nodes.begin(), ctx.pilot_nodes.end(), pilot);
      if (it == ctx.pilot_nodes.end())
        throw ConfigError("neighborhood " + std::to_string(zone) + " pilot " +
                          std::to_string(pilot) + " is not a pilot node of this context");
      rows.push_back(static_cast<int>(it - ctx.pilot_nodes.begin()));
    }
    ctx.pilot_rows_by_neighborhood[zone] = std::move(rows);
  }
  return ctx;
}

std::vector<double> predicted_voltages(std::span<const double> delta_p_kw,
                                       const ObjectiveContext& ctx) {
  if (delta_p_kw.size() != ctx.control_nodes.size())
    throw ContractError("predicted_voltages: one delta per control node required");
  std::vector<double> v(ctx.v_measured.size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    double dv = 0.0;
    for (std::size_t c = 0; c < delta_p_kw.size(); ++c)
      dv += ctx.dv_dp_kw(static_cast<int>(p), static_cast<int>(c)) * delta_p_kw[c];
    v[p] = ctx.v_measured[p] + dv;
  }
  return v;
}

namespace {

double objective_over_rows(std::span<const double> delta_p_kw, const ObjectiveContext& ctx,
                           const std::vector<int>* rows) {
  if (delta_p_kw.size() != ctx.control_nodes.size())
    throw ContractError("objective: one delta per control node required");
  const std::size_t count = rows ? rows->size() : ctx.v_measured.size();
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const int p = rows ? (*rows)[k] : static_cast<int>(k);
    double dv = 0.0;
    for (std::size_t c = 0; c < delta_p_kw.size(); ++c)
      dv += ctx.dv_dp_kw(p, static_cast<int>(c)) * delta_p_kw[c];
    total += penalty(ctx.v_measured[p] - ctx.v_ref + dv, ctx.band, ctx.kind);
  }
  return total;
}

}  // namespace

double global_objective(std::span<const double> delta_p_kw, const ObjectiveContext& ctx) {
  return objective_over_rows(delta_p_kw, ctx, nullptr);
}

double local_objective(int vehicle_node, std::span<const double> delta_p_kw,
                       const ObjectiveContext& ctx) {
  return objective_over_rows(delta_p_kw, ctx, &ctx.local_pilot_rows(vehicle_node));
}

double potential(std::span<const double> delta_p_kw, const ObjectiveContext& ctx) {
  return global_objective(delta_p_kw, ctx);
}

}  // namespace evcoord
