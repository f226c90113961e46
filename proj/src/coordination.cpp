#include "evcoord/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "evcoord/errors.hpp"

namespace evcoord {

const char* to_string(TerminationCause cause) {
  switch (cause) {
    case TerminationCause::Converged: return "Converged";
    case TerminationCause::CycleDetected: return "CycleDetected";
    case TerminationCause::RoundCap: return "RoundCap";
  }
  return "?";
}

namespace {

constexpr double kImprovementThreshold = 1e-10;  // own-objective drop to accept a move
constexpr double kProfileQuantumKw = 1e-9;       // profile equality resolution

std::int64_t quantize(double p_kw) {
  return std::llround(p_kw / kProfileQuantumKw);
}

std::vector<std::int64_t> quantize_profile(std::span<const double> profile) {
  std::vector<std::int64_t> q(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) q[i] = quantize(profile[i]);
  return q;
}

// Affine coefficients of one vehicle's decision: with every other column
// fixed, the predicted voltage at pilot row p is alpha[p] + slope[p] * p_kw.
struct AffineView {
  std::vector<double> alpha;
  std::vector<double> slope;
  const std::vector<int>* rows;  // pilot rows in scope
};

double affine_cost(const AffineView& view, double p_kw, const VoltageBand& band,
                   PenaltyKind kind) {
  double total = 0.0;
  for (std::size_t k = 0; k < view.alpha.size(); ++k)
    total += penalty(view.alpha[k] + view.slope[k] * p_kw, band, kind);
  return total;
}

// Largest-p minimizer of the piecewise-quadratic band cost over [lo, hi].
// Hinge points are the powers where a pilot row crosses a band edge; between
// consecutive hinge points the cost is one quadratic whose vertex is the
// only interior candidate.
double minimize_quadratic(const AffineView& view, double lo, double hi,
                          const VoltageBand& band) {
  std::vector<double> candidates{lo, hi};
  for (std::size_t k = 0; k < view.alpha.size(); ++k) {
    const double s = view.slope[k];
    if (s == 0.0) continue;
    for (const double edge : {band.v_lo, band.v_hi}) {
      const double at = (edge - view.alpha[k]) / s;
      if (at > lo && at < hi) candidates.push_back(at);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<double> evaluation_points = candidates;
  for (std::size_t seg = 0; seg + 1 < candidates.size(); ++seg) {
    const double a = candidates[seg];
    const double b = candidates[seg + 1];
    const double mid = 0.5 * (a + b);
    // Active rows at the midpoint stay active across the whole segment.
    double quad = 0.0, lin = 0.0;
    for (std::size_t k = 0; k < view.alpha.size(); ++k) {
      const double v = view.alpha[k] + view.slope[k] * mid;
      if (v < band.v_lo) {
        quad += view.slope[k] * view.slope[k];
        lin += 2.0 * view.slope[k] * (view.alpha[k] - band.v_lo);
      } else if (v > band.v_hi) {
        quad += view.slope[k] * view.slope[k];
        lin += 2.0 * view.slope[k] * (view.alpha[k] - band.v_hi);
      }
    }
    if (quad > 0.0) {
      const double vertex = -lin / (2.0 * quad);
      if (vertex > a && vertex < b) evaluation_points.push_back(vertex);
    }
  }

  // Exact cost at every candidate; scan from the highest power down so that
  // ties resolve toward charging more.
  std::sort(evaluation_points.begin(), evaluation_points.end(), std::greater<>());
  double best_p = evaluation_points.front();
  double best_cost = affine_cost(view, best_p, band, PenaltyKind::Quadratic);
  for (std::size_t i = 1; i < evaluation_points.size(); ++i) {
    const double cost = affine_cost(view, evaluation_points[i], band, PenaltyKind::Quadratic);
    if (cost < best_cost) {
      best_cost = cost;
      best_p = evaluation_points[i];
    }
  }
  return best_p;
}

double minimize_crenel(const AffineView& view, double lo, double hi, const VoltageBand& band,
                       int br_grid) {
  const int points = std::max(br_grid, 2);
  double best_p = hi;
  double best_cost = affine_cost(view, hi, band, PenaltyKind::Crenel);
  for (int k = points - 2; k >= 0; --k) {
    const double t = static_cast<double>(k) / (points - 1);
    const double p = lo + (hi - lo) * t;
    const double cost = affine_cost(view, p, band, PenaltyKind::Crenel);
    if (cost < best_cost) {
      best_cost = cost;
      best_p = p;
    }
  }
  return best_p;
}

struct Engine {
  const std::vector<SlotVehicleState>& vehicles;
  const ObjectiveContext& ctx;
  std::vector<double> profile;
  std::vector<double> u;  // v_measured - v_ref + predicted deviation, per pilot row

  Engine(const std::vector<SlotVehicleState>& v, const ObjectiveContext& c)
      : vehicles(v), ctx(c) {
    profile.reserve(v.size());
    for (const SlotVehicleState& veh : v) profile.push_back(veh.bounds.p_hi_kw);
    rebuild_u();
  }

  void rebuild_u() {
    u.assign(ctx.v_measured.size(), 0.0);
    for (std::size_t p = 0; p < u.size(); ++p) {
      double dv = 0.0;
      for (std::size_t c = 0; c < profile.size(); ++c)
        dv += ctx.dv_dp_kw(static_cast<int>(p), static_cast<int>(c)) *
              (profile[c] - vehicles[c].p_operating_kw);
      u[p] = ctx.v_measured[p] - ctx.v_ref + dv;
    }
  }

  void shift_column(int column, double delta) {
    for (std::size_t p = 0; p < u.size(); ++p)
      u[p] += ctx.dv_dp_kw(static_cast<int>(p), column) * delta;
  }

  const std::vector<int>* scope_rows(int column, ObjectiveScope scope) const {
    if (scope == ObjectiveScope::Global) return nullptr;
    return &ctx.local_pilot_rows(vehicles[column].node);
  }

  double cost_over(const std::vector<int>* rows) const {
    double total = 0.0;
    const std::size_t count = rows ? rows->size() : u.size();
    for (std::size_t k = 0; k < count; ++k)
      total += penalty(u[rows ? static_cast<std::size_t>((*rows)[k]) : k], ctx.band, ctx.kind);
    return total;
  }

  // Own objective if this column moved to p_kw, others unchanged.
  double cost_if(int column, double p_kw, const std::vector<int>* rows) const {
    const double delta = p_kw - profile[column];
    double total = 0.0;
    const std::size_t count = rows ? rows->size() : u.size();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t p = rows ? static_cast<std::size_t>((*rows)[k]) : k;
      total += penalty(u[p] + ctx.dv_dp_kw(static_cast<int>(p), column) * delta, ctx.band,
                       ctx.kind);
    }
    return total;
  }

  double potential_now() const { return cost_over(nullptr); }

  std::vector<double> predicted_now() const {
    std::vector<double> v(u.size());
    for (std::size_t p = 0; p < u.size(); ++p) v[p] = u[p] + ctx.v_ref;
    return v;
  }
};

TraceEntry make_entry(int iteration, int updater, const Engine& engine) {
  TraceEntry entry;
  entry.iteration = iteration;
  entry.updater = updater;
  entry.p_kw = engine.profile;
  entry.potential = engine.potential_now();
  entry.v_predicted = engine.predicted_now();
  return entry;
}

// Lowest-potential profile recorded since the first occurrence of the
// repeated state; earliest wins ties.
void adopt_best_of_cycle(BrdResult& result, std::size_t first_index) {
  std::size_t best = first_index;
  for (std::size_t i = first_index + 1; i < result.trace.size(); ++i)
    if (result.trace[i].potential < result.trace[best].potential) best = i;
  result.profile_kw = result.trace[best].p_kw;
  result.cause = TerminationCause::CycleDetected;
}

}  // namespace

double best_response(const std::vector<SlotVehicleState>& vehicles, int column,
                     std::span<const double> profile_kw, const ObjectiveContext& ctx,
                     ObjectiveScope scope, int br_grid) {
  if (column < 0 || column >= static_cast<int>(vehicles.size()))
    throw ContractError("best_response: column out of range");
  if (profile_kw.size() != vehicles.size())
    throw ContractError("best_response: profile size does not match the vehicle list");

  const SlotVehicleState& veh = vehicles[column];
  const double lo = veh.bounds.p_lo_kw;
  const double hi = veh.bounds.p_hi_kw;
  if (lo > hi) throw ContractError("best_response: inverted bounds");
  if (hi - lo < kProfileQuantumKw) return hi;

  const std::vector<int>* rows =
      scope == ObjectiveScope::Global ? nullptr : &ctx.local_pilot_rows(veh.node);

  AffineView view;
  const std::size_t count = rows ? rows->size() : ctx.v_measured.size();
  view.alpha.resize(count);
  view.slope.resize(count);
  view.rows = rows;
  for (std::size_t k = 0; k < count; ++k) {
    const int p = rows ? (*rows)[k] : static_cast<int>(k);
    double dv_others = 0.0;
    for (std::size_t c = 0; c < profile_kw.size(); ++c) {
      if (static_cast<int>(c) == column) continue;
      dv_others += ctx.dv_dp_kw(p, static_cast<int>(c)) *
                   (profile_kw[c] - vehicles[c].p_operating_kw);
    }
    view.slope[k] = ctx.dv_dp_kw(p, column);
    view.alpha[k] = ctx.v_measured[p] - ctx.v_ref + dv_others -
                    view.slope[k] * veh.p_operating_kw;
  }

  if (ctx.kind == PenaltyKind::Quadratic) return minimize_quadratic(view, lo, hi, ctx.band);
  return minimize_crenel(view, lo, hi, ctx.band, br_grid);
}

BrdResult run_slot_brd(const std::vector<SlotVehicleState>& vehicles,
                       const ObjectiveContext& ctx, const PolicyConfig& policy) {
  if (ctx.control_nodes.size() != vehicles.size())
    throw ContractError("run_slot_brd: context columns do not match the vehicle list");
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    if (ctx.control_nodes[i] != vehicles[i].node)
      throw ContractError("run_slot_brd: control node order does not match the vehicle list");

  Engine engine(vehicles, ctx);
  BrdResult result;
  result.trace.push_back(make_entry(0, kUpdaterInit, engine));

  if (vehicles.empty()) {
    result.cause = TerminationCause::Converged;
    return result;
  }

  const int n = static_cast<int>(vehicles.size());
  Rng order_rng(policy.order_seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  // State keys -> trace index of first occurrence. Asynchronous keys carry
  // the updating column: mid-round the dynamical state is profile plus
  // position, and only a repeat of both guarantees a loop.
  std::map<std::pair<std::vector<std::int64_t>, int>, std::size_t> seen;
  const bool async = policy.schedule == UpdateSchedule::Asynchronous;
  seen.emplace(std::make_pair(quantize_profile(engine.profile), kUpdaterInit),
               std::size_t{0});

  int iteration = 0;
  for (int round = 1; round <= policy.max_rounds; ++round) {
    result.rounds = round;
    if (policy.order == UpdateOrder::SeededPermutation)
      for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[order_rng.below(static_cast<std::uint64_t>(i + 1))]);

    if (async) {
      bool changed = false;
      for (const int i : order) {
        ++result.turns;
        const double p_new =
            best_response(vehicles, i, engine.profile, ctx, policy.scope, policy.br_grid);
        if (std::abs(p_new - engine.profile[i]) < kProfileQuantumKw) continue;
        const std::vector<int>* rows = engine.scope_rows(i, policy.scope);
        const double before = engine.cost_over(rows);
        const double after = engine.cost_if(i, p_new, rows);
        if (before - after <= kImprovementThreshold) continue;

        engine.shift_column(i, p_new - engine.profile[i]);
        engine.profile[i] = p_new;
        ++iteration;
        ++result.applied_updates;
        result.trace.push_back(make_entry(iteration, vehicles[i].vehicle_id, engine));
        changed = true;

        const auto key = std::make_pair(quantize_profile(engine.profile), i);
        const auto [it, inserted] = seen.emplace(key, result.trace.size() - 1);
        if (!inserted) {
          adopt_best_of_cycle(result, it->second);
          return result;
        }
      }
      if (!changed) {
        result.profile_kw = engine.profile;
        result.cause = TerminationCause::Converged;
        return result;
      }
    } else {
      std::vector<double> next(engine.profile.size());
      for (const int i : order) {
        ++result.turns;
        next[i] = best_response(vehicles, i, engine.profile, ctx, policy.scope, policy.br_grid);
      }
      bool changed = false;
      for (int i = 0; i < n; ++i)
        if (std::abs(next[i] - engine.profile[i]) >= kProfileQuantumKw) {
          ++result.applied_updates;
          changed = true;
        }
      if (!changed) {
        result.profile_kw = engine.profile;
        result.cause = TerminationCause::Converged;
        return result;
      }
      engine.profile = next;
      engine.rebuild_u();
      ++iteration;
      result.trace.push_back(make_entry(iteration, kUpdaterAll, engine));

      const auto key = std::make_pair(quantize_profile(engine.profile), kUpdaterInit);
      const auto [it, inserted] = seen.emplace(key, result.trace.size() - 1);
      if (!inserted) {
        adopt_best_of_cycle(result, it->second);
        return result;
      }
    }
  }

  result.profile_kw = engine.profile;
  result.cause = TerminationCause::RoundCap;
  return result;
}

std::optional<std::size_t> detect_cycle(const IterationTrace& trace) {
  if (trace.size() < 2) return std::nullopt;
  const std::vector<std::int64_t> last = quantize_profile(trace.back().p_kw);
  for (std::size_t i = 0; i + 1 < trace.size(); ++i)
    if (quantize_profile(trace[i].p_kw) == last) return i;
  return std::nullopt;
}

}  // namespace evcoord
