#include "doctest.h"

#include <chrono>

#include "evcoord/errors.hpp"
#include "evcoord/loadflow.hpp"
#include "evcoord/rng.hpp"
#include "test_util.hpp"

using namespace evcoord;

namespace {

double solution_residual(const FeederModel& model, const LoadFlowSolution& sol,
                         const std::vector<double>& p_kw, const std::vector<double>& q_kvar) {
  Eigen::VectorXd p, q;
  evtest::injections_complex(model.admittance(), sol.v_mag, sol.v_ang, p, q);
  double worst = 0.0;
  for (int i = 0; i < model.n(); ++i) {
    if (i == model.slack_index()) continue;
    worst = std::max(worst, std::abs(p[i] - p_kw[i] / model.base_power_kw()));
    worst = std::max(worst, std::abs(q[i] - q_kvar[i] / model.base_power_kw()));
  }
  return worst;
}

}  // namespace

TEST_SUITE("loadflow") {

TEST_CASE("two-bus case matches the closed-form solution") {
  const FeederModel model = evtest::two_bus_feeder(0.16, 0.16, 10.0, 0.0);
  std::vector<double> p{0.0, -10.0};
  std::vector<double> q{0.0, 0.0};
  const LoadFlowSolution sol = solve_load_flow(model, p, q);

  const auto exact = evtest::two_bus_exact({0.1, 0.1}, {0.1, 0.0});
  CHECK(sol.v_mag[1] == doctest::Approx(exact.v_mag).epsilon(1e-10));
  CHECK(sol.v_ang[1] == doctest::Approx(exact.v_ang).epsilon(1e-10));
  CHECK(sol.v_mag[0] == 1.0);
  CHECK(sol.v_ang[0] == 0.0);

  SUBCASE("reactive load shifts the closed form too") {
    std::vector<double> q2{0.0, -5.0};
    const LoadFlowSolution sol2 = solve_load_flow(model, p, q2);
    const auto exact2 = evtest::two_bus_exact({0.1, 0.1}, {0.1, 0.05});
    CHECK(sol2.v_mag[1] == doctest::Approx(exact2.v_mag).epsilon(1e-10));
    CHECK(sol2.v_ang[1] == doctest::Approx(exact2.v_ang).epsilon(1e-10));
  }
}

TEST_CASE("zero injections converge immediately to the flat profile") {
  Rng rng(101);
  const FeederModel model = evtest::random_radial_feeder(rng, 12);
  std::vector<double> zero(12, 0.0);
  const LoadFlowSolution sol = solve_load_flow(model, zero, zero);
  CHECK(sol.iterations == 1);
  CHECK(sol.max_residual < 1e-12);  // admittance row-sum roundoff only
  CHECK(sol.v_mag.minCoeff() == 1.0);
  CHECK(sol.v_mag.maxCoeff() == 1.0);
  CHECK(sol.v_ang.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random feeders solve below tolerance, checked by an independent evaluator") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(32));
    const FeederModel model = evtest::random_radial_feeder(rng, n);
    const std::vector<double> p = evtest::negated_base_loads_p(model);
    const std::vector<double> q = evtest::negated_base_loads_q(model);
    const LoadFlowSolution sol = solve_load_flow(model, p, q);
    CHECK(sol.iterations <= 50);
    CHECK(solution_residual(model, sol, p, q) <= 1e-8);
  }
}

TEST_CASE("voltage never rises along a root-to-leaf path when every bus consumes") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const FeederModel model = evtest::random_radial_feeder(rng, 20);
    const LoadFlowSolution sol = solve_load_flow(model, evtest::negated_base_loads_p(model),
                                                 evtest::negated_base_loads_q(model));
    for (int i = 0; i < model.n(); ++i) {
      const int parent = model.parent_index()[i];
      if (parent >= 0) CHECK(sol.v_mag[i] <= sol.v_mag[parent] + 1e-12);
    }
  }
}

TEST_CASE("an unservable load raises a numerical error with the last residual") {
  const FeederModel model = evtest::two_bus_feeder();
  std::vector<double> p{0.0, -10000.0};  // 100 pu through a 0.1 pu line
  std::vector<double> q{0.0, 0.0};
  CHECK_THROWS_AS(solve_load_flow(model, p, q), NumericalError);
  try {
    solve_load_flow(model, p, q);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("load flow") != std::string::npos);
  }
}

TEST_CASE("warm starts reproduce the cold-start solution") {
  Rng rng(77);
  const FeederModel model = evtest::random_radial_feeder(rng, 25);
  const std::vector<double> p = evtest::negated_base_loads_p(model);
  const std::vector<double> q = evtest::negated_base_loads_q(model);
  const LoadFlowSolution cold = solve_load_flow(model, p, q);
  const LoadFlowSolution warm = solve_load_flow(model, p, q, {}, &cold);
  CHECK(warm.iterations <= cold.iterations);
  CHECK((warm.v_mag - cold.v_mag).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("jacobian at the two-bus flat state matches hand-derived blocks") {
  const FeederModel model = evtest::two_bus_feeder(0.16, 0.16, 10.0, 0.0);
  LoadFlowSolution flat;
  flat.v_mag = Eigen::VectorXd::Ones(2);
  flat.v_ang = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd jac = compute_jacobian(model, flat);

  // Y22 = 5-5j at the flat state gives dP/da = 5, dP/dV = 5, dQ/da = -5,
  // dQ/dV = 5 on the single non-slack bus.
  REQUIRE(jac.rows() == 2);
  CHECK(jac(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(jac(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(jac(1, 0) == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(jac(1, 1) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("jacobian at flat state equals the admittance block pattern") {
  // With V = 1 and zero angles the blocks collapse to [[-B, G], [-G, -B]]
  // over non-slack buses.
  Rng rng(31);
  const FeederModel model = evtest::random_radial_feeder(rng, 15);
  LoadFlowSolution flat;
  flat.v_mag = Eigen::VectorXd::Ones(model.n());
  flat.v_ang = Eigen::VectorXd::Zero(model.n());
  const Eigen::MatrixXd jac = compute_jacobian(model, flat);
  const std::vector<int> idx = jacobian_bus_indices(model);
  const int m = static_cast<int>(idx.size());
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const double g = model.admittance()(idx[r], idx[c]).real();
      const double b = model.admittance()(idx[r], idx[c]).imag();
      CHECK(jac(r, c) == doctest::Approx(-b).epsilon(1e-12));
      CHECK(jac(r, m + c) == doctest::Approx(g).epsilon(1e-12));
      CHECK(jac(m + r, c) == doctest::Approx(-g).epsilon(1e-12));
      CHECK(jac(m + r, m + c) == doctest::Approx(-b).epsilon(1e-12));
    }
  }
}

TEST_CASE("jacobian scales linearly with the admittance at a fixed state") {
  Rng rng(42);
  const FeederModel model = evtest::random_radial_feeder(rng, 10);
  std::vector<Bus> buses = model.buses();
  std::vector<Line> lines = model.lines();
  for (Line& line : lines) {
    line.resistance_ohm *= 0.5;
    line.reactance_ohm *= 0.5;
  }
  const FeederModel doubled(std::move(buses), std::move(lines), model.base_voltage_v(),
                            model.base_power_va());

  LoadFlowSolution state;
  state.v_mag = Eigen::VectorXd::Constant(model.n(), 0.97);
  state.v_ang = Eigen::VectorXd::Zero(model.n());
  for (int i = 0; i < model.n(); ++i) state.v_ang[i] = -0.01 * i;

  const Eigen::MatrixXd j1 = compute_jacobian(model, state);
  const Eigen::MatrixXd j2 = compute_jacobian(doubled, state);
  CHECK((j2 - 2.0 * j1).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("analytic jacobian agrees with central differences on random networks") {
  Rng rng(4711);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(28));
    const FeederModel model = evtest::random_radial_feeder(rng, n);
    const LoadFlowSolution sol = solve_load_flow(model, evtest::negated_base_loads_p(model),
                                                 evtest::negated_base_loads_q(model));
    const Eigen::MatrixXd analytic = compute_jacobian(model, sol);
    const Eigen::MatrixXd numeric =
        evtest::finite_difference_jacobian(model, sol.v_mag, sol.v_ang);
    const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
    CHECK((analytic - numeric).cwiseAbs().maxCoeff() / scale < 1e-6);
  }
}

}  // TEST_SUITE
