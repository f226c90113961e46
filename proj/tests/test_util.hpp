#pragma once

// Shared oracles for the test suite. These re-derive expected values through
// independent formulations (complex arithmetic, finite differences, closed
// forms) rather than by calling the code paths they check.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "evcoord/feeder.hpp"
#include "evcoord/rng.hpp"

namespace evtest {

// Net complex injections from a voltage state: S = diag(V) * conj(Y * V).
// The solver computes the same quantities through the polar trigonometric
// form, so agreement is meaningful.
inline void injections_complex(const Eigen::MatrixXcd& y, const Eigen::VectorXd& v_mag,
                               const Eigen::VectorXd& v_ang, Eigen::VectorXd& p_pu,
                               Eigen::VectorXd& q_pu) {
  const int n = static_cast<int>(v_mag.size());
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::polar(v_mag[i], v_ang[i]);
  const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
  p_pu = s.real();
  q_pu = s.imag();
}

// Central-difference power-flow Jacobian over non-slack buses, ordered like
// compute_jacobian: rows [dP; dQ], cols [d_angle; d_vmag].
inline Eigen::MatrixXd finite_difference_jacobian(const evcoord::FeederModel& model,
                                                  const Eigen::VectorXd& v_mag,
                                                  const Eigen::VectorXd& v_ang,
                                                  double h = 1e-6) {
  std::vector<int> idx;
  for (int i = 0; i < model.n(); ++i)
    if (i != model.slack_index()) idx.push_back(i);
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd jac(2 * m, 2 * m);
  Eigen::VectorXd p_plus, q_plus, p_minus, q_minus;
  for (int c = 0; c < 2 * m; ++c) {
    Eigen::VectorXd mag_p = v_mag, ang_p = v_ang;
    Eigen::VectorXd mag_m = v_mag, ang_m = v_ang;
    if (c < m) {
      ang_p[idx[c]] += h;
      ang_m[idx[c]] -= h;
    } else {
      mag_p[idx[c - m]] += h;
      mag_m[idx[c - m]] -= h;
    }
    injections_complex(model.admittance(), mag_p, ang_p, p_plus, q_plus);
    injections_complex(model.admittance(), mag_m, ang_m, p_minus, q_minus);
    for (int r = 0; r < m; ++r) {
      jac(r, c) = (p_plus[idx[r]] - p_minus[idx[r]]) / (2.0 * h);
      jac(m + r, c) = (q_plus[idx[r]] - q_minus[idx[r]]) / (2.0 * h);
    }
  }
  return jac;
}

// Exact voltage at the load end of a single slack-to-load line, from the
// quadratic in |V|^2. Load is consumption-positive, in pu.
struct TwoBusExact {
  double v_mag;
  double v_ang;
};
inline TwoBusExact two_bus_exact(std::complex<double> z_pu, std::complex<double> load_pu) {
  const std::complex<double> a_jb = load_pu * std::conj(z_pu);
  const double a = a_jb.real();
  const double b = a_jb.imag();
  // u = |V2|^2 solves u^2 + (2a - 1)u + (a^2 + b^2) = 0; take the high root.
  const double disc = (1.0 - 2.0 * a) * (1.0 - 2.0 * a) - 4.0 * (a * a + b * b);
  const double u = 0.5 * ((1.0 - 2.0 * a) + std::sqrt(disc));
  return {std::sqrt(u), std::atan2(b, u + a)};
}

inline evcoord::FeederModel two_bus_feeder(double r_ohm = 0.16, double x_ohm = 0.16,
                                           double load_p_kw = 10.0, double load_q_kvar = 0.0) {
  // Base 400 V / 100 kVA puts the impedance base at 1.6 ohm, so 0.16 ohm is
  // 0.1 pu and a 10 kW load is 0.1 pu.
  std::vector<evcoord::Bus> buses{{1, 0.0, 0.0, true}, {2, load_p_kw, load_q_kvar, false}};
  std::vector<evcoord::Line> lines{{1, 2, r_ohm, x_ohm}};
  return evcoord::FeederModel(std::move(buses), std::move(lines), 400.0, 100e3);
}

// Random radial feeder: node i+1 hangs off a uniformly chosen earlier node.
// Impedances keep r/x near one; loads are household sized.
inline evcoord::FeederModel random_radial_feeder(evcoord::Rng& rng, int n_buses) {
  std::vector<evcoord::Bus> buses;
  std::vector<evcoord::Line> lines;
  for (int id = 1; id <= n_buses; ++id) {
    evcoord::Bus bus;
    bus.id = id;
    bus.is_slack = id == 1;
    if (!bus.is_slack) {
      bus.base_load_p_kw = rng.uniform(0.2, 3.0);
      bus.base_load_q_kvar = 0.2 * bus.base_load_p_kw;
    }
    buses.push_back(bus);
    if (id > 1) {
      evcoord::Line line;
      line.from_bus = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(id - 1)));
      line.to_bus = id;
      line.resistance_ohm = rng.uniform(0.02, 0.2);
      line.reactance_ohm = line.resistance_ohm * rng.uniform(0.8, 1.25);
      lines.push_back(line);
    }
  }
  return evcoord::FeederModel(std::move(buses), std::move(lines), 400.0, 100e3);
}

inline std::vector<double> negated_base_loads_p(const evcoord::FeederModel& model) {
  std::vector<double> inj(model.buses().size());
  for (std::size_t i = 0; i < model.buses().size(); ++i)
    inj[i] = model.buses()[i].is_slack ? 0.0 : -model.buses()[i].base_load_p_kw;
  return inj;
}

inline std::vector<double> negated_base_loads_q(const evcoord::FeederModel& model) {
  std::vector<double> inj(model.buses().size());
  for (std::size_t i = 0; i < model.buses().size(); ++i)
    inj[i] = model.buses()[i].is_slack ? 0.0 : -model.buses()[i].base_load_q_kvar;
  return inj;
}

}  // namespace evtest
