#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "dacsim/topology.hpp"

namespace dacsim {

struct AlgorithmParams {
  double gamma = 1.0;  // leak rate of the internal state
  double mu1 = 1.0;    // boundary-layer width mu(t) = mu1 * exp(-mu2 * t)
  double mu2 = 0.01;
};

inline void validate_params(const AlgorithmParams& p) {
  if (!(p.gamma > 0.0)) throw std::invalid_argument("params: gamma must be > 0");
  if (!(p.mu1 > 0.0)) throw std::invalid_argument("params: mu1 must be > 0");
  if (!(p.mu2 > 0.0)) throw std::invalid_argument("params: mu2 must be > 0");
}

inline double mu(const AlgorithmParams& p, double t) {
  if (t < 0.0) throw std::invalid_argument("mu: t must be >= 0");
  return p.mu1 * std::exp(-p.mu2 * t);
}

struct AgentState {
  int id = 0;        // 1-based
  double z = 0.0;    // internal state
  double x = 0.0;    // estimate, x = z + r_i(t)
  double x_hat = 0.0;  // latest broadcast value
};

// Adaptive gain c and its compensation term c_hat for one undirected
// edge; a single record serves both endpoints, so c_ij = c_ji holds
// structurally.
struct EdgeGain {
  Edge edge;
  double c = 1.0;
  double c_hat = 1.0;
  double sigma = 1.0;
  double nu = 1.0;
};

inline void validate_gain_init(double c0, double c_hat0, const Edge& edge = {}) {
  if (!(c0 >= c_hat0 && c_hat0 >= 1.0)) {
    std::string where = edge.first > 0 ? " on edge (" + std::to_string(edge.first) + "," +
                                             std::to_string(edge.second) + ")"
                                       : "";
    throw std::invalid_argument("gain init requires c0 >= c_hat0 >= 1" + where +
                                ": c0=" + std::to_string(c0) +
                                ", c_hat0=" + std::to_string(c_hat0));
  }
}

// A neighbor's contribution to an agent's input: its broadcast value and
// the shared edge gain.
struct NeighborView {
  double x_hat = 0.0;
  double c = 0.0;
};

// u_i = -sum_j a_ij c_ij (xh_i - xh_j) / (|xh_i - xh_j| + mu(t)).
// Each summand has magnitude strictly below c_ij since mu_t > 0.
inline double control_input(double x_hat_i, std::span<const NeighborView> neighbors,
                            double mu_t) {
  if (!(mu_t > 0.0)) throw std::invalid_argument("control_input: mu_t must be > 0");
  double u = 0.0;
  for (const NeighborView& nb : neighbors) {
    const double diff = x_hat_i - nb.x_hat;
    u -= nb.c * diff / (std::abs(diff) + mu_t);
  }
  return u;
}

// One forward Euler step of z' = -gamma z + u, then the output map
// x = z + r_i at the new time. The broadcast x_hat is untouched.
inline void step_agent(AgentState& s, double r_next, double u, double gamma, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_agent: dt must be > 0");
  s.z += dt * (-gamma * s.z + u);
  s.x = s.z + r_next;
}

// One forward Euler step of the composite adaptive law. Both updates
// read the pre-step values of c and c_hat.
inline void step_gain(EdgeGain& g, double x_hat_i, double x_hat_j, double a_ij, double mu_t,
                      double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_gain: dt must be > 0");
  if (!(mu_t > 0.0)) throw std::invalid_argument("step_gain: mu_t must be > 0");
  const double ad = std::abs(x_hat_i - x_hat_j);
  const double direct = a_ij * ad * ad / (ad + mu_t);
  const double gap = g.c - g.c_hat;
  g.c += dt * (direct - g.sigma * gap);
  g.c_hat += dt * g.nu * gap;
}

}  // namespace dacsim
