#pragma once

// Independent straight-line recomputation of the two-agent discrete
// recursion, kept free of any engine code so it can serve as an oracle
// for the simulation loop.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct Params {
  double gamma, mu1, mu2;
  double f_bar, delta, alpha, beta;
  double sigma, nu;
  double dt;
};

struct State {
  double z1, z2, x1, x2, xh1, xh2, e1, e2, f1, f2, c, ch;
};

using Signal = std::function<double(double)>;

inline State initial_state(const Params& p, double z1_0, double z2_0, double c0, double ch0,
                           const Signal& r1, const Signal& r2) {
  State s{};
  s.z1 = z1_0;
  s.z2 = z2_0;
  s.x1 = s.z1 + r1(0.0);
  s.x2 = s.z2 + r2(0.0);
  s.xh1 = s.x1;
  s.xh2 = s.x2;
  s.e1 = s.e2 = 0.0;
  s.f1 = s.f2 = p.f_bar;
  s.c = c0;
  s.ch = ch0;
  return s;
}

// Advances one step from time t = k*dt. All reads use the pre-step
// snapshot; events are checked at the end of the step.
inline void step(State& s, const Params& p, long k, const Signal& r1, const Signal& r2) {
  const double t = static_cast<double>(k) * p.dt;
  const double t_next = static_cast<double>(k + 1) * p.dt;
  const double mu_t = p.mu1 * std::exp(-p.mu2 * t);

  const double diff12 = s.xh1 - s.xh2;
  const double diff21 = s.xh2 - s.xh1;
  const double ad = std::abs(diff12);

  double u1 = 0.0, u2 = 0.0;
  u1 -= s.c * diff12 / (std::abs(diff12) + mu_t);
  u2 -= s.c * diff21 / (std::abs(diff21) + mu_t);

  const double gain_term = ad * ad / (ad + mu_t);
  const double eta1 = p.alpha * gain_term - p.beta * s.c * std::abs(s.e1);
  const double eta2 = p.alpha * gain_term - p.beta * s.c * std::abs(s.e2);

  s.z1 += p.dt * (-p.gamma * s.z1 + u1);
  s.x1 = s.z1 + r1(t_next);
  s.z2 += p.dt * (-p.gamma * s.z2 + u2);
  s.x2 = s.z2 + r2(t_next);

  const double direct = 1.0 * ad * ad / (ad + mu_t);
  const double gap = s.c - s.ch;
  s.c += p.dt * (direct - p.sigma * gap);
  s.ch += p.dt * p.nu * gap;

  s.f1 += p.dt * (std::min(eta1, 0.0) - p.delta);
  s.e1 = s.xh1 - s.x1;
  if (s.f1 <= 0.0) {
    s.xh1 = s.x1;
    s.e1 = 0.0;
    s.f1 = p.f_bar;
  }
  s.f2 += p.dt * (std::min(eta2, 0.0) - p.delta);
  s.e2 = s.xh2 - s.x2;
  if (s.f2 <= 0.0) {
    s.xh2 = s.x2;
    s.e2 = 0.0;
    s.f2 = p.f_bar;
  }
}

}  // namespace oracle
