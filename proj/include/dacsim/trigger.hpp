#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "dacsim/consensus.hpp"

namespace dacsim {

// Per-agent dynamic triggering state. f decays per f' = min{eta, 0} - delta
// and resets to f_bar when an event fires.
struct TriggerState {
  double f = 0.0;
  double f_bar = 1.0;
  double delta = 1.0;
  double alpha = 1.0;  // in (0, 1]
  double beta = 1.0;   // >= 1
  double e = 0.0;      // measurement error x_hat - x
  double last_event_time = 0.0;
  long event_count = 0;
};

inline void validate_trigger_params(const TriggerState& s) {
  if (!(s.f_bar > 0.0)) throw std::invalid_argument("trigger: f_bar must be > 0");
  if (!(s.delta > 0.0)) throw std::invalid_argument("trigger: delta must be > 0");
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) throw std::invalid_argument("trigger: alpha must be in (0, 1]");
  if (!(s.beta >= 1.0)) throw std::invalid_argument("trigger: beta must be >= 1");
}

inline double measurement_error(double x_hat, double x) { return x_hat - x; }

// eta_i = alpha sum_j a_ij |xh_i - xh_j|^2 / (|xh_i - xh_j| + mu)
//       - beta sum_j a_ij c_ij |e_i|
inline double eta(double x_hat_i, std::span<const NeighborView> neighbors, double e_i,
                  double alpha, double beta, double mu_t) {
  if (!(mu_t > 0.0)) throw std::invalid_argument("eta: mu_t must be > 0");
  double gain_term = 0.0;
  double cost_term = 0.0;
  for (const NeighborView& nb : neighbors) {
    const double ad = std::abs(x_hat_i - nb.x_hat);
    gain_term += ad * ad / (ad + mu_t);
    cost_term += nb.c;
  }
  return alpha * gain_term - beta * cost_term * std::abs(e_i);
}

inline void step_trigger(TriggerState& s, double eta_i, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_trigger: dt must be > 0");
  s.f += dt * (std::min(eta_i, 0.0) - s.delta);
}

struct FireResult {
  bool fired = false;
  double f_pre = 0.0;   // f value at the check, before any reset
  double broadcast = 0.0;  // new x_hat when fired
};

// End-of-step event check: fires iff f <= 0; on fire the current
// estimate becomes the broadcast, e resets to 0 and f to f_bar.
inline FireResult check_and_fire(TriggerState& s, double x_current, double t) {
  FireResult r;
  r.f_pre = s.f;
  if (s.f <= 0.0) {
    r.fired = true;
    r.broadcast = x_current;
    s.e = 0.0;
    s.f = s.f_bar;
    s.last_event_time = t;
    ++s.event_count;
  }
  return r;
}

}  // namespace dacsim
