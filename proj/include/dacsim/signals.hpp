#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace dacsim {

// a*sin(b*t) or a*cos(b*t)
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 0.0;
  bool cosine = false;
};

struct Constant {
  double value = 0.0;
};

// Continuous piecewise-linear interpolation through sorted (t, v) knots.
// Derivative uses the right-derivative convention at interior knots.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
};

using ReferenceSignal = std::variant<Sinusoid, Constant, PiecewiseLinear>;

inline void validate_signal(const ReferenceSignal& sig) {
  if (const auto* pw = std::get_if<PiecewiseLinear>(&sig)) {
    if (pw->knots.size() < 2)
      throw std::invalid_argument("piecewise-linear signal needs at least two knots");
    for (std::size_t i = 1; i < pw->knots.size(); ++i)
      if (pw->knots[i].first <= pw->knots[i - 1].first)
        throw std::invalid_argument("piecewise-linear knots must have increasing times");
  }
}

namespace detail {
// Index of the segment whose right-open interval contains t.
inline std::size_t pw_segment(const PiecewiseLinear& pw, double t) {
  if (t < pw.knots.front().first || t > pw.knots.back().first)
    throw std::out_of_range("piecewise-linear signal evaluated outside its knot range");
  std::size_t i = 0;
  while (i + 2 < pw.knots.size() && t >= pw.knots[i + 1].first) ++i;
  return i;
}
}  // namespace detail

inline double eval(const ReferenceSignal& sig, double t) {
  if (t < 0.0) throw std::invalid_argument("signal eval: t must be >= 0");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sinusoid>) {
          return s.cosine ? s.amplitude * std::cos(s.frequency * t)
                          : s.amplitude * std::sin(s.frequency * t);
        } else if constexpr (std::is_same_v<T, Constant>) {
          return s.value;
        } else {
          const std::size_t i = detail::pw_segment(s, t);
          const auto& [t0, v0] = s.knots[i];
          const auto& [t1, v1] = s.knots[i + 1];
          return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
      },
      sig);
}

inline double eval_derivative(const ReferenceSignal& sig, double t) {
  if (t < 0.0) throw std::invalid_argument("signal eval_derivative: t must be >= 0");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sinusoid>) {
          return s.cosine ? -s.amplitude * s.frequency * std::sin(s.frequency * t)
                          : s.amplitude * s.frequency * std::cos(s.frequency * t);
        } else if constexpr (std::is_same_v<T, Constant>) {
          return 0.0;
        } else {
          const std::size_t i = detail::pw_segment(s, t);
          const auto& [t0, v0] = s.knots[i];
          const auto& [t1, v1] = s.knots[i + 1];
          return (v1 - v0) / (t1 - t0);
        }
      },
      sig);
}

inline double group_average(std::span<const ReferenceSignal> signals,
                            std::span<const int> agent_ids, double t) {
  if (agent_ids.empty()) throw std::invalid_argument("group_average: empty agent set");
  double sum = 0.0;
  for (int id : agent_ids) {
    if (id < 1 || static_cast<std::size_t>(id) > signals.size())
      throw std::out_of_range("group_average: agent id out of range");
    sum += eval(signals[id - 1], t);
  }
  return sum / static_cast<double>(agent_ids.size());
}

// Bounds eps1 >= sup|r_i| and eps2 >= sup|r_i'| over [0, horizon].
struct SignalBounds {
  double eps1 = 0.0;
  double eps2 = 0.0;
};

// Analytic bounds for closed-form kinds; sampled supremum at step
// resolution, inflated by 5%, for piecewise-linear. Both bounds are
// floored at 1e-12 since the downstream analysis needs them strictly
// positive.
inline SignalBounds bound_estimate(std::span<const ReferenceSignal> signals, double horizon,
                                   double step = 1e-3) {
  if (horizon <= 0.0) throw std::invalid_argument("bound_estimate: horizon must be > 0");
  SignalBounds b;
  for (const ReferenceSignal& sig : signals) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sinusoid>) {
            b.eps1 = std::max(b.eps1, std::abs(s.amplitude));
            b.eps2 = std::max(b.eps2, std::abs(s.amplitude * s.frequency));
          } else if constexpr (std::is_same_v<T, Constant>) {
            b.eps1 = std::max(b.eps1, std::abs(s.value));
          } else {
            double sup_v = 0.0;
            double sup_d = 0.0;
            for (double t = 0.0; t <= horizon; t += step) {
              sup_v = std::max(sup_v, std::abs(eval(sig, t)));
              sup_d = std::max(sup_d, std::abs(eval_derivative(sig, t)));
            }
            b.eps1 = std::max(b.eps1, 1.05 * sup_v);
            b.eps2 = std::max(b.eps2, 1.05 * sup_d);
          }
        },
        sig);
  }
  b.eps1 = std::max(b.eps1, 1e-12);
  b.eps2 = std::max(b.eps2, 1e-12);
  return b;
}

}  // namespace dacsim
