#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dacsim/sim.hpp"
#include "dacsim/topology.hpp"

namespace dacsim {

// A maximal interval with constant communication topology, bounded by
// the run horizon and the applied change instants.
struct Segment {
  double t_begin = 0.0;
  double t_end = 0.0;
  int first_sample = 0;  // first recorded sample with time >= t_begin
  int last_sample = 0;   // last recorded sample with time < t_end (or <= for the final segment)
};

inline std::vector<Segment> topology_segments(const Trace& trace) {
  std::vector<double> cuts;
  for (const AppliedChange& ch : trace.change_log)
    if (ch.applied_time > 0.0) cuts.push_back(ch.applied_time);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double t_final = trace.times.empty() ? 0.0 : trace.times.back();
  std::vector<Segment> segs;
  double begin = 0.0;
  for (double cut : cuts) {
    if (cut >= t_final) break;
    segs.push_back(Segment{begin, cut});
    begin = cut;
  }
  segs.push_back(Segment{begin, t_final});

  for (std::size_t k = 0; k < segs.size(); ++k) {
    Segment& s = segs[k];
    const bool final_seg = k + 1 == segs.size();
    int first = -1, last = -1;
    for (int i = 0; i < trace.n_samples(); ++i) {
      const double t = trace.times[i];
      if (t < s.t_begin) continue;
      if (t > s.t_end || (!final_seg && t >= s.t_end)) break;
      if (first < 0) first = i;
      last = i;
    }
    s.first_sample = first;
    s.last_sample = last;
  }
  return segs;
}

// Lyapunov bookkeeping for one connected component over one segment.
// theta1 and theta2 take their minimal admissible values, giving the
// tightest V.
struct ComponentParams {
  std::vector<int> agents;    // 1-based ids
  std::vector<int> edge_idx;  // gain records with both endpoints inside
  double lambda2 = 0.0;
  double eps_bar = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double mu_bar1 = 0.0;
  bool connected() const { return lambda2 > 0.0; }
};

inline std::vector<ComponentParams> component_params(const Trace& trace, double t_in_segment) {
  const Scenario& scn = trace.scenario;
  const Matrix adj = graph_at(scn.topology, t_in_segment);
  std::vector<ComponentParams> out;
  for (const std::vector<int>& comp : components(adj)) {
    ComponentParams cp;
    cp.agents = comp;
    const int m = static_cast<int>(comp.size());
    Matrix sub(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) sub(a, b) = adj(comp[a] - 1, comp[b] - 1);
    cp.lambda2 = m > 1 ? lambda2(laplacian(sub)) : 0.0;
    for (std::size_t g = 0; g < trace.edges.size(); ++g) {
      const Edge& e = trace.edges[g];
      const bool in_first = std::binary_search(comp.begin(), comp.end(), e.first);
      const bool in_second = std::binary_search(comp.begin(), comp.end(), e.second);
      if (in_first && in_second) cp.edge_idx.push_back(static_cast<int>(g));
    }
    if (cp.connected()) {
      std::vector<ReferenceSignal> sigs;
      for (int id : comp) sigs.push_back(scn.signals[id - 1]);
      const SignalBounds b = bound_estimate(sigs, scn.sim.horizon, scn.sim.dt);
      cp.eps_bar = std::sqrt(static_cast<double>(m)) / cp.lambda2 *
                   (scn.params.gamma * b.eps1 + b.eps2);
      cp.theta1 = 1.0 + 2.0 * cp.eps_bar;
      cp.theta2 = 2.0 + 6.0 * cp.eps_bar;
      cp.mu_bar1 = cp.eps_bar * static_cast<double>(m) * static_cast<double>(m) *
                   scn.params.mu1;
    }
    out.push_back(std::move(cp));
  }
  return out;
}

// Independent recomputation of x_tilde from the recorded estimates and
// the scenario's signals; the engine records its own copy, so the two
// routes can be cross-checked.
inline std::vector<std::vector<double>> estimation_error(const Trace& trace) {
  const Scenario& scn = trace.scenario;
  const int n = trace.n_agents();
  std::vector<std::vector<double>> xt(n, std::vector<double>(trace.n_samples()));
  const std::vector<Segment> segs = topology_segments(trace);
  for (const Segment& seg : segs) {
    if (seg.first_sample < 0) continue;
    const Matrix adj = graph_at(scn.topology, seg.t_begin);
    const auto comps = components(adj);
    std::vector<int> comp_of(n, 0);
    for (std::size_t k = 0; k < comps.size(); ++k)
      for (int id : comps[k]) comp_of[id - 1] = static_cast<int>(k);
    for (int s = seg.first_sample; s <= seg.last_sample; ++s) {
      const double t = trace.times[s];
      std::vector<double> avg(comps.size());
      for (std::size_t k = 0; k < comps.size(); ++k)
        avg[k] = group_average(scn.signals, comps[k], t);
      for (int i = 0; i < n; ++i) xt[i][s] = trace.x[i][s] - avg[comp_of[i]];
    }
  }
  return xt;
}

struct LyapunovSample {
  double V = 0.0, V1 = 0.0, V2 = 0.0, V3 = 0.0;
};

inline LyapunovSample lyapunov_value(const Trace& trace, int sample, const ComponentParams& cp) {
  const Scenario& scn = trace.scenario;
  LyapunovSample v;
  for (int id : cp.agents) {
    const double xt = trace.x_tilde[id - 1][sample];
    v.V1 += 0.5 * xt * xt;
    v.V2 += cp.theta1 * trace.f[id - 1][sample];
  }
  // Ordered-pair double sum folded: each undirected edge counts twice.
  const double ratio = scn.gain_params.sigma / scn.gain_params.nu;
  for (int g : cp.edge_idx) {
    const double dc = trace.c[g][sample] - cp.theta2;
    const double dch = trace.c_hat[g][sample] - cp.theta2;
    v.V3 += 0.5 * (dc * dc + ratio * dch * dch);
  }
  v.V = v.V1 + v.V2 + v.V3;
  return v;
}

struct DissipationReport {
  int pointwise_checked = 0;
  int pointwise_violations = 0;
  double worst_pointwise_margin = std::numeric_limits<double>::infinity();  // min slack
  std::vector<double> violation_times;
  int illegal_resets = 0;
  bool integral_ok = true;
  double integral_lhs = 0.0;
  double integral_rhs = 0.0;
};

// Checks the dissipation inequality between recorded samples and its
// integral form over the segment, for one connected component.
inline DissipationReport dissipation_check(const Trace& trace, const Segment& seg,
                                           const ComponentParams& cp) {
  const Scenario& scn = trace.scenario;
  DissipationReport rep;
  if (seg.first_sample < 0 || !cp.connected()) return rep;

  // Event instants of the component's agents inside the segment.
  std::vector<double> event_times;
  for (const TraceEvent& ev : trace.events) {
    if (ev.time <= seg.t_begin || ev.time > trace.times[seg.last_sample]) continue;
    if (!std::binary_search(cp.agents.begin(), cp.agents.end(), ev.agent)) continue;
    event_times.push_back(ev.time);
    if (ev.f_pre > 0.0) ++rep.illegal_resets;
  }
  std::sort(event_times.begin(), event_times.end());

  const LyapunovSample v0 = lyapunov_value(trace, seg.first_sample, cp);
  const double tol_scale = 1e-3 * std::max(1.0, v0.V);

  auto norm2 = [&](int s) {
    double acc = 0.0;
    for (int id : cp.agents) {
      const double xt = trace.x_tilde[id - 1][s];
      acc += xt * xt;
    }
    return acc;
  };

  double prev_v = v0.V;
  double integral = 0.0;
  for (int s = seg.first_sample + 1; s <= seg.last_sample; ++s) {
    const double t0 = trace.times[s - 1];
    const double t1 = trace.times[s];
    const double h = t1 - t0;
    const LyapunovSample vs = lyapunov_value(trace, s, cp);
    integral += 0.5 * h * (norm2(s - 1) + norm2(s));

    auto lo = std::upper_bound(event_times.begin(), event_times.end(), t0);
    const bool has_event = lo != event_times.end() && *lo <= t1;
    if (!has_event) {
      ++rep.pointwise_checked;
      const double lhs = (vs.V - prev_v) / h;
      const double rhs = -scn.params.gamma * norm2(s - 1) +
                         cp.mu_bar1 * std::exp(-scn.params.mu2 * t0) +
                         tol_scale * (1.0 + h);
      const double margin = rhs - lhs;
      rep.worst_pointwise_margin = std::min(rep.worst_pointwise_margin, margin);
      if (margin < 0.0) {
        ++rep.pointwise_violations;
        rep.violation_times.push_back(t1);
      }
    }
    prev_v = vs.V;
  }

  const double t_first = trace.times[seg.first_sample];
  const double t_last = trace.times[seg.last_sample];
  rep.integral_lhs = prev_v + scn.params.gamma * integral;
  rep.integral_rhs = v0.V +
                     cp.mu_bar1 / scn.params.mu2 *
                         (std::exp(-scn.params.mu2 * t_first) - std::exp(-scn.params.mu2 * t_last)) +
                     tol_scale;
  rep.integral_ok = rep.integral_lhs <= rep.integral_rhs;
  return rep;
}

struct AgentIntervalStats {
  double low = 0.0;                 // theoretical lower bound f_bar / (eta_bar + delta)
  std::optional<double> min;        // observed minimum inter-event interval
  long total = 0;                   // event count
  double eta_bar = 0.0;
  double e_bar = 0.0;               // empirical sup |e_i|
  double c_bar_sum = 0.0;           // sum over incident present edges of sup c_ij
};

struct IntervalStats {
  std::vector<AgentIntervalStats> per_agent;
};

inline IntervalStats interval_stats(const Trace& trace) {
  const Scenario& scn = trace.scenario;
  const int n = trace.n_agents();
  IntervalStats st;
  st.per_agent.resize(n);

  // Maximal adjacency over the run: an edge counts if present in any
  // constant-topology segment.
  Matrix a_max(n, n);
  for (const Segment& seg : topology_segments(trace)) {
    const Matrix adj = graph_at(scn.topology, seg.t_begin);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a_max(i, j) = std::max(a_max(i, j), adj(i, j));
  }

  // Per-edge suprema of c: prefer the engine's exact per-step record;
  // fall back to the recorded samples for traces that lack it.
  std::vector<double> c_bar(trace.edges.size(), 0.0);
  if (trace.c_sup.size() == trace.edges.size()) {
    c_bar = trace.c_sup;
  } else {
    for (std::size_t g = 0; g < trace.edges.size(); ++g)
      for (double v : trace.c[g]) c_bar[g] = std::max(c_bar[g], v);
  }

  std::vector<std::vector<double>> events_of(n);
  for (const TraceEvent& ev : trace.events) events_of[ev.agent - 1].push_back(ev.time);

  for (int i = 0; i < n; ++i) {
    AgentIntervalStats& a = st.per_agent[i];
    if (static_cast<int>(trace.e_sup.size()) == n) {
      a.e_bar = trace.e_sup[i];
    } else {
      for (double v : trace.e[i]) a.e_bar = std::max(a.e_bar, std::abs(v));
    }
    for (std::size_t g = 0; g < trace.edges.size(); ++g) {
      const Edge& e = trace.edges[g];
      const int other = e.first == i + 1 ? e.second : (e.second == i + 1 ? e.first : 0);
      if (other == 0) continue;
      if (a_max(i, other - 1) != 0.0) a.c_bar_sum += c_bar[g];
    }
    a.eta_bar = scn.trigger_params[i].beta * a.c_bar_sum * a.e_bar;
    a.low = scn.trigger_params[i].f_bar / (a.eta_bar + scn.trigger_params[i].delta);

    std::vector<double>& ev = events_of[i];
    std::sort(ev.begin(), ev.end());
    a.total = static_cast<long>(ev.size());
    for (std::size_t k = 1; k < ev.size(); ++k) {
      const double gap = ev[k] - ev[k - 1];
      if (!a.min || gap < *a.min) a.min = gap;
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Verification report

struct VerificationItem {
  enum class Status { Pass, Fail, NotEvaluable };
  std::string name;
  Status status = Status::Pass;
  double margin = 0.0;  // worst slack; negative means failed
  std::string detail;
};

struct VerificationReport {
  std::vector<VerificationItem> items;
  bool all_pass() const {
    for (const VerificationItem& it : items)
      if (it.status == VerificationItem::Status::Fail) return false;
    return true;
  }
};

inline VerificationReport verify_trace(const Trace& trace) {
  const Scenario& scn = trace.scenario;
  const int n = trace.n_agents();
  const double dt = scn.sim.dt;
  VerificationReport rep;
  auto add = [&](std::string name, VerificationItem::Status st, double margin,
                 std::string detail = "") {
    rep.items.push_back({std::move(name), st, margin, std::move(detail)});
  };
  using S = VerificationItem::Status;

  // Output-map identity x = z + r(t).
  {
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < trace.n_samples(); ++s)
      for (int i = 0; i < n; ++i) {
        const double r = eval(scn.signals[i], trace.times[s]);
        worst = std::min(worst, 1e-9 - std::abs(trace.x[i][s] - trace.z[i][s] - r));
      }
    add("output_map_identity", worst >= 0.0 ? S::Pass : S::Fail, worst);
  }

  // Broadcast constant between consecutive events of each agent.
  {
    std::vector<std::vector<double>> events_of(n);
    for (const TraceEvent& ev : trace.events) events_of[ev.agent - 1].push_back(ev.time);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      std::sort(events_of[i].begin(), events_of[i].end());
      for (int s = 1; s < trace.n_samples() && ok; ++s) {
        auto lo = std::upper_bound(events_of[i].begin(), events_of[i].end(),
                                   trace.times[s - 1]);
        const bool has_event = lo != events_of[i].end() && *lo <= trace.times[s];
        if (!has_event && trace.x_hat[i][s] != trace.x_hat[i][s - 1]) ok = false;
      }
    }
    add("broadcast_constant_between_events", ok ? S::Pass : S::Fail, ok ? 0.0 : -1.0);
  }

  // Gain ordering c >= c_hat >= 1 - 1e-9 at every recorded step.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < trace.edges.size(); ++g)
      for (int s = 0; s < trace.n_samples(); ++s) {
        worst = std::min(worst, trace.c[g][s] - trace.c_hat[g][s]);
        worst = std::min(worst, trace.c_hat[g][s] - (1.0 - 1e-9));
      }
    add("gain_ordering", worst >= 0.0 ? S::Pass : S::Fail, worst);
  }

  // Every c_hat series nondecreasing within 1e-9 per recorded step.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < trace.edges.size(); ++g)
      for (int s = 1; s < trace.n_samples(); ++s)
        worst = std::min(worst, trace.c_hat[g][s] - trace.c_hat[g][s - 1] + 1e-9);
    add("compensation_nondecreasing", worst >= 0.0 ? S::Pass : S::Fail, worst);
  }

  // Gain convergence: final max |c - c_hat| < 0.01.
  {
    double gap = 0.0;
    const int last = trace.n_samples() - 1;
    for (std::size_t g = 0; g < trace.edges.size(); ++g)
      gap = std::max(gap, std::abs(trace.c[g][last] - trace.c_hat[g][last]));
    add("gain_convergence", gap < 0.01 ? S::Pass : S::Fail, 0.01 - gap,
        "final max|c - c_hat| = " + std::to_string(gap));
  }

  const IntervalStats stats = interval_stats(trace);

  // Trigger range: -dt*(eta_bar + delta) <= f <= f_bar, resets restore f_bar.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double floor = -dt * (stats.per_agent[i].eta_bar + scn.trigger_params[i].delta);
      for (int s = 0; s < trace.n_samples(); ++s) {
        worst = std::min(worst, scn.trigger_params[i].f_bar - trace.f[i][s]);
        worst = std::min(worst, trace.f[i][s] - floor);
      }
    }
    bool resets_exact = true;
    for (const TraceEvent& ev : trace.events) {
      const double floor = -dt * (stats.per_agent[ev.agent - 1].eta_bar +
                                  scn.trigger_params[ev.agent - 1].delta);
      worst = std::min(worst, ev.f_pre - floor);
      if (ev.f_post != scn.trigger_params[ev.agent - 1].f_bar) resets_exact = false;
    }
    add("trigger_range", worst >= 0.0 && resets_exact ? S::Pass : S::Fail, worst,
        resets_exact ? "" : "reset did not restore f_bar exactly");
  }

  // Theorem 2: every observed inter-event interval >= low_i - dt.
  {
    double worst = std::numeric_limits<double>::infinity();
    bool evaluable = false;
    for (int i = 0; i < n; ++i) {
      if (!stats.per_agent[i].min) continue;
      evaluable = true;
      worst = std::min(worst, *stats.per_agent[i].min - (stats.per_agent[i].low - dt));
    }
    if (!evaluable)
      add("theorem2_interval_bound", S::NotEvaluable, 0.0, "no agent with >= 2 events");
    else
      add("theorem2_interval_bound", worst >= 0.0 ? S::Pass : S::Fail, worst);
  }

  // Theorem 1: on every segment at least 6 s long, max |x_tilde| < 0.1
  // over the segment's final second.
  {
    const std::vector<Segment> segs = topology_segments(trace);
    bool evaluable = false;
    double worst = std::numeric_limits<double>::infinity();
    for (const Segment& seg : segs) {
      if (seg.t_end - seg.t_begin < 6.0 || seg.first_sample < 0) continue;
      evaluable = true;
      const double w_begin = trace.times[seg.last_sample] - 1.0;
      for (int s = seg.first_sample; s <= seg.last_sample; ++s) {
        if (trace.times[s] < w_begin) continue;
        for (int i = 0; i < n; ++i)
          worst = std::min(worst, 0.1 - std::abs(trace.x_tilde[i][s]));
      }
    }
    if (!evaluable)
      add("theorem1_convergence_window", S::NotEvaluable, 0.0,
          "no constant-topology segment of at least 6 s");
    else
      add("theorem1_convergence_window", worst >= 0.0 ? S::Pass : S::Fail, worst);
  }

  // Lyapunov dissipation, pointwise and integral, per segment/component.
  {
    const std::vector<Segment> segs = topology_segments(trace);
    int violations = 0;
    int illegal = 0;
    bool integral_ok = true;
    double worst = std::numeric_limits<double>::infinity();
    double integral_margin = std::numeric_limits<double>::infinity();
    for (const Segment& seg : segs) {
      if (seg.first_sample < 0) continue;
      for (const ComponentParams& cp : component_params(trace, seg.t_begin)) {
        if (!cp.connected()) continue;
        const DissipationReport dr = dissipation_check(trace, seg, cp);
        violations += dr.pointwise_violations;
        illegal += dr.illegal_resets;
        worst = std::min(worst, dr.worst_pointwise_margin);
        integral_ok = integral_ok && dr.integral_ok;
        integral_margin = std::min(integral_margin, dr.integral_rhs - dr.integral_lhs);
      }
    }
    add("lyapunov_pointwise", violations == 0 && illegal == 0 ? S::Pass : S::Fail, worst,
        std::to_string(violations) + " violations, " + std::to_string(illegal) +
            " illegal resets");
    add("lyapunov_integral", integral_ok ? S::Pass : S::Fail, integral_margin);
  }

  return rep;
}

inline std::string format_report(const VerificationReport& rep) {
  std::ostringstream out;
  for (const VerificationItem& it : rep.items) {
    const char* st = it.status == VerificationItem::Status::Pass ? "PASS"
                     : it.status == VerificationItem::Status::Fail ? "FAIL"
                                                                   : "N/A ";
    out << st << "  " << it.name << "  margin=" << it.margin;
    if (!it.detail.empty()) out << "  (" << it.detail << ")";
    out << "\n";
  }
  return out.str();
}

}  // namespace dacsim
