#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dacsim/consensus.hpp"
#include "dacsim/signals.hpp"
#include "dacsim/topology.hpp"
#include "dacsim/trigger.hpp"

namespace dacsim {

// Seeded uniform draws with an implementation-independent mapping from
// the raw 64-bit stream, so the same seed resolves the same values on
// any platform.
inline constexpr const char* kPrngId = "mt19937_64/shift53";

class Prng {
 public:
  explicit Prng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

 private:
  std::mt19937_64 gen_;
};

struct RandomRange {
  double lo = 0.0;
  double hi = 0.0;
};

// A per-edge or per-agent initial value: one value for all, an explicit
// list, or a seeded uniform range.
using ValueSpec = std::variant<double, std::vector<double>, RandomRange>;

struct TriggerParams {
  double f_bar = 10.0;
  double delta = 1.0;
  double alpha = 0.01;
  double beta = 100.0;
};

struct GainParams {
  double sigma = 5.0;
  double nu = 5.0;
  ValueSpec c0 = 1.0;
  ValueSpec c_hat0 = 1.0;
};

struct SimParams {
  double dt = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  int record_every = 10;
};

struct Scenario {
  std::string name;
  TimedTopology topology;
  std::vector<ReferenceSignal> signals;       // one per agent
  AlgorithmParams params;
  std::vector<TriggerParams> trigger_params;  // one per agent
  GainParams gain_params;                     // applied to every base edge
  ValueSpec z0 = 0.0;
  SimParams sim;
};

inline void validate_scenario(const Scenario& s) {
  validate_topology(s.topology);
  validate_params(s.params);
  if (static_cast<int>(s.signals.size()) != s.topology.n)
    throw std::invalid_argument("scenario: need one signal per agent");
  for (const ReferenceSignal& sig : s.signals) validate_signal(sig);
  if (static_cast<int>(s.trigger_params.size()) != s.topology.n)
    throw std::invalid_argument("scenario: need trigger params per agent");
  for (const TriggerParams& tp : s.trigger_params) {
    TriggerState probe{.f = tp.f_bar, .f_bar = tp.f_bar, .delta = tp.delta,
                       .alpha = tp.alpha, .beta = tp.beta};
    validate_trigger_params(probe);
  }
  if (!(s.gain_params.sigma > 0.0)) throw std::invalid_argument("scenario: sigma must be > 0");
  if (!(s.gain_params.nu > 0.0)) throw std::invalid_argument("scenario: nu must be > 0");
  if (!(s.sim.dt > 0.0)) throw std::invalid_argument("scenario: dt must be > 0");
  if (!(s.sim.horizon >= s.sim.dt))
    throw std::invalid_argument("scenario: horizon must be >= dt");
  if (s.sim.record_every < 1)
    throw std::invalid_argument("scenario: record_every must be >= 1");
  auto check_list_size = [&](const ValueSpec& v, std::size_t want, const char* what) {
    if (const auto* list = std::get_if<std::vector<double>>(&v))
      if (list->size() != want)
        throw std::invalid_argument(std::string("scenario: ") + what + " list size mismatch");
  };
  check_list_size(s.z0, static_cast<std::size_t>(s.topology.n), "z0");
  check_list_size(s.gain_params.c0, s.topology.base_edges.size(), "c0");
  check_list_size(s.gain_params.c_hat0, s.topology.base_edges.size(), "c_hat0");
}

// Initial values after resolving all randomization specs with the seed.
struct ResolvedInit {
  std::vector<double> z0;
  std::vector<double> c0;
  std::vector<double> c_hat0;
};

struct TraceEvent {
  int agent = 0;     // 1-based
  double time = 0.0;
  double f_pre = 0.0;   // trigger value just before the reset
  double f_post = 0.0;  // value restored by the reset (f_bar)
};

struct AppliedChange {
  double scheduled_time = 0.0;
  double applied_time = 0.0;  // first step time >= scheduled_time
  Edge edge;
  EdgeAction action = EdgeAction::Remove;
};

// Complete run record: downsampled state series plus the exact event
// log, along with everything needed to reproduce the run.
struct Trace {
  Scenario scenario;
  ResolvedInit init;
  std::string prng_id;

  std::vector<double> times;
  // series[agent_index][sample]
  std::vector<std::vector<double>> z, x, x_hat, e, f, x_tilde;
  std::vector<Edge> edges;  // gain record order
  std::vector<std::vector<double>> c, c_hat;  // series[edge_index][sample]
  std::vector<TraceEvent> events;
  std::vector<AppliedChange> change_log;
  // Exact running suprema over every step (not just recorded samples):
  // sup |e_i| per agent and sup c_ij per edge.
  std::vector<double> e_sup, c_sup;

  int n_agents() const { return scenario.topology.n; }
  int n_samples() const { return static_cast<int>(times.size()); }
};

struct NumericalAbort : std::runtime_error {
  explicit NumericalAbort(double t)
      : std::runtime_error("simulation aborted: non-finite state at t = " + std::to_string(t)),
        last_good_time(t) {}
  double last_good_time;
};

class Engine {
 public:
  explicit Engine(Scenario scenario) : scn_(std::move(scenario)) {
    validate_scenario(scn_);
    const int n = scn_.topology.n;
    total_steps_ = static_cast<long>(std::ceil(scn_.sim.horizon / scn_.sim.dt - 1e-9));

    Prng rng(scn_.sim.seed);
    auto resolve = [&](const ValueSpec& spec, std::size_t count) {
      std::vector<double> out(count);
      if (const auto* v = std::get_if<double>(&spec)) {
        for (auto& o : out) o = *v;
      } else if (const auto* list = std::get_if<std::vector<double>>(&spec)) {
        out = *list;
      } else {
        const auto& r = std::get<RandomRange>(spec);
        for (auto& o : out) o = rng.uniform(r.lo, r.hi);
      }
      return out;
    };
    // Draw order is fixed: edge gains first, then compensation terms,
    // then agent initial states.
    init_.c0 = resolve(scn_.gain_params.c0, scn_.topology.base_edges.size());
    init_.c_hat0 = resolve(scn_.gain_params.c_hat0, scn_.topology.base_edges.size());
    init_.z0 = resolve(scn_.z0, static_cast<std::size_t>(n));

    gains_.reserve(scn_.topology.base_edges.size());
    for (std::size_t k = 0; k < scn_.topology.base_edges.size(); ++k) {
      const Edge& edge = scn_.topology.base_edges[k];
      validate_gain_init(init_.c0[k], init_.c_hat0[k], edge);
      gains_.push_back(EdgeGain{edge, init_.c0[k], init_.c_hat0[k], scn_.gain_params.sigma,
                                scn_.gain_params.nu});
    }

    agents_.resize(n);
    trig_.resize(n);
    for (int i = 0; i < n; ++i) {
      agents_[i].id = i + 1;
      agents_[i].z = init_.z0[i];
      agents_[i].x = agents_[i].z + eval(scn_.signals[i], 0.0);
      const TriggerParams& tp = scn_.trigger_params[i];
      trig_[i] = TriggerState{.f = tp.f_bar, .f_bar = tp.f_bar, .delta = tp.delta,
                              .alpha = tp.alpha, .beta = tp.beta};
    }

    apply_changes_due(0.0, 0.0);

    trace_.scenario = scn_;
    trace_.init = init_;
    trace_.prng_id = kPrngId;
    trace_.edges = scn_.topology.base_edges;
    trace_.z.resize(n); trace_.x.resize(n); trace_.x_hat.resize(n);
    trace_.e.resize(n); trace_.f.resize(n); trace_.x_tilde.resize(n);
    trace_.c.resize(gains_.size());
    trace_.c_hat.resize(gains_.size());

    trace_.e_sup.assign(n, 0.0);
    trace_.c_sup = init_.c0;

    // Every agent fires its initial event at t = 0.
    for (int i = 0; i < n; ++i) {
      agents_[i].x_hat = agents_[i].x;
      trig_[i].e = 0.0;
      trig_[i].last_event_time = 0.0;
      trig_[i].event_count = 1;
      trace_.events.push_back(TraceEvent{i + 1, 0.0, 0.0, trig_[i].f_bar});
    }

    record_row();
  }

  double time() const { return static_cast<double>(step_idx_) * scn_.sim.dt; }
  long step_index() const { return step_idx_; }
  long total_steps() const { return total_steps_; }
  bool done() const { return step_idx_ >= total_steps_; }

  const AgentState& agent(int id) const { return agents_[id - 1]; }
  AgentState& agent(int id) { return agents_[id - 1]; }
  const TriggerState& trigger(int id) const { return trig_[id - 1]; }
  const std::vector<EdgeGain>& gains() const { return gains_; }
  const Matrix& adjacency() const { return adj_; }

  void step() {
    const int n = scn_.topology.n;
    const double dt = scn_.sim.dt;
    const double t = time();
    const double t_next = static_cast<double>(step_idx_ + 1) * dt;

    apply_changes_due(t, t);

    const double mu_t = mu(scn_.params, t);

    // Snapshot of broadcast values and gains; every update below reads
    // this consistent pre-step view.
    snapshot_neighbors();

    std::vector<double> u(n), eta_v(n);
    for (int i = 0; i < n; ++i) {
      u[i] = control_input(agents_[i].x_hat, nbrs_view_[i], mu_t);
      eta_v[i] = eta(agents_[i].x_hat, nbrs_view_[i], trig_[i].e, trig_[i].alpha,
                     trig_[i].beta, mu_t);
    }

    for (int i = 0; i < n; ++i)
      step_agent(agents_[i], eval(scn_.signals[i], t_next), u[i], scn_.params.gamma, dt);

    for (std::size_t g = 0; g < gains_.size(); ++g) {
      const Edge& e = gains_[g].edge;
      const double a_ij = adj_(e.first - 1, e.second - 1);
      step_gain(gains_[g], snap_x_hat_[e.first - 1], snap_x_hat_[e.second - 1], a_ij,
                mu_t, dt);
      trace_.c_sup[g] = std::max(trace_.c_sup[g], gains_[g].c);
    }

    for (int i = 0; i < n; ++i) {
      step_trigger(trig_[i], eta_v[i], dt);
      trig_[i].e = measurement_error(agents_[i].x_hat, agents_[i].x);
      trace_.e_sup[i] = std::max(trace_.e_sup[i], std::abs(trig_[i].e));
      FireResult fr = check_and_fire(trig_[i], agents_[i].x, t_next);
      if (fr.fired) {
        agents_[i].x_hat = fr.broadcast;  // visible from the next snapshot
        trace_.events.push_back(TraceEvent{i + 1, t_next, fr.f_pre, trig_[i].f});
      }
    }

    ++step_idx_;
    check_finite();
    if (step_idx_ % scn_.sim.record_every == 0 || done()) record_row();
  }

  Trace run() {
    while (!done()) step();
    return std::move(trace_);
  }

  const Trace& trace() const { return trace_; }

 private:
  void apply_changes_due(double t, double applied_time) {
    bool changed = next_change_ == 0;  // first call builds the adjacency
    while (next_change_ < scn_.topology.changes.size() &&
           scn_.topology.changes[next_change_].time <= t) {
      const EdgeChange& ch = scn_.topology.changes[next_change_];
      trace_.change_log.push_back(AppliedChange{ch.time, applied_time, ch.edge, ch.action});
      ++next_change_;
      changed = true;
    }
    if (changed) {
      adj_ = graph_at(scn_.topology, t);
      rebuild_components();
    }
  }

  void rebuild_components() {
    comps_ = components(adj_);
    comp_of_.assign(scn_.topology.n, 0);
    for (std::size_t k = 0; k < comps_.size(); ++k)
      for (int id : comps_[k]) comp_of_[id - 1] = static_cast<int>(k);
    // Neighbor lists: (neighbor index, gain index) per agent.
    nbrs_.assign(scn_.topology.n, {});
    for (std::size_t g = 0; g < gains_.size(); ++g) {
      const Edge& e = gains_[g].edge;
      if (adj_(e.first - 1, e.second - 1) != 0.0) {
        nbrs_[e.first - 1].push_back({e.second - 1, static_cast<int>(g)});
        nbrs_[e.second - 1].push_back({e.first - 1, static_cast<int>(g)});
      }
    }
    for (auto& lst : nbrs_)
      std::sort(lst.begin(), lst.end());
  }

  void snapshot_neighbors() {
    const int n = scn_.topology.n;
    snap_x_hat_.resize(n);
    for (int i = 0; i < n; ++i) snap_x_hat_[i] = agents_[i].x_hat;
    nbrs_view_.assign(n, {});
    for (int i = 0; i < n; ++i) {
      nbrs_view_[i].reserve(nbrs_[i].size());
      for (auto [j, g] : nbrs_[i])
        nbrs_view_[i].push_back(NeighborView{snap_x_hat_[j], gains_[g].c});
    }
  }

  void check_finite() const {
    for (const AgentState& a : agents_)
      if (!std::isfinite(a.z) || !std::isfinite(a.x) || !std::isfinite(a.x_hat))
        throw NumericalAbort(time() - scn_.sim.dt);
    for (const EdgeGain& g : gains_)
      if (!std::isfinite(g.c) || !std::isfinite(g.c_hat))
        throw NumericalAbort(time() - scn_.sim.dt);
    for (const TriggerState& s : trig_)
      if (!std::isfinite(s.f)) throw NumericalAbort(time() - scn_.sim.dt);
  }

  void record_row() {
    const double t = time();
    trace_.times.push_back(t);
    // Component averages of the reference signals at this instant.
    std::vector<double> comp_avg(comps_.size());
    for (std::size_t k = 0; k < comps_.size(); ++k)
      comp_avg[k] = group_average(scn_.signals, comps_[k], t);
    for (int i = 0; i < scn_.topology.n; ++i) {
      trace_.z[i].push_back(agents_[i].z);
      trace_.x[i].push_back(agents_[i].x);
      trace_.x_hat[i].push_back(agents_[i].x_hat);
      trace_.e[i].push_back(trig_[i].e);
      trace_.f[i].push_back(trig_[i].f);
      trace_.x_tilde[i].push_back(agents_[i].x - comp_avg[comp_of_[i]]);
    }
    for (std::size_t g = 0; g < gains_.size(); ++g) {
      trace_.c[g].push_back(gains_[g].c);
      trace_.c_hat[g].push_back(gains_[g].c_hat);
    }
  }

  Scenario scn_;
  ResolvedInit init_;
  long step_idx_ = 0;
  long total_steps_ = 0;
  std::size_t next_change_ = 0;

  Matrix adj_;
  std::vector<std::vector<int>> comps_;
  std::vector<int> comp_of_;
  std::vector<std::vector<std::pair<int, int>>> nbrs_;

  std::vector<AgentState> agents_;
  std::vector<TriggerState> trig_;
  std::vector<EdgeGain> gains_;

  std::vector<double> snap_x_hat_;
  std::vector<std::vector<NeighborView>> nbrs_view_;

  Trace trace_;
};

inline Trace run(Scenario scenario) { return Engine(std::move(scenario)).run(); }

}  // namespace dacsim
