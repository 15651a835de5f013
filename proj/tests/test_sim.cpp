#include <catch_amalgamated.hpp>

#include <cmath>

#include "dacsim/scenario_io.hpp"
#include "dacsim/sim.hpp"
#include "oracle_two_agent.hpp"

using namespace dacsim;
using Catch::Matchers::WithinAbs;

namespace {

std::string scenario_path(const char* name) {
  return std::string(DACSIM_SCENARIO_DIR) + "/" + name;
}

Scenario single_agent_scenario() {
  Scenario s;
  s.topology.n = 1;
  s.signals = {Constant{0.0}};
  s.params = {1.0, 1.0, 0.01};
  s.trigger_params = {TriggerParams{1.0, 1.0, 0.5, 1.0}};
  s.gain_params = GainParams{1.0, 1.0, 1.0, 1.0};
  s.z0 = std::vector<double>{1.0};
  s.sim = {1e-3, 0.1, 0, 1};
  return s;
}

}  // namespace

TEST_CASE("initialization resolves seeded draws and fires initial events") {
  Scenario scn = load_scenario(scenario_path("paper_sec4.json"));
  Engine eng(scn);
  const Trace& tr = eng.trace();

  REQUIRE(tr.init.c0.size() == 16);
  for (double c0 : tr.init.c0) {
    CHECK(c0 >= 60.0);
    CHECK(c0 < 80.0);
  }
  for (double ch0 : tr.init.c_hat0) CHECK(ch0 == 50.0);

  REQUIRE(tr.events.size() == 8);
  for (const TraceEvent& ev : tr.events) {
    CHECK(ev.time == 0.0);
    CHECK(ev.f_post == 10.0);
  }
  for (int i = 1; i <= 8; ++i) {
    const AgentState& a = eng.agent(i);
    CHECK(a.x == a.z + eval(scn.signals[i - 1], 0.0));
    CHECK(a.x_hat == a.x);
  }

  Engine eng2(scn);
  for (int i = 1; i <= 8; ++i) {
    CHECK(eng.agent(i).z == eng2.agent(i).z);
    CHECK(eng.agent(i).x == eng2.agent(i).x);
  }
  for (std::size_t g = 0; g < eng.gains().size(); ++g)
    CHECK(eng.gains()[g].c == eng2.gains()[g].c);
}

TEST_CASE("gain initialization violations are rejected with the edge") {
  Scenario scn = load_scenario(scenario_path("two_agent_oracle.json"));
  scn.gain_params.c0 = 0.5;
  scn.gain_params.c_hat0 = 0.5;
  CHECK_THROWS_WITH(Engine(scn), Catch::Matchers::ContainsSubstring("(1,2)"));
}

TEST_CASE("constant equal broadcasts are a fixed point of the estimate") {
  Scenario s;
  s.topology.n = 3;
  s.topology.base_edges = {make_edge(1, 2), make_edge(2, 3)};
  s.signals.assign(3, Constant{5.0});
  s.params = {1.0, 1.0, 0.01};
  s.trigger_params.assign(3, TriggerParams{1.0, 1.0, 0.5, 1.0});
  s.gain_params = GainParams{1.0, 1.0, 2.0, 2.0};
  s.z0 = 0.0;
  s.sim = {1e-3, 0.05, 0, 1};
  Engine eng(s);
  const double f0 = eng.trigger(1).f;
  for (int k = 0; k < 10; ++k) eng.step();
  for (int i = 1; i <= 3; ++i) {
    CHECK(eng.agent(i).z == 0.0);
    CHECK(eng.agent(i).x == 5.0);
    CHECK(eng.agent(i).x_hat == 5.0);
    // only the trigger function moves, by exactly delta per step
    CHECK_THAT(eng.trigger(i).f, WithinAbs(f0 - 10 * 1e-3, 1e-15));
  }
  for (const EdgeGain& g : eng.gains()) {
    CHECK(g.c == 2.0);
    CHECK(g.c_hat == 2.0);
  }
}

TEST_CASE("single agent decays geometrically") {
  Engine eng(single_agent_scenario());
  const double dt = 1e-3;
  for (int k = 1; k <= 100; ++k) {
    eng.step();
    CHECK_THAT(eng.agent(1).z, WithinAbs(std::pow(1.0 - dt, k), 1e-12));
  }
}

TEST_CASE("engine matches the independent two-agent recursion") {
  Scenario scn = load_scenario(scenario_path("two_agent_oracle.json"));
  Engine eng(scn);

  oracle::Params p{1.0, 1.0, 0.1, 0.05, 1.0, 0.5, 1.0, 1.0, 1.0, 1e-3};
  auto r1 = [](double t) { return std::sin(0.5 * t); };
  auto r2 = [](double) { return 2.0; };
  oracle::State st = oracle::initial_state(p, 1.0, -2.0, 2.0, 1.5, r1, r2);

  for (long k = 0; k < 3; ++k) {
    eng.step();
    oracle::step(st, p, k, r1, r2);
    CHECK_THAT(eng.agent(1).z, WithinAbs(st.z1, 1e-12));
    CHECK_THAT(eng.agent(2).z, WithinAbs(st.z2, 1e-12));
    CHECK_THAT(eng.agent(1).x, WithinAbs(st.x1, 1e-12));
    CHECK_THAT(eng.agent(2).x, WithinAbs(st.x2, 1e-12));
    CHECK_THAT(eng.agent(1).x_hat, WithinAbs(st.xh1, 1e-12));
    CHECK_THAT(eng.agent(2).x_hat, WithinAbs(st.xh2, 1e-12));
    CHECK_THAT(eng.trigger(1).f, WithinAbs(st.f1, 1e-12));
    CHECK_THAT(eng.trigger(2).f, WithinAbs(st.f2, 1e-12));
    CHECK_THAT(eng.gains()[0].c, WithinAbs(st.c, 1e-12));
    CHECK_THAT(eng.gains()[0].c_hat, WithinAbs(st.ch, 1e-12));
  }
}

TEST_CASE("same seed reproduces the trace exactly") {
  Scenario scn = load_scenario(scenario_path("two_agent_oracle.json"));
  const Trace a = run(scn);
  const Trace b = run(scn);
  REQUIRE(a.times == b.times);
  CHECK(a.z == b.z);
  CHECK(a.x == b.x);
  CHECK(a.x_hat == b.x_hat);
  CHECK(a.f == b.f);
  CHECK(a.c == b.c);
  CHECK(a.c_hat == b.c_hat);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].agent == b.events[i].agent);
    CHECK(a.events[i].time == b.events[i].time);
  }
}

TEST_CASE("horizon equal to dt runs exactly one step") {
  Scenario s = single_agent_scenario();
  s.sim.horizon = s.sim.dt;
  const Trace tr = run(s);
  REQUIRE(tr.times.size() == 2);  // initial sample plus one step
  CHECK(tr.times.back() == s.sim.dt);
}

TEST_CASE("broadcasts stay constant between events") {
  Scenario scn = load_scenario(scenario_path("two_agent_oracle.json"));
  const Trace tr = run(scn);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> ev_times;
    for (const TraceEvent& ev : tr.events)
      if (ev.agent == i + 1) ev_times.push_back(ev.time);
    for (int s = 1; s < tr.n_samples(); ++s) {
      const bool crossed = std::any_of(ev_times.begin(), ev_times.end(), [&](double t) {
        return t > tr.times[s - 1] && t <= tr.times[s];
      });
      if (!crossed) CHECK(tr.x_hat[i][s] == tr.x_hat[i][s - 1]);
    }
  }
}

TEST_CASE("components evolve independently after a split") {
  Scenario scn = load_scenario(scenario_path("paper_sec4.json"));
  scn.sim.horizon = 7.0;
  Engine a(scn);
  Engine b(scn);
  const long split_step = 60001;  // safely past the 6 s failure
  while (a.step_index() < split_step) {
    a.step();
    b.step();
  }
  // Kick agent 5 in one engine only; subgroup {1..4} must not notice.
  b.agent(5).z += 1.0;
  b.agent(5).x += 1.0;
  while (!a.done()) {
    a.step();
    b.step();
  }
  const Trace& ta = a.trace();
  const Trace& tb = b.trace();
  for (int i = 0; i < 4; ++i) {
    CHECK(ta.z[i] == tb.z[i]);
    CHECK(ta.x[i] == tb.x[i]);
    CHECK(ta.x_hat[i] == tb.x_hat[i]);
    CHECK(ta.f[i] == tb.f[i]);
  }
  // and the perturbed subgroup did diverge
  CHECK(ta.z[4] != tb.z[4]);
}

TEST_CASE("non-finite states abort with a diagnostic") {
  Scenario s;
  s.topology.n = 2;
  s.topology.base_edges = {make_edge(1, 2)};
  s.signals.assign(2, Constant{0.0});
  s.params = {1.0, 1.0, 0.01};
  s.trigger_params.assign(2, TriggerParams{1.0, 1.0, 0.5, 1.0});
  s.gain_params = GainParams{1e9, 1e9, 2.0, 1.0};  // wildly unstable at dt = 1
  s.z0 = 0.0;
  s.sim = {1.0, 40.0, 0, 1};
  CHECK_THROWS_AS(run(s), NumericalAbort);
}
