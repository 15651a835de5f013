#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dacsim/sim.hpp"

namespace dacsim {

using json = nlohmann::json;

struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ScenarioParseError("scenario " + where + ": " + what);
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

inline double get_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

inline ValueSpec parse_value_spec(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array()) {
    std::vector<double> list;
    for (const auto& x : v) {
      if (!x.is_number()) fail(where, "value list entries must be numbers");
      list.push_back(x.get<double>());
    }
    return list;
  }
  if (v.is_object()) {
    reject_unknown(v, {"uniform"}, where);
    if (!v.contains("uniform") || !v["uniform"].is_array() || v["uniform"].size() != 2)
      fail(where, "expected {\"uniform\": [lo, hi]}");
    RandomRange r{v["uniform"][0].get<double>(), v["uniform"][1].get<double>()};
    if (!(r.lo <= r.hi)) fail(where, "uniform range must have lo <= hi");
    return r;
  }
  fail(where, "expected number, list, or {\"uniform\": [lo, hi]}");
}

inline ReferenceSignal parse_signal(const json& v, const std::string& where) {
  if (!v.is_object() || !v.contains("kind")) fail(where, "signal needs a 'kind'");
  const std::string kind = v["kind"].get<std::string>();
  if (kind == "sinusoid") {
    reject_unknown(v, {"kind", "amplitude", "frequency", "phase"}, where);
    Sinusoid s;
    s.amplitude = get_number(v, "amplitude", where);
    s.frequency = get_number(v, "frequency", where);
    const std::string phase = v.value("phase", "sin");
    if (phase != "sin" && phase != "cos") fail(where, "phase must be 'sin' or 'cos'");
    s.cosine = phase == "cos";
    return s;
  }
  if (kind == "constant") {
    reject_unknown(v, {"kind", "value"}, where);
    return Constant{get_number(v, "value", where)};
  }
  if (kind == "piecewise_linear") {
    reject_unknown(v, {"kind", "knots"}, where);
    if (!v.contains("knots") || !v["knots"].is_array()) fail(where, "missing knots list");
    PiecewiseLinear pw;
    for (const auto& k : v["knots"]) {
      if (!k.is_array() || k.size() != 2) fail(where, "knots must be [t, v] pairs");
      pw.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return pw;
  }
  fail(where, "unknown signal kind '" + kind + "'");
}

inline TriggerParams parse_trigger(const json& v, const std::string& where) {
  reject_unknown(v, {"f_bar", "delta", "alpha", "beta"}, where);
  TriggerParams t;
  t.f_bar = get_number(v, "f_bar", where);
  t.delta = get_number(v, "delta", where);
  t.alpha = get_number(v, "alpha", where);
  t.beta = get_number(v, "beta", where);
  return t;
}

}  // namespace io_detail

inline Scenario scenario_from_json(const json& doc) {
  using namespace io_detail;
  if (!doc.is_object()) fail("document", "expected a JSON object");
  reject_unknown(doc, {"name", "agents", "topology", "signals", "algorithm", "trigger",
                       "gains", "z0", "sim"},
                 "document");
  Scenario s;
  s.name = doc.value("name", "");
  if (!doc.contains("agents") || !doc["agents"].is_number_integer())
    fail("agents", "expected an integer agent count");
  s.topology.n = doc["agents"].get<int>();

  if (!doc.contains("topology")) fail("topology", "missing section");
  const json& topo = doc["topology"];
  reject_unknown(topo, {"edges", "changes"}, "topology");
  if (!topo.contains("edges") || !topo["edges"].is_array()) fail("topology", "missing edges");
  for (const auto& e : topo["edges"]) {
    if (!e.is_array() || e.size() != 2) fail("topology.edges", "edges must be [a, b] pairs");
    s.topology.base_edges.push_back(make_edge(e[0].get<int>(), e[1].get<int>()));
  }
  if (topo.contains("changes")) {
    for (const auto& c : topo["changes"]) {
      reject_unknown(c, {"time", "edge", "action"}, "topology.changes");
      EdgeChange ch;
      ch.time = get_number(c, "time", "topology.changes");
      if (!c.contains("edge") || !c["edge"].is_array() || c["edge"].size() != 2)
        fail("topology.changes", "change needs an [a, b] edge");
      ch.edge = make_edge(c["edge"][0].get<int>(), c["edge"][1].get<int>());
      const std::string act = c.value("action", "");
      if (act == "add") ch.action = EdgeAction::Add;
      else if (act == "remove") ch.action = EdgeAction::Remove;
      else fail("topology.changes", "action must be 'add' or 'remove'");
      s.topology.changes.push_back(ch);
    }
    std::stable_sort(s.topology.changes.begin(), s.topology.changes.end(),
                     [](const EdgeChange& a, const EdgeChange& b) {
                       return a.time < b.time || (a.time == b.time && a.edge < b.edge);
                     });
  }

  if (!doc.contains("signals")) fail("signals", "missing section");
  if (doc["signals"].is_array()) {
    int i = 0;
    for (const auto& v : doc["signals"])
      s.signals.push_back(parse_signal(v, "signals[" + std::to_string(i++) + "]"));
  } else {
    ReferenceSignal sig = parse_signal(doc["signals"], "signals");
    s.signals.assign(static_cast<std::size_t>(s.topology.n), sig);
  }

  if (!doc.contains("algorithm")) fail("algorithm", "missing section");
  const json& alg = doc["algorithm"];
  reject_unknown(alg, {"gamma", "mu1", "mu2"}, "algorithm");
  s.params.gamma = get_number(alg, "gamma", "algorithm");
  s.params.mu1 = get_number(alg, "mu1", "algorithm");
  s.params.mu2 = get_number(alg, "mu2", "algorithm");

  if (!doc.contains("trigger")) fail("trigger", "missing section");
  if (doc["trigger"].is_array()) {
    int i = 0;
    for (const auto& v : doc["trigger"])
      s.trigger_params.push_back(parse_trigger(v, "trigger[" + std::to_string(i++) + "]"));
  } else {
    TriggerParams tp = parse_trigger(doc["trigger"], "trigger");
    s.trigger_params.assign(static_cast<std::size_t>(s.topology.n), tp);
  }

  if (!doc.contains("gains")) fail("gains", "missing section");
  const json& g = doc["gains"];
  reject_unknown(g, {"sigma", "nu", "c0", "c_hat0"}, "gains");
  s.gain_params.sigma = get_number(g, "sigma", "gains");
  s.gain_params.nu = get_number(g, "nu", "gains");
  if (!g.contains("c0")) fail("gains", "missing c0");
  if (!g.contains("c_hat0")) fail("gains", "missing c_hat0");
  s.gain_params.c0 = parse_value_spec(g["c0"], "gains.c0");
  s.gain_params.c_hat0 = parse_value_spec(g["c_hat0"], "gains.c_hat0");

  if (doc.contains("z0")) s.z0 = parse_value_spec(doc["z0"], "z0");

  if (!doc.contains("sim")) fail("sim", "missing section");
  const json& sim = doc["sim"];
  reject_unknown(sim, {"dt", "horizon", "seed", "record_every"}, "sim");
  s.sim.dt = get_number(sim, "dt", "sim");
  s.sim.horizon = get_number(sim, "horizon", "sim");
  if (!sim.contains("seed") || !sim["seed"].is_number_unsigned())
    fail("sim", "seed must be a non-negative integer");
  s.sim.seed = sim["seed"].get<std::uint64_t>();
  s.sim.record_every = sim.value("record_every", 1);

  validate_scenario(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError("scenario file " + path + ": " + e.what());
  }
  return scenario_from_json(doc);
}

inline json value_spec_to_json(const ValueSpec& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* list = std::get_if<std::vector<double>>(&v)) return *list;
  const auto& r = std::get<RandomRange>(v);
  return json{{"uniform", {r.lo, r.hi}}};
}

inline json signal_to_json(const ReferenceSignal& sig) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sinusoid>) {
          return json{{"kind", "sinusoid"},
                      {"amplitude", s.amplitude},
                      {"frequency", s.frequency},
                      {"phase", s.cosine ? "cos" : "sin"}};
        } else if constexpr (std::is_same_v<T, Constant>) {
          return json{{"kind", "constant"}, {"value", s.value}};
        } else {
          json knots = json::array();
          for (const auto& [t, v] : s.knots) knots.push_back({t, v});
          return json{{"kind", "piecewise_linear"}, {"knots", knots}};
        }
      },
      sig);
}

inline json scenario_to_json(const Scenario& s) {
  json topo;
  topo["edges"] = json::array();
  for (const Edge& e : s.topology.base_edges) topo["edges"].push_back({e.first, e.second});
  topo["changes"] = json::array();
  for (const EdgeChange& c : s.topology.changes)
    topo["changes"].push_back({{"time", c.time},
                               {"edge", {c.edge.first, c.edge.second}},
                               {"action", c.action == EdgeAction::Add ? "add" : "remove"}});
  json signals = json::array();
  for (const ReferenceSignal& sig : s.signals) signals.push_back(signal_to_json(sig));
  json trigger = json::array();
  for (const TriggerParams& tp : s.trigger_params)
    trigger.push_back({{"f_bar", tp.f_bar}, {"delta", tp.delta},
                       {"alpha", tp.alpha}, {"beta", tp.beta}});
  return json{
      {"name", s.name},
      {"agents", s.topology.n},
      {"topology", topo},
      {"signals", signals},
      {"algorithm", {{"gamma", s.params.gamma}, {"mu1", s.params.mu1}, {"mu2", s.params.mu2}}},
      {"trigger", trigger},
      {"gains", {{"sigma", s.gain_params.sigma}, {"nu", s.gain_params.nu},
                 {"c0", value_spec_to_json(s.gain_params.c0)},
                 {"c_hat0", value_spec_to_json(s.gain_params.c_hat0)}}},
      {"z0", value_spec_to_json(s.z0)},
      {"sim", {{"dt", s.sim.dt}, {"horizon", s.sim.horizon}, {"seed", s.sim.seed},
               {"record_every", s.sim.record_every}}}};
}

}  // namespace dacsim
