#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacsim/scenario_io.hpp"
#include "dacsim/sim.hpp"

namespace dacsim {

namespace io_detail {

// Decimal text with 12 significant digits, as used by every CSV column.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace io_detail

// Writes agents.csv, gains.csv, events.csv, and run_header.json into a
// directory (created if needed).
inline void write_trace(const std::filesystem::path& dir, const Trace& trace) {
  namespace fs = std::filesystem;
  using io_detail::fmt;
  fs::create_directories(dir);
  const int n = trace.n_agents();

  {
    std::ofstream out(dir / "agents.csv");
    out << "time";
    for (int i = 1; i <= n; ++i)
      out << ",z_" << i << ",x_" << i << ",xhat_" << i << ",e_" << i << ",f_" << i
          << ",xtilde_" << i;
    out << "\n";
    for (int s = 0; s < trace.n_samples(); ++s) {
      out << fmt(trace.times[s]);
      for (int i = 0; i < n; ++i)
        out << ',' << fmt(trace.z[i][s]) << ',' << fmt(trace.x[i][s]) << ','
            << fmt(trace.x_hat[i][s]) << ',' << fmt(trace.e[i][s]) << ','
            << fmt(trace.f[i][s]) << ',' << fmt(trace.x_tilde[i][s]);
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "gains.csv");
    out << "time";
    for (const Edge& e : trace.edges)
      out << ",c_" << e.first << '_' << e.second << ",chat_" << e.first << '_' << e.second;
    out << "\n";
    for (int s = 0; s < trace.n_samples(); ++s) {
      out << fmt(trace.times[s]);
      for (std::size_t g = 0; g < trace.edges.size(); ++g)
        out << ',' << fmt(trace.c[g][s]) << ',' << fmt(trace.c_hat[g][s]);
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "events.csv");
    out << "agent,time,f_pre,f_post\n";
    for (const TraceEvent& ev : trace.events)
      out << ev.agent << ',' << fmt(ev.time) << ',' << fmt(ev.f_pre) << ','
          << fmt(ev.f_post) << "\n";
  }
  {
    json header;
    header["format"] = "dacsim-trace-1";
    header["prng"] = trace.prng_id;
    header["scenario"] = scenario_to_json(trace.scenario);
    header["resolved"] = {{"z0", trace.init.z0},
                          {"c0", trace.init.c0},
                          {"c_hat0", trace.init.c_hat0}};
    json changes = json::array();
    for (const AppliedChange& ch : trace.change_log)
      changes.push_back({{"scheduled_time", ch.scheduled_time},
                         {"applied_time", ch.applied_time},
                         {"edge", {ch.edge.first, ch.edge.second}},
                         {"action", ch.action == EdgeAction::Add ? "add" : "remove"}});
    header["change_log"] = changes;
    header["suprema"] = {{"e_sup", trace.e_sup}, {"c_sup", trace.c_sup}};
    std::ofstream out(dir / "run_header.json");
    out << header.dump(2) << "\n";
  }
}

inline Trace read_trace(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  using io_detail::split_csv_line;
  Trace trace;

  {
    std::ifstream in(dir / "run_header.json");
    if (!in) throw std::runtime_error("trace: cannot open " + (dir / "run_header.json").string());
    json header = json::parse(in);
    if (header.value("format", "") != "dacsim-trace-1")
      throw std::runtime_error("trace: unknown format in run_header.json");
    trace.prng_id = header.value("prng", "");
    trace.scenario = scenario_from_json(header["scenario"]);
    trace.init.z0 = header["resolved"]["z0"].get<std::vector<double>>();
    trace.init.c0 = header["resolved"]["c0"].get<std::vector<double>>();
    trace.init.c_hat0 = header["resolved"]["c_hat0"].get<std::vector<double>>();
    if (header.contains("suprema")) {
      trace.e_sup = header["suprema"]["e_sup"].get<std::vector<double>>();
      trace.c_sup = header["suprema"]["c_sup"].get<std::vector<double>>();
    }
    for (const auto& ch : header["change_log"]) {
      AppliedChange a;
      a.scheduled_time = ch["scheduled_time"].get<double>();
      a.applied_time = ch["applied_time"].get<double>();
      a.edge = make_edge(ch["edge"][0].get<int>(), ch["edge"][1].get<int>());
      a.action = ch["action"].get<std::string>() == "add" ? EdgeAction::Add : EdgeAction::Remove;
      trace.change_log.push_back(a);
    }
  }

  const int n = trace.scenario.topology.n;
  trace.edges = trace.scenario.topology.base_edges;
  trace.z.resize(n); trace.x.resize(n); trace.x_hat.resize(n);
  trace.e.resize(n); trace.f.resize(n); trace.x_tilde.resize(n);
  trace.c.resize(trace.edges.size());
  trace.c_hat.resize(trace.edges.size());

  {
    std::ifstream in(dir / "agents.csv");
    if (!in) throw std::runtime_error("trace: cannot open " + (dir / "agents.csv").string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cells = split_csv_line(line);
      if (static_cast<int>(cells.size()) != 1 + 6 * n)
        throw std::runtime_error("trace: malformed agents.csv row");
      trace.times.push_back(std::stod(cells[0]));
      for (int i = 0; i < n; ++i) {
        trace.z[i].push_back(std::stod(cells[1 + 6 * i]));
        trace.x[i].push_back(std::stod(cells[2 + 6 * i]));
        trace.x_hat[i].push_back(std::stod(cells[3 + 6 * i]));
        trace.e[i].push_back(std::stod(cells[4 + 6 * i]));
        trace.f[i].push_back(std::stod(cells[5 + 6 * i]));
        trace.x_tilde[i].push_back(std::stod(cells[6 + 6 * i]));
      }
    }
  }
  {
    std::ifstream in(dir / "gains.csv");
    if (!in) throw std::runtime_error("trace: cannot open " + (dir / "gains.csv").string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cells = split_csv_line(line);
      if (cells.size() != 1 + 2 * trace.edges.size())
        throw std::runtime_error("trace: malformed gains.csv row");
      for (std::size_t g = 0; g < trace.edges.size(); ++g) {
        trace.c[g].push_back(std::stod(cells[1 + 2 * g]));
        trace.c_hat[g].push_back(std::stod(cells[2 + 2 * g]));
      }
    }
  }
  {
    std::ifstream in(dir / "events.csv");
    if (!in) throw std::runtime_error("trace: cannot open " + (dir / "events.csv").string());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cells = split_csv_line(line);
      if (cells.size() != 4) throw std::runtime_error("trace: malformed events.csv row");
      TraceEvent ev;
      ev.agent = std::stoi(cells[0]);
      ev.time = std::stod(cells[1]);
      ev.f_pre = std::stod(cells[2]);
      ev.f_post = std::stod(cells[3]);
      trace.events.push_back(ev);
    }
  }
  return trace;
}

}  // namespace dacsim
