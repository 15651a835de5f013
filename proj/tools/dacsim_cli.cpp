// dacsim: run, analyze and verify event-based dynamic average consensus
// simulations described by JSON scenario files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dacsim/analysis.hpp"
#include "dacsim/scenario_io.hpp"
#include "dacsim/sim.hpp"
#include "dacsim/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFail = 3;

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override, std::optional<int> record_every) {
  dacsim::Scenario scn;
  try {
    scn = dacsim::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_override) scn.sim.seed = *seed_override;
  if (record_every) scn.sim.record_every = *record_every;
  try {
    dacsim::Trace trace = dacsim::run(std::move(scn));
    dacsim::write_trace(out_dir, trace);
    std::cout << "wrote trace (" << trace.n_samples() << " samples, "
              << trace.events.size() << " events) to " << out_dir << "\n";
  } catch (const dacsim::NumericalAbort& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_stats(const std::string& trace_dir) {
  dacsim::Trace trace;
  try {
    trace = dacsim::read_trace(trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const dacsim::IntervalStats st = dacsim::interval_stats(trace);
  std::printf("%-6s %12s %12s %12s %8s %12s %12s\n", "agent", "low [s]", "low [1e-4s]",
              "min [1e-4s]", "total", "eta_bar", "e_bar");
  for (std::size_t i = 0; i < st.per_agent.size(); ++i) {
    const dacsim::AgentIntervalStats& a = st.per_agent[i];
    char min_buf[32];
    if (a.min)
      std::snprintf(min_buf, sizeof min_buf, "%.4g", *a.min * 1e4);
    else
      std::snprintf(min_buf, sizeof min_buf, "n/a");
    std::printf("%-6zu %12.6g %12.4g %12s %8ld %12.6g %12.6g\n", i + 1, a.low, a.low * 1e4,
                min_buf, a.total, a.eta_bar, a.e_bar);
  }
  return kExitOk;
}

int cmd_verify(const std::string& trace_dir) {
  dacsim::Trace trace;
  try {
    trace = dacsim::read_trace(trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  const dacsim::VerificationReport rep = dacsim::verify_trace(trace);
  std::cout << dacsim::format_report(rep);
  return rep.all_pass() ? kExitOk : kExitVerifyFail;
}

int cmd_export_plots(const std::string& trace_dir, const std::string& out_dir) {
  using dacsim::io_detail::fmt;
  dacsim::Trace trace;
  try {
    trace = dacsim::read_trace(trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  fs::create_directories(out_dir);
  const dacsim::Scenario& scn = trace.scenario;
  const int n = trace.n_agents();

  // Subgroups are fixed by the final topology; before a split every
  // subgroup average coincides with the global average.
  const dacsim::Matrix final_adj = dacsim::graph_at(scn.topology, trace.times.back());
  const auto groups = dacsim::components(final_adj);

  auto group_avgs_at = [&](double t) {
    const dacsim::Matrix adj = dacsim::graph_at(scn.topology, t);
    const auto comps = dacsim::components(adj);
    std::vector<int> comp_of(n, 0);
    for (std::size_t k = 0; k < comps.size(); ++k)
      for (int id : comps[k]) comp_of[id - 1] = static_cast<int>(k);
    std::vector<double> out;
    for (const auto& grp : groups) {
      const auto& comp = comps[comp_of[grp.front() - 1]];
      out.push_back(dacsim::group_average(scn.signals, comp, t));
    }
    return out;
  };

  auto open_with = [&](const char* file, const std::string& header) {
    std::ofstream out(fs::path(out_dir) / file);
    out << header << "\n";
    return out;
  };

  {
    std::string h = "time";
    for (int i = 1; i <= n; ++i) h += ",r_" + std::to_string(i);
    for (std::size_t g = 1; g <= groups.size(); ++g) h += ",rbar_" + std::to_string(g);
    std::ofstream f3 = open_with("fig3_references.csv", h);
    h = "time";
    for (int i = 1; i <= n; ++i) h += ",x_" + std::to_string(i);
    for (std::size_t g = 1; g <= groups.size(); ++g) h += ",rbar_" + std::to_string(g);
    std::ofstream f4 = open_with("fig4_estimates.csv", h);
    for (int s = 0; s < trace.n_samples(); ++s) {
      const double t = trace.times[s];
      const std::vector<double> avgs = group_avgs_at(t);
      f3 << fmt(t);
      f4 << fmt(t);
      for (int i = 0; i < n; ++i) f3 << ',' << fmt(dacsim::eval(scn.signals[i], t));
      for (int i = 0; i < n; ++i) f4 << ',' << fmt(trace.x[i][s]);
      for (double a : avgs) {
        f3 << ',' << fmt(a);
        f4 << ',' << fmt(a);
      }
      f3 << "\n";
      f4 << "\n";
    }
  }
  {
    std::string h = "time";
    for (int i = 1; i <= n; ++i) h += ",xtilde_" + std::to_string(i);
    std::ofstream f5 = open_with("fig5_estimation_errors.csv", h);
    for (int s = 0; s < trace.n_samples(); ++s) {
      f5 << fmt(trace.times[s]);
      for (int i = 0; i < n; ++i) f5 << ',' << fmt(trace.x_tilde[i][s]);
      f5 << "\n";
    }
  }
  {
    std::string h = "time";
    for (const dacsim::Edge& e : trace.edges) {
      h += ",c_" + std::to_string(e.first) + "_" + std::to_string(e.second);
      h += ",chat_" + std::to_string(e.first) + "_" + std::to_string(e.second);
    }
    std::ofstream f6 = open_with("fig6_gains.csv", h);
    for (int s = 0; s < trace.n_samples(); ++s) {
      f6 << fmt(trace.times[s]);
      for (std::size_t g = 0; g < trace.edges.size(); ++g)
        f6 << ',' << fmt(trace.c[g][s]) << ',' << fmt(trace.c_hat[g][s]);
      f6 << "\n";
    }
  }
  {
    std::string h = "time";
    for (int i = 1; i <= n; ++i) h += ",f_" + std::to_string(i);
    std::ofstream f7 = open_with("fig7_trigger_functions.csv", h);
    for (int s = 0; s < trace.n_samples(); ++s) {
      f7 << fmt(trace.times[s]);
      for (int i = 0; i < n; ++i) f7 << ',' << fmt(trace.f[i][s]);
      f7 << "\n";
    }
  }
  std::cout << "wrote figure CSVs to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based dynamic average consensus simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, trace_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> record_every;

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write trace CSVs");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output trace directory")->required();
  run->add_option("--seed", seed_override, "Override the scenario seed");
  run->add_option("--record-every", record_every, "Record every k-th step");

  CLI::App* stats = app.add_subcommand("stats", "Per-agent inter-event statistics");
  stats->add_option("trace", trace_dir, "Trace directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "Run all verification checks");
  verify->add_option("trace", trace_dir, "Trace directory")->required();

  std::string plots_out;
  CLI::App* plots = app.add_subcommand("export-plots", "Emit per-figure CSVs");
  plots->add_option("trace", trace_dir, "Trace directory")->required();
  plots->add_option("--out", plots_out, "Output directory (default: trace directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;  // --help is not an error
  }

  if (run->parsed()) return cmd_run(scenario_path, out_dir, seed_override, record_every);
  if (stats->parsed()) return cmd_stats(trace_dir);
  if (verify->parsed()) return cmd_verify(trace_dir);
  if (plots->parsed())
    return cmd_export_plots(trace_dir, plots_out.empty() ? trace_dir : plots_out);
  return kExitUsage;
}
