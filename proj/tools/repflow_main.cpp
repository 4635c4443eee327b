// repflow: model curves, oracle checks, single simulations and load sweeps.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "repflow/experiments.hpp"
#include "repflow/simulator.hpp"
#include "repflow/workload.hpp"

namespace fs = std::filesystem;
using namespace repflow;

namespace {

constexpr int kExitIncomplete = 3;
constexpr int kExitCellFailed = 4;
constexpr int kExitOracleFailed = 5;

struct ScenarioFlags {
  std::string preset = "desk-4pod";
  std::string scenario_file;
  std::optional<std::string> workload;
  std::optional<unsigned> pods;
  std::optional<double> link_mbps;
  std::optional<double> link_delay_us;
  std::optional<std::string> buffer_pkts;
  std::optional<std::string> replication;
  std::optional<std::string> protocol;
  std::optional<double> load;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;  // key=value

  void attach(CLI::App* app, bool per_run) {
    app->add_option("--preset", preset, "Named preset: " + join(preset_names()))->capture_default_str();
    app->add_option("--scenario", scenario_file, "Scenario file applied on top of the preset");
    app->add_option("--workload", workload, "Builtin distribution name or CDF file path");
    app->add_option("--pods", pods, "Fat-tree pod count");
    app->add_option("--link-mbps", link_mbps, "Link rate");
    app->add_option("--link-delay-us", link_delay_us, "Per-link propagation delay");
    app->add_option("--buffer-pkts", buffer_pkts, "Switch buffer per port, or 'unlimited'");
    app->add_option("--duration", duration, "Traffic generation time in seconds");
    app->add_option("--set", settings, "Override any scenario field, key=value (repeatable)");
    if (per_run) {
      app->add_option("--replication", replication, "off | on");
      app->add_option("--protocol", protocol, "tcp | dctcp_like");
      app->add_option("--load", load, "Offered load per host uplink");
      app->add_option("--seed", seed, "Scenario seed");
    }
  }

  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  }

  ScenarioConfig resolve() const {
    ScenarioConfig c = repflow::preset(preset);
    if (!scenario_file.empty()) c = load_scenario(scenario_file, c);
    auto put = [&c](std::string_view key, const std::string& value) { c.set(key, value); };
    if (workload) put("workload", *workload);
    if (pods) put("pods", std::to_string(*pods));
    if (link_mbps) put("link_mbps", format_number(*link_mbps));
    if (link_delay_us) put("link_delay_us", format_number(*link_delay_us));
    if (buffer_pkts) put("buffer_pkts", *buffer_pkts);
    if (duration) put("duration", format_number(*duration));
    if (replication) put("replication", *replication);
    if (protocol) put("protocol", *protocol);
    if (load) put("load", format_number(*load));
    if (seed) put("seed", std::to_string(*seed));
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      put(kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow replication experiments over a packet-level data center simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = "out";
  bool show_config = false;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_flag("--show-config", show_config, "Print the effective configuration and exit");

  // model
  auto* model = app.add_subcommand("model", "Analytic FCT curves over a load grid");
  std::string model_workload = "web_search";
  std::optional<double> model_epsilon;
  analytic::ModelParams model_params;
  double grid_first = 0.05, grid_last = 0.9, grid_step = 0.05;
  model->add_option("--workload", model_workload, "Builtin distribution name or CDF file path")
      ->capture_default_str();
  model->add_option("--epsilon", model_epsilon, "Short-flow byte fraction (default: from the workload)");
  model->add_option("--initial-window", model_params.initial_window)->capture_default_str();
  model->add_option("--max-window", model_params.max_window)->capture_default_str();
  model->add_option("--threshold", model_params.large_threshold, "Short/large boundary in packets")
      ->capture_default_str();
  model->add_option("--load-min", grid_first)->capture_default_str();
  model->add_option("--load-max", grid_last)->capture_default_str();
  model->add_option("--load-step", grid_step)->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one scenario; writes flows.csv and summary.csv");
  ScenarioFlags sim_flags;
  sim_flags.attach(simulate, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Seeds x loads x schemes, aggregated into sweep.csv");
  ScenarioFlags sweep_flags;
  sweep_flags.attach(sweep, false);
  SweepSpec spec;
  unsigned seed_count = 10;
  std::uint64_t first_seed = 1;
  sweep->add_option("--loads", spec.loads, "Offered loads")->delimiter(',')->capture_default_str();
  sweep->add_option("--schemes", spec.schemes, "tcp, repflow, dctcp_like, repflow_dctcp")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--workloads", spec.workloads)->delimiter(',')->capture_default_str();
  sweep->add_option("--seeds", seed_count, "Number of seeds")->capture_default_str();
  sweep->add_option("--first-seed", first_seed)->capture_default_str();
  sweep->add_option("--jobs", spec.jobs, "Parallel runs (default: $REPFLOW_JOBS or core count)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Queueing oracle checks against the closed forms");
  OracleSpec ospec;
  oracle_cmd->add_option("--arrivals", ospec.n_arrivals)->capture_default_str();
  oracle_cmd->add_option("--burst", ospec.burst_size)->capture_default_str();
  oracle_cmd->add_option("--epsilon", ospec.epsilon)->capture_default_str();
  oracle_cmd->add_option("--seed", ospec.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path dir = out_dir;

    if (*model) {
      const auto dist = resolve_distribution(model_workload);
      ModelSpec ms{model_params, model_epsilon, load_grid(grid_first, grid_last, grid_step)};
      if (show_config) {
        std::cout << app.config_to_str(true, false);
        return 0;
      }
      auto out = open_output(dir, "model.csv");
      write_model_csv(out, model_curves(dist, ms));
      std::cerr << "wrote " << (dir / "model.csv").string() << '\n';
      return 0;
    }

    if (*simulate) {
      const auto config = sim_flags.resolve();
      if (show_config) {
        write_scenario(std::cout, config);
        return 0;
      }
      const auto result = run(config);
      {
        auto flows = open_output(dir, "flows.csv");
        write_flow_csv(flows, result.records);
        auto summary = open_output(dir, "summary.csv");
        summary << kSummaryCsvHeader << '\n';
        if (!result.records.empty()) {
          const auto s = summarize(result.records, config.short_flow_threshold);
          write_summary_rows(summary, scheme_name(config), config.workload, config.load, s,
                             config.replication == ReplicationMode::short_flows, 1);
        }
      }
      const auto& st = result.stats;
      std::cerr << result.records.size() << " flows, " << st.incomplete << " incomplete, " << st.events
                << " events, " << st.data_dropped << " drops, " << st.retransmitted << " retransmitted of " << st.data_injected
                << " sent, " << st.timeouts << " timeouts\n";
      return st.incomplete > 0 ? kExitIncomplete : 0;
    }

    if (*sweep) {
      spec.base = sweep_flags.resolve();
      spec.seeds.clear();
      for (unsigned i = 0; i < seed_count; ++i) spec.seeds.push_back(first_seed + i);
      spec.validate();
      if (show_config) {
        write_scenario(std::cout, spec.base);
        std::cout << app.config_to_str(true, false);
        return 0;
      }
      const auto result = run_sweep(spec);
      auto out = open_output(dir, "sweep.csv");
      write_sweep_csv(out, result.rows);
      for (const auto& c : result.cells)
        if (!c.ok)
          std::cerr << "cell failed: " << c.scheme << ' ' << c.workload << " load=" << c.load
                    << " seed=" << c.seed << ": " << c.error << '\n';
      std::cerr << "wrote " << (dir / "sweep.csv").string() << " (" << result.cells.size() << " runs, "
                << result.failures << " failed)\n";
      return result.failures ? kExitCellFailed : 0;
    }

    if (*oracle_cmd) {
      if (show_config) {
        std::cout << app.config_to_str(true, false);
        return 0;
      }
      const auto checks = oracle_report(ospec);
      auto out = open_output(dir, "oracle.csv");
      write_oracle_csv(out, checks);
      write_oracle_csv(std::cout, checks);
      for (const auto& c : checks)
        if (c.pass && !*c.pass) return kExitOracleFailed;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
