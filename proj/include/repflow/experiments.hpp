#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "repflow/analytic.hpp"
#include "repflow/metrics.hpp"
#include "repflow/oracle.hpp"
#include "repflow/scenario.hpp"

namespace repflow {

// ---- model curves ---------------------------------------------------------

struct ModelPoint {
  double load = 0.0;
  std::string curve;
  std::optional<double> value;  // empty where the formula is unstable
};

struct ModelSpec {
  analytic::ModelParams params;            // load/epsilon fields are ignored
  std::optional<double> epsilon_override;  // default: measured from the distribution
  std::vector<double> loads;
};

std::vector<double> load_grid(double first, double last, double step);

// The eight curves (short/large x mean/p99 x tcp/repflow) plus
// short_mean_queueing_ratio = (repflow - 1) / (tcp - 1) of the short mean.
std::vector<ModelPoint> model_curves(const FlowSizeDistribution& dist, const ModelSpec& spec);
void write_model_csv(std::ostream& out, const std::vector<ModelPoint>& points);

// ---- oracle validation ----------------------------------------------------

struct OracleCheck {
  std::string experiment;
  std::string parameter;
  double analytic = 0.0;
  double empirical = 0.0;
  std::string criterion;
  std::optional<bool> pass;  // empty for report-only rows
};

struct OracleSpec {
  double burst_size = 44.0;
  double epsilon = 0.05;
  std::uint64_t n_arrivals = 1'000'000;
  std::uint64_t seed = 1;
};

std::vector<OracleCheck> oracle_report(const OracleSpec& spec);
void write_oracle_csv(std::ostream& out, const std::vector<OracleCheck>& checks);

// ---- simulation sweeps ----------------------------------------------------

struct Scheme {
  std::string name;
  Protocol protocol = Protocol::tcp;
  ReplicationMode replication = ReplicationMode::off;
};

// tcp, repflow, dctcp_like, repflow_dctcp
Scheme scheme_by_name(const std::string& name);
std::string scheme_name(const ScenarioConfig& config);

struct SweepSpec {
  ScenarioConfig base;
  std::vector<double> loads = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<std::string> schemes = {"tcp", "repflow"};
  std::vector<std::string> workloads = {"web_search"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  unsigned jobs = 0;  // 0: REPFLOW_JOBS, else hardware concurrency

  void validate() const;
};

struct SweepCell {
  std::string scheme;
  std::string workload;
  double load = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  FctSummary summary;
  double replica_pkts = 0.0;
  double logical_pkts = 0.0;
  std::uint64_t incomplete = 0;
};

struct SweepRow {
  std::string scheme;
  std::string workload;
  double load = 0.0;
  std::string bin;
  std::string metric;
  std::optional<double> value;  // across-seed mean (pooled ratio for overhead)
  double stddev = 0.0;          // across-seed sample standard deviation
  std::size_t seed_count = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<SweepRow> rows;
  std::size_t failures = 0;
};

unsigned default_jobs();

// Runs one isolated simulation for a sweep cell.
SweepCell run_cell(const ScenarioConfig& base, const std::string& scheme, const std::string& workload,
                   double load, std::uint64_t seed);

// Every (scheme, workload, load, seed) cell runs once; cells run in parallel
// and are aggregated after all complete.
SweepResult run_sweep(const SweepSpec& spec);
std::vector<SweepRow> aggregate(const std::vector<SweepCell>& cells);

// kSummaryCsvHeader plus a trailing seed_stddev column.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

const SweepRow* find_row(const std::vector<SweepRow>& rows, const std::string& scheme,
                         const std::string& workload, double load, const std::string& bin,
                         const std::string& metric);

}  // namespace repflow
