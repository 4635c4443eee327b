#include "repflow/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "repflow/simulator.hpp"

namespace repflow {

// ---- model curves ---------------------------------------------------------

std::vector<double> load_grid(double first, double last, double step) {
  if (!(step > 0.0) || last < first) throw std::invalid_argument("invalid load grid");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(std::round((first + i * step) * 1e9) / 1e9);
  return out;
}

std::vector<ModelPoint> model_curves(const FlowSizeDistribution& dist, const ModelSpec& spec) {
  using analytic::Replication;
  auto params = spec.params;
  params.short_byte_fraction =
      spec.epsilon_override.value_or(analytic::short_flow_byte_fraction(dist, params.large_threshold));
  params.load = 0.0;
  const auto integrals = analytic::short_flow_integrals(dist, params);

  std::vector<ModelPoint> out;
  auto emit = [&](double load, const char* name, auto&& f) {
    ModelPoint p{load, name, std::nullopt};
    try {
      p.value = f();
    } catch (const std::domain_error&) {
    }
    out.push_back(std::move(p));
    return out.back().value;
  };

  for (double load : spec.loads) {
    params.load = load;
    const double eps = params.short_byte_fraction;
    const auto tcp = emit(load, "short_mean_tcp",
                          [&] { return analytic::mean_fct_short(params, integrals, Replication::off); });
    const auto rep = emit(load, "short_mean_repflow",
                          [&] { return analytic::mean_fct_short(params, integrals, Replication::on); });
    emit(load, "short_p99_tcp", [&] { return analytic::tail_fct_short(params, integrals, Replication::off); });
    emit(load, "short_p99_repflow",
         [&] { return analytic::tail_fct_short(params, integrals, Replication::on); });
    emit(load, "large_mean_tcp", [&] { return analytic::mean_fct_large(load, eps, Replication::off); });
    emit(load, "large_mean_repflow", [&] { return analytic::mean_fct_large(load, eps, Replication::on); });
    emit(load, "large_p99_tcp", [&] { return analytic::tail_fct_large(params, integrals, Replication::off); });
    emit(load, "large_p99_repflow",
         [&] { return analytic::tail_fct_large(params, integrals, Replication::on); });
    emit(load, "short_mean_queueing_ratio", [&]() -> double {
      if (!tcp || !rep || *tcp == 1.0) throw std::domain_error("undefined ratio");
      return (*rep - 1.0) / (*tcp - 1.0);
    });
  }
  return out;
}

void write_model_csv(std::ostream& out, const std::vector<ModelPoint>& points) {
  out << "load,curve,value\n";
  for (const auto& p : points)
    out << format_number(p.load) << ',' << p.curve << ','
        << (p.value ? format_number(*p.value) : std::string()) << '\n';
}

// ---- oracle validation ----------------------------------------------------

std::vector<OracleCheck> oracle_report(const OracleSpec& spec) {
  std::vector<OracleCheck> out;
  auto rel = [](double analytic, double empirical) { return std::abs(empirical - analytic) / analytic; };
  auto param = [](double rho) { return "rho=" + format_number(rho); };

  for (double rho : {0.2, 0.5, 0.8}) {
    const auto r = oracle::simulate_mg1({rho, spec.burst_size, spec.n_arrivals, spec.seed});
    const double pk = analytic::mean_queueing_delay(rho, spec.burst_size);
    out.push_back({"pk_mean_wait", param(rho), pk, r.mean_wait, "rel_err<=0.05",
                   rel(pk, r.mean_wait) <= 0.05});
    if (rho == 0.5) {
      const double tail = analytic::tail_queueing_delay(rho, spec.burst_size);
      const double frac = r.tail_fraction(tail);
      out.push_back({"tail_prob_at_p99_wait", param(rho), 0.01, frac, "in[0.005,0.02]",
                     frac >= 0.005 && frac <= 0.02});
      out.push_back({"utilization", param(rho), rho, r.utilization, "abs_err<=0.01",
                     std::abs(r.utilization - rho) <= 0.01});
      const double little = r.arrival_rate * r.mean_sojourn;
      out.push_back({"littles_law", param(rho), little, r.mean_in_system, "rel_err<=0.02",
                     rel(little, r.mean_in_system) <= 0.02});
    }
  }
  {
    const double rho = 0.01;
    const auto r = oracle::simulate_mg1({rho, spec.burst_size, spec.n_arrivals, spec.seed});
    const double pk = analytic::mean_queueing_delay(rho, spec.burst_size);
    out.push_back({"pk_mean_wait", param(rho), pk, r.mean_wait, "rel_err<=0.2", rel(pk, r.mean_wait) <= 0.2});
  }
  for (double rho : {0.3, 0.5, 0.7}) {
    const auto r = oracle::simulate_replicated_pair(
        {rho, spec.epsilon, spec.burst_size, spec.n_arrivals, spec.seed});
    const double product = std::pow((1.0 + spec.epsilon) * rho, 2.0);
    out.push_back({"both_busy_fraction", param(rho), product, r.both_busy_fraction, "abs_err<=0.01",
                   std::abs(r.both_busy_fraction - product) <= 0.01});
  }
  for (double rho : {0.2, 0.5, 0.8}) {
    const auto r = oracle::simulate_replicated_pair(
        {rho, spec.epsilon, spec.burst_size, spec.n_arrivals, spec.seed});
    const double single = analytic::mean_queueing_delay(rho, spec.burst_size);
    out.push_back({"min_wait_below_single_wait", param(rho), single, r.mean_min_wait,
                   "empirical<analytic", r.mean_min_wait < single});
    const double virtual_queue = analytic::replicated_queueing_delay(rho, spec.epsilon, spec.burst_size);
    out.push_back({"virtual_queue_wait_gap", param(rho), virtual_queue, r.mean_min_wait, "reported",
                   std::nullopt});
  }
  return out;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleCheck>& checks) {
  out << "experiment,parameter,analytic,empirical,rel_error,criterion,pass\n";
  for (const auto& c : checks) {
    const double rel = c.analytic != 0.0 ? std::abs(c.empirical - c.analytic) / std::abs(c.analytic) : 0.0;
    out << c.experiment << ',' << c.parameter << ',' << format_number(c.analytic) << ','
        << format_number(c.empirical) << ',' << format_number(rel) << ',' << c.criterion << ','
        << (c.pass ? (*c.pass ? "pass" : "fail") : "reported") << '\n';
  }
}

// ---- simulation sweeps ----------------------------------------------------

Scheme scheme_by_name(const std::string& name) {
  if (name == "tcp") return {name, Protocol::tcp, ReplicationMode::off};
  if (name == "repflow") return {name, Protocol::tcp, ReplicationMode::short_flows};
  if (name == "dctcp_like") return {name, Protocol::dctcp_like, ReplicationMode::off};
  if (name == "repflow_dctcp") return {name, Protocol::dctcp_like, ReplicationMode::short_flows};
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string scheme_name(const ScenarioConfig& config) {
  const bool rep = config.replication == ReplicationMode::short_flows;
  if (config.protocol == Protocol::tcp) return rep ? "repflow" : "tcp";
  return rep ? "repflow_dctcp" : "dctcp_like";
}

void SweepSpec::validate() const {
  if (loads.empty() || schemes.empty() || workloads.empty() || seeds.empty())
    throw std::invalid_argument("sweep: loads, schemes, workloads and seeds must be nonempty");
  for (const auto& s : schemes) scheme_by_name(s);
  for (double l : loads)
    if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("sweep: loads must lie in (0, 1)");
}

unsigned default_jobs() {
  if (const char* env = std::getenv("REPFLOW_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepCell run_cell(const ScenarioConfig& base, const std::string& scheme, const std::string& workload,
                   double load, std::uint64_t seed) {
  SweepCell cell;
  cell.scheme = scheme;
  cell.workload = workload;
  cell.load = load;
  cell.seed = seed;
  try {
    ScenarioConfig c = base;
    const auto s = scheme_by_name(scheme);
    c.protocol = s.protocol;
    c.replication = s.replication;
    c.workload = workload;
    c.load = load;
    c.seed = seed;
    c.pattern = TrafficPattern::random_pairs;
    const auto result = run(c);
    if (result.records.empty()) throw std::runtime_error("no flows generated");
    cell.summary = summarize(result.records, c.short_flow_threshold);
    for (const auto& r : result.records) {
      cell.replica_pkts += static_cast<double>(r.replica_pkts_sent);
      cell.logical_pkts += r.size_pkts;
    }
    cell.incomplete = result.stats.incomplete;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult out;
  for (const auto& scheme : spec.schemes)
    for (const auto& workload : spec.workloads)
      for (double load : spec.loads)
        for (auto seed : spec.seeds) {
          SweepCell cell;
          cell.scheme = scheme;
          cell.workload = workload;
          cell.load = load;
          cell.seed = seed;
          out.cells.push_back(std::move(cell));
        }

  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs ? spec.jobs : default_jobs(),
                                                        static_cast<unsigned>(out.cells.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.cells.size(); i = next++) {
      const auto& c = out.cells[i];
      out.cells[i] = run_cell(spec.base, c.scheme, c.workload, c.load, c.seed);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  for (const auto& c : out.cells)
    if (!c.ok) ++out.failures;
  out.rows = aggregate(out.cells);
  return out;
}

std::vector<SweepRow> aggregate(const std::vector<SweepCell>& cells) {
  // Preserve first-seen order of (scheme, workload, load).
  std::vector<std::tuple<std::string, std::string, double>> keys;
  std::map<std::tuple<std::string, std::string, double>, std::vector<const SweepCell*>> groups;
  for (const auto& c : cells) {
    auto key = std::make_tuple(c.scheme, c.workload, c.load);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.push_back(key);
    if (c.ok) it->second.push_back(&c);
  }

  auto stats_of = [](const std::vector<double>& v) {
    double mean = 0.0, sd = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
    return std::make_pair(mean, sd);
  };

  std::vector<SweepRow> rows;
  for (const auto& key : keys) {
    const auto& group = groups[key];
    const auto& [scheme, workload, load] = key;
    const std::pair<const char*, BinSummary FctSummary::*> bins[] = {
        {"short", &FctSummary::short_flows}, {"large", &FctSummary::large_flows}, {"all", &FctSummary::all}};
    for (const auto& [bin, member] : bins) {
      for (const char* metric : {"mean", "p99"}) {
        std::vector<double> values;
        for (const auto* c : group) {
          const auto& b = c->summary.*member;
          if (!b.empty()) values.push_back(std::string_view(metric) == "mean" ? b.mean : b.p99);
        }
        SweepRow row{scheme, workload, load, bin, metric, std::nullopt, 0.0, values.size()};
        if (!values.empty()) {
          auto [m, sd] = stats_of(values);
          row.value = m;
          row.stddev = sd;
        }
        rows.push_back(std::move(row));
      }
    }
    if (scheme_by_name(scheme).replication == ReplicationMode::short_flows) {
      std::vector<double> per_seed;
      double replica = 0.0, logical = 0.0;
      for (const auto* c : group) {
        replica += c->replica_pkts;
        logical += c->logical_pkts;
        per_seed.push_back(c->summary.overhead_fraction);
      }
      SweepRow row{scheme, workload, load, "all", "overhead", std::nullopt, 0.0, group.size()};
      if (logical > 0.0) {
        row.value = replica / logical;
        row.stddev = stats_of(per_seed).second;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSummaryCsvHeader << ",seed_stddev\n";
  for (const auto& r : rows)
    out << r.scheme << ',' << r.workload << ',' << format_number(r.load) << ',' << r.bin << ','
        << r.metric << ',' << (r.value ? format_number(*r.value) : std::string()) << ','
        << r.seed_count << ',' << format_number(r.stddev) << '\n';
}

const SweepRow* find_row(const std::vector<SweepRow>& rows, const std::string& scheme,
                         const std::string& workload, double load, const std::string& bin,
                         const std::string& metric) {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.workload == workload && std::abs(r.load - load) < 1e-9 && r.bin == bin &&
        r.metric == metric)
      return &r;
  return nullptr;
}

}  // namespace repflow
