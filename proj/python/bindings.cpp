#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "repflow/analytic.hpp"
#include "repflow/experiments.hpp"
#include "repflow/oracle.hpp"
#include "repflow/simulator.hpp"
#include "repflow/workload.hpp"

namespace py = pybind11;
using namespace repflow;

namespace {

std::string to_setting(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "on" : "off";
  return py::str(v).cast<std::string>();
}

ScenarioConfig make_config(const std::string& preset_name, const py::kwargs& overrides) {
  auto c = preset(preset_name);
  for (const auto& [k, v] : overrides) c.set(k.cast<std::string>(), to_setting(v));
  c.validate();
  return c;
}

py::dict bin_dict(const BinSummary& b) {
  py::dict d;
  d["count"] = b.count;
  d["mean"] = b.mean;
  d["p99"] = b.p99;
  d["median"] = b.median;
  return d;
}

py::dict summary_dict(const FctSummary& s) {
  py::dict d;
  d["short"] = bin_dict(s.short_flows);
  d["large"] = bin_dict(s.large_flows);
  d["all"] = bin_dict(s.all);
  d["incomplete"] = s.incomplete;
  d["overhead"] = s.overhead_fraction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_repflow, m) {
  m.doc() = "Flow replication in fat-tree data center networks: model, oracle and packet simulator";

  m.def("mean_queueing_delay", &analytic::mean_queueing_delay, py::arg("rho"), py::arg("M") = 44.0);
  m.def("tail_queueing_delay", &analytic::tail_queueing_delay, py::arg("rho"), py::arg("M") = 44.0);
  m.def("slow_start_rounds", &analytic::slow_start_rounds, py::arg("size"), py::arg("k") = 12.0);
  m.def(
      "short_flow_byte_fraction",
      [](const std::string& workload, double threshold) {
        return analytic::short_flow_byte_fraction(resolve_distribution(workload), threshold);
      },
      py::arg("workload") = "web_search", py::arg("threshold") = 68.0);

  m.def(
      "model",
      [](const std::string& workload, std::vector<double> loads, std::optional<double> epsilon) {
        ModelSpec spec;
        spec.loads = std::move(loads);
        spec.epsilon_override = epsilon;
        py::dict out;
        for (const auto& p : model_curves(resolve_distribution(workload), spec)) {
          if (!out.contains(p.curve)) out[py::str(p.curve)] = py::list();
          out[py::str(p.curve)].cast<py::list>().append(p.value ? py::cast(*p.value) : py::none());
        }
        return out;
      },
      py::arg("workload") = "web_search", py::arg("loads"), py::arg("epsilon") = py::none(),
      "Analytic curves keyed by name; None where the queue is unstable.");

  m.def(
      "simulate_mg1",
      [](double rho, double burst, std::uint64_t n, std::uint64_t seed) {
        oracle::Mg1Result r;
        {
          py::gil_scoped_release release;
          r = oracle::simulate_mg1({rho, burst, n, seed});
        }
        py::dict d;
        d["mean_wait"] = r.mean_wait;
        d["utilization"] = r.utilization;
        d["mean_sojourn"] = r.mean_sojourn;
        d["mean_in_system"] = r.mean_in_system;
        d["tail_fraction_p99"] = r.tail_fraction(analytic::tail_queueing_delay(rho, burst));
        return d;
      },
      py::arg("rho"), py::arg("burst_size") = 44.0, py::arg("n_arrivals") = 1'000'000, py::arg("seed") = 1);

  m.def(
      "simulate_replicated_pair",
      [](double rho, double epsilon, double burst, std::uint64_t n, std::uint64_t seed) {
        oracle::ReplicatedPairResult r;
        {
          py::gil_scoped_release release;
          r = oracle::simulate_replicated_pair({rho, epsilon, burst, n, seed});
        }
        py::dict d;
        d["both_busy_fraction"] = r.both_busy_fraction;
        d["single_busy_fraction"] = r.single_busy_fraction;
        d["mean_min_wait"] = r.mean_min_wait;
        d["mean_single_wait"] = r.mean_single_wait;
        return d;
      },
      py::arg("rho"), py::arg("epsilon") = 0.05, py::arg("burst_size") = 44.0,
      py::arg("n_arrivals") = 1'000'000, py::arg("seed") = 1);

  m.def("presets", &preset_names);
  m.def(
      "scenario",
      [](const std::string& name, const py::kwargs& overrides) {
        std::ostringstream out;
        write_scenario(out, make_config(name, overrides));
        return out.str();
      },
      py::arg("preset") = "desk-4pod", "Scenario text after applying field overrides.");

  m.def(
      "simulate",
      [](const std::string& name, const py::kwargs& overrides) {
        const auto c = make_config(name, overrides);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c);
        }
        py::dict out;
        py::list flows;
        for (const auto& rec : r.records) {
          py::dict f;
          f["flow_id"] = rec.flow_id;
          f["size_pkts"] = rec.size_pkts;
          f["start_s"] = rec.start_s;
          f["fct_s"] = rec.fct_s;
          f["norm_fct"] = rec.norm_fct;
          f["replicated"] = rec.replicated;
          f["winner_was_replica"] = rec.winner_was_replica;
          f["completed"] = rec.completed;
          flows.append(f);
        }
        out["flows"] = flows;
        out["summary"] = r.records.empty() ? py::object(py::none())
                                           : py::object(summary_dict(summarize(r.records, c.short_flow_threshold)));
        out["events"] = r.stats.events;
        out["drops"] = r.stats.data_dropped;
        out["retransmitted"] = r.stats.retransmitted;
        out["timeouts"] = r.stats.timeouts;
        out["trace_hash"] = r.stats.trace_hash;
        return out;
      },
      py::arg("preset") = "desk-4pod",
      "Run one simulation. Keyword arguments override scenario fields, e.g. load=0.5, replication=True.");

  m.def(
      "sweep",
      [](const std::string& name, std::vector<double> loads, std::vector<std::string> schemes,
         std::vector<std::string> workloads, unsigned seeds, unsigned jobs, const py::kwargs& overrides) {
        SweepSpec spec;
        spec.base = make_config(name, overrides);
        spec.loads = std::move(loads);
        spec.schemes = std::move(schemes);
        spec.workloads = std::move(workloads);
        spec.seeds.clear();
        for (unsigned s = 1; s <= seeds; ++s) spec.seeds.push_back(s);
        spec.jobs = jobs;
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_sweep(spec);
        }
        py::list rows;
        for (const auto& r : res.rows) {
          py::dict d;
          d["scheme"] = r.scheme;
          d["workload"] = r.workload;
          d["load"] = r.load;
          d["bin"] = r.bin;
          d["metric"] = r.metric;
          d["value"] = r.value ? py::cast(*r.value) : py::none();
          d["stddev"] = r.stddev;
          d["seed_count"] = r.seed_count;
          rows.append(d);
        }
        return rows;
      },
      py::arg("preset") = "desk-4pod", py::arg("loads") = std::vector<double>{0.5},
      py::arg("schemes") = std::vector<std::string>{"tcp", "repflow"},
      py::arg("workloads") = std::vector<std::string>{"web_search"}, py::arg("seeds") = 1u, py::arg("jobs") = 0u);
}
