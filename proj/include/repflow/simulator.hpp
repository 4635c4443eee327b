#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "repflow/metrics.hpp"
#include "repflow/scenario.hpp"
#include "repflow/topology.hpp"

namespace repflow {

// A flow injected by hand, in addition to (or instead of) generated traffic.
struct FlowRequest {
  HostId src = 0;
  HostId dst = 0;
  std::uint32_t size_pkts = 1;
  double start_s = 0.0;
  // Background flows never finish: they are not reported and the run does
  // not wait for them.
  bool background = false;
  std::optional<std::uint16_t> src_port;
};

// Per flow-instance packet accounting (an original and its replica are
// separate instances).
struct FlowCounters {
  std::uint64_t logical_id = 0;
  bool replica = false;
  bool completed = false;
  double finish_s = 0.0;  // last ack at the sender, when completed
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t retransmitted = 0;
  std::uint64_t timeouts = 0;
  Path path;
};

struct LinkCounters {
  std::uint64_t transmitted = 0;
  std::uint64_t dropped = 0;  // data and acks refused by a full buffer
  double busy_s = 0.0;
  std::uint32_t max_occupancy = 0;
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t data_injected = 0;
  std::uint64_t data_delivered = 0;
  std::uint64_t data_dropped = 0;
  std::uint64_t data_in_flight = 0;
  std::uint64_t retransmitted = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t acks_dropped = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t ecn_marks = 0;
  std::uint64_t replicas = 0;
  std::uint64_t incomplete = 0;
  // Largest waiting-queue length seen at any switch port.
  std::uint32_t max_switch_occupancy = 0;
  std::uint64_t trace_hash = 0;
  double end_time_s = 0.0;
  bool drained = true;
};

struct RunResult {
  std::vector<FctRecord> records;
  std::vector<FlowCounters> flows;
  std::vector<LinkCounters> links;
  RunStats stats;
};

// True when the replication policy would replicate a flow of this size.
bool should_replicate(std::uint32_t size_pkts, const ScenarioConfig& config);

// The replica's tuple: identical except for the destination port.
FiveTuple replica_tuple(const FiveTuple& original);

Topology build_topology(const ScenarioConfig& config);

// Single-threaded, deterministic packet-level simulation of one scenario.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void add_flow(const FlowRequest& request);

  // Discards data packet `seq` of the given logical flow once, on arrival at
  // the receiver. Logical ids count flows in start order from 0.
  void drop_once(std::uint64_t logical_id, std::uint32_t seq, bool replica = false);

  const Topology& topology() const noexcept;
  const ScenarioConfig& config() const noexcept;

  RunResult run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const ScenarioConfig& config);

// Hop timings of a path, for best_case_fct().
std::vector<HopTiming> hop_timings(const Topology& topo, const Path& path);

}  // namespace repflow
