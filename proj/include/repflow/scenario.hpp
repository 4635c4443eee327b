#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "repflow/topology.hpp"
#include "repflow/transport.hpp"

namespace repflow {

enum class TopologyKind : std::uint8_t { fat_tree, toy_fig3, two_host };
enum class ReplicationMode : std::uint8_t { off, short_flows };
// scripted: only flows added through Simulator::add_flow.
enum class TrafficPattern : std::uint8_t { random_pairs, toy_fig3, scripted };

struct ScenarioConfig {
  // [topology]
  TopologyKind topology = TopologyKind::fat_tree;
  unsigned pods = 4;
  LinkParams links;

  // [traffic]
  std::string workload = "web_search";
  double load = 0.5;
  TrafficPattern pattern = TrafficPattern::random_pairs;
  bool toy_large_flow = true;         // persistent H2 -> H4 flow
  std::uint32_t toy_short_size = 10;  // packets per H1 -> H3 flow
  double toy_short_interval_s = 0.02; // mean gap between H1 -> H3 flows

  // [transport]
  Protocol protocol = Protocol::tcp;
  ReplicationMode replication = ReplicationMode::off;
  std::uint32_t short_flow_threshold = 68;
  std::uint32_t initial_window = 12;
  std::uint32_t max_window = 44;
  std::uint32_t ecn_threshold = 0;  // 0: 5% of the switch buffer, rounded up
  double rto_s = 0.0;               // 0: derived, see effective_rto()

  // [run]
  double duration_s = 1.0;
  double drain_timeout_s = 30.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::uint32_t effective_ecn_threshold() const;
  TransportParams transport() const;

  // Reads one `key = value` setting; `section` may be empty when the key is
  // unambiguous. Throws std::invalid_argument with the field name on error.
  void set(std::string_view key, std::string_view value);
};

// Retransmission timeout: rto_s when set, otherwise
// max(4 x base RTT, time to drain every switch buffer on the forward path).
double effective_rto(const ScenarioConfig& config, double base_rtt_s, double full_queues_s = 0.0);

// Named presets: toy-fig3, desk-4pod, paper-16pod.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

// `[section]` headers and `key = value` lines; '#' comments. Errors carry
// `source:line: field` diagnostics.
ScenarioConfig parse_scenario(std::istream& in, std::string_view source,
                              ScenarioConfig base = {});
ScenarioConfig load_scenario(const std::string& path, ScenarioConfig base = {});
void write_scenario(std::ostream& out, const ScenarioConfig& config);

std::string_view to_string(TopologyKind k);
std::string_view to_string(ReplicationMode m);
std::string_view to_string(TrafficPattern p);

}  // namespace repflow
