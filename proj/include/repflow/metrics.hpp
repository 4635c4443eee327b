#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace repflow {

// One logical transfer. A replicated pair yields one record stamped with the
// earlier finisher.
struct FctRecord {
  std::uint64_t flow_id = 0;
  std::uint32_t size_pkts = 0;
  double start_s = 0.0;
  double finish_s = 0.0;  // meaningless when !completed
  double fct_s = 0.0;
  double norm_fct = 0.0;
  bool replicated = false;
  bool winner_was_replica = false;
  bool completed = false;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint64_t replica_pkts_sent = 0;  // data packets the replica put on the wire

  friend bool operator==(const FctRecord&, const FctRecord&) = default;
};

// Timing of one hop of an otherwise empty path.
struct HopTiming {
  double data_tx_s = 0.0;
  double ack_tx_s = 0.0;
  double propagation_s = 0.0;
};

// Completion time of a flow alone in the network: packets released by the
// slow-start ack clock (window k, +1 per ack, capped at max_window), pushed
// through store-and-forward FIFO hops, with per-packet acks returning over
// `reverse`. The flow completes when the last ack reaches the sender.
double best_case_fct(std::uint32_t size_pkts, std::span<const HopTiming> forward,
                     std::span<const HopTiming> reverse, std::uint32_t initial_window,
                     std::uint32_t max_window);

// Round-by-round upper estimate: sum over slow-start rounds of
// (base RTT + round size x bottleneck serialization).
double round_based_fct(std::uint32_t size_pkts, double base_rtt_s, double bottleneck_tx_s,
                       std::uint32_t initial_window, std::uint32_t max_window);

struct BinSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double p99 = 0.0;
  double median = 0.0;
  bool empty() const noexcept { return count == 0; }
};

struct FctSummary {
  BinSummary short_flows;  // (0, threshold]
  BinSummary large_flows;  // (threshold, inf)
  BinSummary all;
  std::size_t incomplete = 0;
  double overhead_fraction = 0.0;
};

// ceil(q * n)-th order statistic (1-based) of the values.
double percentile_nearest_rank(std::vector<double> values, double q);

FctSummary summarize(std::span<const FctRecord> records, std::uint32_t threshold_pkts);

// Replica data packets sent over the total size of all logical transfers.
double overhead_fraction(std::span<const FctRecord> records);

inline constexpr const char* kFlowCsvHeader =
    "flow_id,size_pkts,start_s,finish_s,fct_s,norm_fct,replicated,winner_was_replica,src,dst";
inline constexpr const char* kSummaryCsvHeader = "scheme,workload,load,bin,metric,value,seed_count";

void write_flow_csv(std::ostream& out, std::span<const FctRecord> records);

// Rows of the summary CSV for one (scheme, workload, load) cell.
void write_summary_rows(std::ostream& out, const std::string& scheme, const std::string& workload,
                        double load, const FctSummary& summary, bool with_overhead,
                        std::size_t seed_count);

std::string format_number(double v);

}  // namespace repflow
