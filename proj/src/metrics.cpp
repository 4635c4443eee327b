#include "repflow/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace repflow {

double best_case_fct(std::uint32_t size_pkts, std::span<const HopTiming> forward,
                     std::span<const HopTiming> reverse, std::uint32_t initial_window,
                     std::uint32_t max_window) {
  if (size_pkts == 0) throw std::invalid_argument("best_case_fct: empty flow");
  if (forward.empty() || reverse.empty()) throw std::invalid_argument("best_case_fct: empty path");
  if (initial_window == 0 || max_window < initial_window)
    throw std::invalid_argument("best_case_fct: invalid window");

  std::vector<double> fwd_free(forward.size(), 0.0), rev_free(reverse.size(), 0.0);
  std::vector<double> ack_time(size_pkts, 0.0);

  auto traverse = [](std::span<const HopTiming> hops, std::vector<double>& free_at, double t,
                     bool ack) {
    for (std::size_t h = 0; h < hops.size(); ++h) {
      const double depart = std::max(t, free_at[h]) + (ack ? hops[h].ack_tx_s : hops[h].data_tx_s);
      free_at[h] = depart;
      t = depart + hops[h].propagation_s;
    }
    return t;
  };

  // Sending limit after the acks for packets 0..i have arrived.
  auto limit = [&](std::uint64_t i) -> std::uint64_t {
    return i + 1 + std::min<std::uint64_t>(initial_window + i + 1, max_window);
  };

  std::uint64_t ack_index = 0;
  for (std::uint32_t j = 0; j < size_pkts; ++j) {
    double release = 0.0;
    if (j >= initial_window) {
      while (limit(ack_index) <= j) ++ack_index;
      release = ack_time[ack_index];
    }
    const double delivered = traverse(forward, fwd_free, release, false);
    ack_time[j] = traverse(reverse, rev_free, delivered, true);
  }
  return ack_time.back();
}

double round_based_fct(std::uint32_t size_pkts, double base_rtt_s, double bottleneck_tx_s,
                       std::uint32_t initial_window, std::uint32_t max_window) {
  double total = 0.0;
  std::uint64_t remaining = size_pkts;
  std::uint64_t window = initial_window;
  while (remaining > 0) {
    const auto sent = std::min(window, remaining);
    total += base_rtt_s + static_cast<double>(sent) * bottleneck_tx_s;
    remaining -= sent;
    window = std::min<std::uint64_t>(window * 2, max_window);
  }
  return total;
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const double exact = q * static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

namespace {

BinSummary summarize_bin(std::vector<double>& values) {
  BinSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.p99 = percentile_nearest_rank(values, 0.99);
  s.median = percentile_nearest_rank(values, 0.5);
  return s;
}

}  // namespace

FctSummary summarize(std::span<const FctRecord> records, std::uint32_t threshold_pkts) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::vector<double> short_v, large_v, all_v;
  FctSummary out;
  for (const auto& r : records) {
    if (!r.completed) {
      ++out.incomplete;
      continue;
    }
    (r.size_pkts <= threshold_pkts ? short_v : large_v).push_back(r.norm_fct);
    all_v.push_back(r.norm_fct);
  }
  out.short_flows = summarize_bin(short_v);
  out.large_flows = summarize_bin(large_v);
  out.all = summarize_bin(all_v);
  out.overhead_fraction = overhead_fraction(records);
  return out;
}

double overhead_fraction(std::span<const FctRecord> records) {
  double replica = 0.0, logical = 0.0;
  for (const auto& r : records) {
    replica += static_cast<double>(r.replica_pkts_sent);
    logical += r.size_pkts;
  }
  return logical > 0.0 ? replica / logical : 0.0;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void write_flow_csv(std::ostream& out, std::span<const FctRecord> records) {
  out << kFlowCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.flow_id << ',' << r.size_pkts << ',' << format_number(r.start_s) << ',';
    if (r.completed)
      out << format_number(r.finish_s) << ',' << format_number(r.fct_s) << ','
          << format_number(r.norm_fct);
    else
      out << ",,";
    out << ',' << (r.replicated ? 1 : 0) << ',' << (r.winner_was_replica ? 1 : 0) << ',' << r.src
        << ',' << r.dst << '\n';
  }
}

void write_summary_rows(std::ostream& out, const std::string& scheme, const std::string& workload,
                        double load, const FctSummary& s, bool with_overhead,
                        std::size_t seed_count) {
  auto row = [&](const char* bin, const char* metric, const BinSummary& b, double value) {
    out << scheme << ',' << workload << ',' << format_number(load) << ',' << bin << ',' << metric
        << ',' << (b.empty() ? std::string() : format_number(value)) << ',' << seed_count << '\n';
  };
  const std::pair<const char*, const BinSummary*> bins[] = {
      {"short", &s.short_flows}, {"large", &s.large_flows}, {"all", &s.all}};
  for (const auto& [name, b] : bins) {
    row(name, "mean", *b, b->mean);
    row(name, "p99", *b, b->p99);
  }
  if (with_overhead)
    out << scheme << ',' << workload << ',' << format_number(load) << ",all,overhead,"
        << format_number(s.overhead_fraction) << ',' << seed_count << '\n';
}

}  // namespace repflow
