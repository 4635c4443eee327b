#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "repflow/rng.hpp"

namespace repflow {

inline constexpr std::uint32_t kPacketBytes = 1500;
inline constexpr std::uint32_t kAckBytes = 40;

// Ceiling division of a byte count into 1500-byte packets.
constexpr std::uint64_t bytes_to_packets(std::uint64_t bytes) noexcept {
  return (bytes + kPacketBytes - 1) / kPacketBytes;
}

struct SizeAtom {
  std::uint32_t packets = 0;
  double cumulative = 0.0;

  friend bool operator==(const SizeAtom&, const SizeAtom&) = default;
};

// Discrete empirical flow-size CDF. Sizes are in packets, strictly increasing,
// and the last cumulative probability is exactly 1.
class FlowSizeDistribution {
 public:
  FlowSizeDistribution(std::string name, std::vector<SizeAtom> atoms);

  const std::string& name() const noexcept { return name_; }
  const std::vector<SizeAtom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  // Probability mass of atom i.
  double probability(std::size_t i) const;
  double mean() const noexcept { return mean_; }

  // Inverse-CDF lookup: the first atom whose cumulative probability is
  // strictly greater than u. u must lie in [0, 1).
  std::uint32_t quantile(double u) const;

  // Plain-text table: `size_packets cumulative_probability` per line,
  // '#' comments allowed.
  static FlowSizeDistribution parse(std::istream& in, std::string name);
  static FlowSizeDistribution load(const std::string& path);
  void write(std::ostream& out) const;
  void save(const std::string& path) const;

  friend bool operator==(const FlowSizeDistribution& a, const FlowSizeDistribution& b) {
    return a.atoms_ == b.atoms_;
  }

 private:
  std::string name_;
  std::vector<SizeAtom> atoms_;
  double mean_ = 0.0;
};

// Bundled tables: "web_search" and "data_mining".
FlowSizeDistribution builtin_distribution(std::string_view name);
std::vector<std::string> builtin_distribution_names();

// A builtin name, or otherwise a path to a distribution file.
FlowSizeDistribution resolve_distribution(std::string_view name_or_path);

std::uint32_t sample_flow_size(const FlowSizeDistribution& dist, Rng& rng);

struct TrafficSpec {
  std::shared_ptr<const FlowSizeDistribution> dist;
  double load = 0.5;
  double link_capacity_pps = 0.0;  // per-host uplink, packets/s

  // Flows per second generated by one host.
  double arrival_rate() const;
  void validate() const;
};

// Exponential variate with mean 1 / spec.arrival_rate().
double next_interarrival(const TrafficSpec& spec, Rng& rng);
double exponential_variate(double rate, Rng& rng);

}  // namespace repflow
