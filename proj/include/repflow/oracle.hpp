#pragma once

#include <cstdint>
#include <vector>

// Brute-force single-server queues, independent of the packet simulator.
// Time unit: one packet transmission time.
namespace repflow::oracle {

struct Mg1Config {
  double load = 0.5;          // rho
  double burst_size = 44.0;   // fixed service time M
  std::uint64_t n_arrivals = 1'000'000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Mg1Result {
  std::vector<double> waits;   // per burst, excluding its own service
  double mean_wait = 0.0;
  double utilization = 0.0;    // busy time / elapsed time
  double arrival_rate = 0.0;   // bursts per packet-time, measured
  double mean_sojourn = 0.0;   // wait + service
  double mean_in_system = 0.0; // time average of the number of bursts present
  double horizon = 0.0;        // last departure time

  // Fraction of bursts whose wait exceeds `w`.
  double tail_fraction(double w) const;
};

// Poisson bursts at rate rho / M, fixed service M, FCFS, unbounded queue.
Mg1Result simulate_mg1(const Mg1Config& config);

struct ReplicatedPairConfig {
  double load = 0.5;
  double epsilon = 0.05;
  double burst_size = 44.0;
  std::uint64_t n_arrivals = 1'000'000;  // bursts per queue; probes use the same count
  std::uint64_t seed = 1;

  void validate() const;
};

struct ReplicatedPairResult {
  double both_busy_fraction = 0.0;  // probes finding both queues busy
  double single_busy_fraction = 0.0;  // probes finding queue A busy
  double mean_min_wait = 0.0;
  double mean_single_wait = 0.0;    // queue A alone, load (1+eps) rho
  std::vector<double> min_waits;
};

// Two independent M/G/1 queues at load (1+eps) rho each. A separate Poisson
// stream of zero-work probes observes both queues' unfinished work; the
// probe's replicated wait is the smaller of the two.
ReplicatedPairResult simulate_replicated_pair(const ReplicatedPairConfig& config);

}  // namespace repflow::oracle
