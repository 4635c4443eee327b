#pragma once

#include <optional>

#include "repflow/workload.hpp"

// Queueing-model estimates of normalized flow completion time. A path is
// treated as an M/G/1 FCFS queue fed by fixed-size bursts of max_window
// packets; time is in packet transmission times.
namespace repflow::analytic {

enum class Replication : bool { off = false, on = true };

struct ModelParams {
  double initial_window = 12.0;   // k, packets
  double max_window = 44.0;       // M, packets
  double large_threshold = 68.0;  // S_L, packets
  double load = 0.0;              // rho
  double short_byte_fraction = 0.0;  // epsilon

  // Throws std::invalid_argument when 0 < k <= M <= S_L, 0 <= rho < 1 or
  // 0 <= epsilon < 1 is violated.
  void validate() const;
};

// Sums over the discrete size distribution, conditioned on either side of
// the large-flow threshold.
struct ShortFlowIntegrals {
  double mean_rounds = 0.0;    // E[log2(x/k + 1) / x | x <= S_L]
  double inverse_size = 0.0;   // E[1 / x | x <= S_L]
  double tail_rounds = 0.0;    // E[(log2(x/k + 1) - 1 + 2 ln 10) / x | x <= S_L]
  std::optional<double> large_inverse_size;  // E[1 / x | x > S_L]; empty if no mass above S_L

  double large_inverse_size_or_throw() const;
};

// Pollaczek-Khintchine mean wait with fixed bursts of size M.
double mean_queueing_delay(double load, double max_window);

// Wait of the virtual queue a replicated short flow sees: load ((1+eps) rho)^2.
double replicated_queueing_delay(double load, double epsilon, double max_window);

// Wait seen by large flows once replicas raise the load to (1+eps) rho.
double large_replicated_queueing_delay(double load, double epsilon, double max_window);

// Continuous slow-start round count log2(x/k + 1).
double slow_start_rounds(double size, double initial_window);

// Whole rounds needed when windows go k, 2k, 4k, ... capped at max_window.
unsigned slow_start_round_count(unsigned size, unsigned initial_window, unsigned max_window);

// Fraction of bytes carried by flows of at most `threshold` packets.
double short_flow_byte_fraction(const FlowSizeDistribution& dist, double threshold);

ShortFlowIntegrals short_flow_integrals(const FlowSizeDistribution& dist, const ModelParams& params);

double mean_fct_short(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication);
double mean_fct_large(double load, double epsilon, Replication replication);

// 99th-percentile wait from the exponential tail approximation:
// ln 10 * rho M / (1 - rho).
double tail_queueing_delay(double load, double max_window);

// P(W > w) ~ exp(-w * 2 (1 - rho) / (rho M)).
double queue_wait_tail_prob(double wait, double load, double max_window);

double tail_fct_short(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication);
double tail_fct_large(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication);

}  // namespace repflow::analytic
