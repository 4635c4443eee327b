#include "repflow/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace repflow::analytic {

namespace {

const double kTailFactor = 2.0 * std::numbers::ln10;

void require_stable(double effective_load, const char* what) {
  if (!(effective_load < 1.0))
    throw std::domain_error(std::string(what) + ": effective load " +
                            std::to_string(effective_load) + " >= 1, queue unstable");
}

// Wait of an M/D/1 queue with burst size M at the given load.
double pk_wait(double load, double max_window) {
  return load * max_window / (2.0 * (1.0 - load));
}

double short_flow_wait(const ModelParams& p, Replication r) {
  return r == Replication::on
             ? replicated_queueing_delay(p.load, p.short_byte_fraction, p.max_window)
             : mean_queueing_delay(p.load, p.max_window);
}

}  // namespace

void ModelParams::validate() const {
  if (!(initial_window > 0.0 && initial_window <= max_window && max_window <= large_threshold))
    throw std::invalid_argument("model params: require 0 < k <= M <= S_L");
  if (!(load >= 0.0 && load < 1.0)) throw std::invalid_argument("model params: load must lie in [0, 1)");
  if (!(short_byte_fraction >= 0.0 && short_byte_fraction < 1.0))
    throw std::invalid_argument("model params: epsilon must lie in [0, 1)");
}

double ShortFlowIntegrals::large_inverse_size_or_throw() const {
  if (!large_inverse_size)
    throw std::domain_error("distribution has no mass above the large-flow threshold");
  return *large_inverse_size;
}

double mean_queueing_delay(double load, double max_window) {
  if (!(load >= 0.0)) throw std::domain_error("load must be non-negative");
  if (!(max_window > 0.0)) throw std::invalid_argument("max window must be positive");
  require_stable(load, "mean_queueing_delay");
  return pk_wait(load, max_window);
}

double replicated_queueing_delay(double load, double epsilon, double max_window) {
  const double scaled = (1.0 + epsilon) * load;
  const double effective = scaled * scaled;
  require_stable(effective, "replicated_queueing_delay");
  require_stable(scaled, "replicated_queueing_delay");
  return pk_wait(effective, max_window);
}

double large_replicated_queueing_delay(double load, double epsilon, double max_window) {
  const double effective = (1.0 + epsilon) * load;
  require_stable(effective, "large_replicated_queueing_delay");
  return pk_wait(effective, max_window);
}

double slow_start_rounds(double size, double initial_window) {
  if (!(size > 0.0 && initial_window > 0.0))
    throw std::domain_error("slow_start_rounds: size and initial window must be positive");
  return std::log2(size / initial_window + 1.0);
}

unsigned slow_start_round_count(unsigned size, unsigned initial_window, unsigned max_window) {
  if (size == 0 || initial_window == 0 || max_window < initial_window)
    throw std::domain_error("slow_start_round_count: invalid arguments");
  unsigned rounds = 0;
  unsigned long long sent = 0;
  unsigned long long window = initial_window;
  while (sent < size) {
    sent += window;
    window = std::min<unsigned long long>(window * 2, max_window);
    ++rounds;
  }
  return rounds;
}

double short_flow_byte_fraction(const FlowSizeDistribution& dist, double threshold) {
  if (!(threshold > 0.0)) throw std::domain_error("threshold must be positive");
  if (!(dist.mean() > 0.0)) throw std::domain_error("distribution has zero mean");
  double short_bytes = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto x = dist.atoms()[i].packets;
    if (x <= threshold) short_bytes += x * dist.probability(i);
  }
  return short_bytes / dist.mean();
}

ShortFlowIntegrals short_flow_integrals(const FlowSizeDistribution& dist, const ModelParams& params) {
  params.validate();
  double short_mass = 0.0, large_mass = 0.0;
  double rounds_sum = 0.0, inverse_sum = 0.0, large_inverse_sum = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double x = dist.atoms()[i].packets;
    const double p = dist.probability(i);
    if (x <= params.large_threshold) {
      short_mass += p;
      rounds_sum += p * slow_start_rounds(x, params.initial_window) / x;
      inverse_sum += p / x;
    } else {
      large_mass += p;
      large_inverse_sum += p / x;
    }
  }
  if (!(short_mass > 0.0))
    throw std::domain_error("distribution has no mass at or below the large-flow threshold");

  ShortFlowIntegrals out;
  out.mean_rounds = rounds_sum / short_mass;
  out.inverse_size = inverse_sum / short_mass;
  // Summing (log2(x/k+1) - 1 + 2 ln 10)/x splits into the two sums above.
  out.tail_rounds = out.mean_rounds + (kTailFactor - 1.0) * out.inverse_size;
  if (large_mass > 0.0) out.large_inverse_size = large_inverse_sum / large_mass;
  return out;
}

double mean_fct_short(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication) {
  params.validate();
  return short_flow_wait(params, replication) * integrals.mean_rounds + 1.0;
}

double mean_fct_large(double load, double epsilon, Replication replication) {
  if (!(load >= 0.0)) throw std::domain_error("load must be non-negative");
  const double effective = replication == Replication::on ? (1.0 + epsilon) * load : load;
  require_stable(effective, "mean_fct_large");
  return effective / (2.0 * (1.0 - effective)) + 1.0;
}

double tail_queueing_delay(double load, double max_window) {
  return kTailFactor * mean_queueing_delay(load, max_window);
}

double queue_wait_tail_prob(double wait, double load, double max_window) {
  if (!(load >= 0.0 && load < 1.0)) throw std::domain_error("load must lie in [0, 1)");
  if (wait <= 0.0) return 1.0;
  if (load == 0.0) return 0.0;
  return std::exp(-wait * 2.0 * (1.0 - load) / (load * max_window));
}

double tail_fct_short(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication) {
  params.validate();
  return short_flow_wait(params, replication) * integrals.tail_rounds + 1.0;
}

double tail_fct_large(const ModelParams& params, const ShortFlowIntegrals& integrals,
                      Replication replication) {
  params.validate();
  const double p = integrals.large_inverse_size_or_throw();
  const double eps = params.short_byte_fraction;
  const double wait = replication == Replication::on
                          ? large_replicated_queueing_delay(params.load, eps, params.max_window)
                          : mean_queueing_delay(params.load, params.max_window);
  return mean_fct_large(params.load, eps, replication) + (kTailFactor - 1.0) * wait * p;
}

}  // namespace repflow::analytic
