#include "repflow/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "repflow/rng.hpp"
#include "repflow/workload.hpp"

namespace repflow::oracle {

namespace {

// Lazily generated FCFS queue with Poisson arrivals and fixed service,
// queried for its unfinished work at non-decreasing times.
class WorkTracker {
 public:
  WorkTracker(double rate, double service, std::uint64_t seed, std::uint64_t stream)
      : rate_(rate), service_(service), rng_(seed, stream) {
    next_arrival_ = exponential_variate(rate_, rng_);
  }

  double work_at(double t) {
    while (next_arrival_ <= t) {
      const double remaining = std::max(0.0, work_after_last_ - (next_arrival_ - last_arrival_));
      work_after_last_ = remaining + service_;
      last_arrival_ = next_arrival_;
      next_arrival_ += exponential_variate(rate_, rng_);
    }
    return std::max(0.0, work_after_last_ - (t - last_arrival_));
  }

 private:
  double rate_;
  double service_;
  Rng rng_;
  double next_arrival_ = 0.0;
  double last_arrival_ = 0.0;
  double work_after_last_ = 0.0;
};

}  // namespace

void Mg1Config::validate() const {
  if (!(load > 0.0 && load < 1.0)) throw std::domain_error("M/G/1 load must lie in (0, 1)");
  if (!(burst_size > 0.0)) throw std::invalid_argument("burst size must be positive");
  if (n_arrivals == 0) throw std::invalid_argument("need at least one arrival");
}

void ReplicatedPairConfig::validate() const {
  if (!(load > 0.0)) throw std::domain_error("load must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (!((1.0 + epsilon) * load < 1.0)) throw std::domain_error("(1 + epsilon) * load must be < 1");
  if (!(burst_size > 0.0)) throw std::invalid_argument("burst size must be positive");
  if (n_arrivals == 0) throw std::invalid_argument("need at least one probe");
}

double Mg1Result::tail_fraction(double w) const {
  if (waits.empty()) return 0.0;
  const auto n = std::count_if(waits.begin(), waits.end(), [w](double x) { return x > w; });
  return static_cast<double>(n) / static_cast<double>(waits.size());
}

Mg1Result simulate_mg1(const Mg1Config& config) {
  config.validate();
  const double rate = config.load / config.burst_size;
  const double service = config.burst_size;
  Rng rng(config.seed, 0);

  Mg1Result out;
  out.waits.resize(config.n_arrivals);
  std::vector<double> arrivals(config.n_arrivals), departures(config.n_arrivals);

  double t = 0.0;
  double server_free = 0.0;
  double idle = 0.0;
  for (std::uint64_t i = 0; i < config.n_arrivals; ++i) {
    t += exponential_variate(rate, rng);
    arrivals[i] = t;
    if (t > server_free) idle += t - server_free;
    const double start = std::max(t, server_free);
    out.waits[i] = start - t;
    server_free = start + service;
    departures[i] = server_free;
  }
  out.horizon = server_free;
  out.mean_wait = std::accumulate(out.waits.begin(), out.waits.end(), 0.0) /
                  static_cast<double>(config.n_arrivals);
  out.utilization = 1.0 - idle / out.horizon;
  out.mean_sojourn = out.mean_wait + service;

  // Time-average population over [0, last arrival], by sweeping the merged
  // arrival and departure instants.
  const double window = arrivals.back();
  out.arrival_rate = static_cast<double>(config.n_arrivals) / window;
  double area = 0.0, last = 0.0;
  std::uint64_t present = 0;
  std::size_t ia = 0, id = 0;
  while (ia < arrivals.size() || id < departures.size()) {
    const bool take_arrival = ia < arrivals.size() && (id >= departures.size() || arrivals[ia] <= departures[id]);
    const double at = take_arrival ? arrivals[ia] : departures[id];
    if (at > window) break;
    area += static_cast<double>(present) * (at - last);
    last = at;
    if (take_arrival) {
      ++present;
      ++ia;
    } else {
      --present;
      ++id;
    }
  }
  out.mean_in_system = area / window;
  return out;
}

ReplicatedPairResult simulate_replicated_pair(const ReplicatedPairConfig& config) {
  config.validate();
  const double queue_load = (1.0 + config.epsilon) * config.load;
  const double rate = queue_load / config.burst_size;
  WorkTracker a(rate, config.burst_size, config.seed, 1);
  WorkTracker b(rate, config.burst_size, config.seed, 2);
  Rng probe_rng(config.seed, 3);

  ReplicatedPairResult out;
  out.min_waits.reserve(config.n_arrivals);
  std::uint64_t both = 0, single = 0;
  double sum_min = 0.0, sum_single = 0.0;
  double t = 0.0;
  for (std::uint64_t i = 0; i < config.n_arrivals; ++i) {
    t += exponential_variate(rate, probe_rng);
    const double wa = a.work_at(t);
    const double wb = b.work_at(t);
    if (wa > 0.0) ++single;
    if (wa > 0.0 && wb > 0.0) ++both;
    const double m = std::min(wa, wb);
    out.min_waits.push_back(m);
    sum_min += m;
    sum_single += wa;
  }
  const auto n = static_cast<double>(config.n_arrivals);
  out.both_busy_fraction = static_cast<double>(both) / n;
  out.single_busy_fraction = static_cast<double>(single) / n;
  out.mean_min_wait = sum_min / n;
  out.mean_single_wait = sum_single / n;
  return out;
}

}  // namespace repflow::oracle
