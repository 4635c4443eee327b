#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "repflow/workload.hpp"

using namespace repflow;

namespace {

double byte_share_above(const FlowSizeDistribution& d, double pkts) {
  double above = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double b = d.atoms()[i].packets * d.probability(i);
    total += b;
    if (d.atoms()[i].packets > pkts) above += b;
  }
  return above / total;
}

double count_share_above(const FlowSizeDistribution& d, double pkts) {
  double s = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.atoms()[i].packets > pkts) s += d.probability(i);
  return s;
}

}  // namespace

TEST_CASE("bytes to packets rounds up") {
  CHECK(bytes_to_packets(1) == 1);
  CHECK(bytes_to_packets(1500) == 1);
  CHECK(bytes_to_packets(1501) == 2);
  CHECK(bytes_to_packets(100'000) == 67);
  CHECK(bytes_to_packets(102'000) == 68);
}

TEST_CASE("web search table") {
  const auto d = builtin_distribution("web_search");
  const double mb = 1e6 / kPacketBytes;
  CHECK(byte_share_above(d, mb) >= 0.95);
  CHECK(count_share_above(d, mb) <= 0.30);
  CHECK(d.atoms().back().cumulative == 1.0);
}

TEST_CASE("data mining table") {
  const auto d = builtin_distribution("data_mining");
  double below_10k = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.atoms()[i].packets * kPacketBytes < 10'000) below_10k += d.probability(i);
  CHECK(below_10k >= 0.80);
  const double big = 35e6 / kPacketBytes;
  CHECK(byte_share_above(d, big) == doctest::Approx(0.95).epsilon(0.03));
  CHECK(count_share_above(d, big) == doctest::Approx(0.036).epsilon(0.28));
  CHECK(std::abs(count_share_above(d, big) - 0.036) <= 0.01);
}

TEST_CASE("unknown builtin") { CHECK_THROWS_AS(builtin_distribution("nope"), std::invalid_argument); }

TEST_CASE("invalid tables are rejected") {
  CHECK_THROWS(FlowSizeDistribution("x", {}));
  CHECK_THROWS(FlowSizeDistribution("x", {{0, 1.0}}));
  CHECK_THROWS(FlowSizeDistribution("x", {{5, 0.5}, {5, 1.0}}));
  CHECK_THROWS(FlowSizeDistribution("x", {{5, 0.5}, {6, 0.4}, {7, 1.0}}));
  CHECK_THROWS(FlowSizeDistribution("x", {{5, 0.5}, {6, 0.99}}));
}

TEST_CASE("parse errors name the line") {
  std::istringstream in("# header\n12 0.5\nbogus\n");
  try {
    FlowSizeDistribution::parse(in, "f");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("distribution round trip is exact") {
  for (const auto& name : builtin_distribution_names()) {
    const auto d = builtin_distribution(name);
    std::stringstream ss;
    d.write(ss);
    CHECK(FlowSizeDistribution::parse(ss, name) == d);
  }
  FlowSizeDistribution odd("odd", {{1, 0.1}, {3, 0.30000000000000004}, {7, 1.0 / 3.0 + 0.5}, {9, 1.0}});
  const auto path = std::filesystem::temp_directory_path() / "repflow_roundtrip.cdf";
  odd.save(path.string());
  CHECK(FlowSizeDistribution::load(path.string()) == odd);
  std::filesystem::remove(path);
}

TEST_CASE("bundled data files equal the builtin tables") {
  for (const auto& name : builtin_distribution_names()) {
    const auto path = std::string(REPFLOW_DATA_DIR) + "/workloads/" + name + ".cdf";
    CHECK(FlowSizeDistribution::load(path) == builtin_distribution(name));
    CHECK(resolve_distribution(path) == builtin_distribution(name));
  }
}

TEST_CASE("inverse cdf lookup") {
  FlowSizeDistribution single("one", {{12, 1.0}});
  Rng rng(3, 0);
  for (int i = 0; i < 1000; ++i) CHECK(sample_flow_size(single, rng) == 12);

  FlowSizeDistribution d("d", {{2, 0.25}, {5, 0.5}, {9, 1.0}});
  CHECK(d.quantile(0.0) == 2);
  CHECK(d.quantile(0.2499) == 2);
  CHECK(d.quantile(0.25) == 5);
  CHECK(d.quantile(0.75) == 9);
  CHECK(d.quantile(0.999999) == 9);
}

TEST_CASE("sample mean converges to the table mean") {
  for (const auto& name : builtin_distribution_names()) {
    const auto d = builtin_distribution(name);
    Rng rng(11, 0);
    double sum = 0;
    const int n = 1'000'000;
    std::vector<std::uint64_t> hist(d.size());
    for (int i = 0; i < n; ++i) {
      const auto x = sample_flow_size(d, rng);
      sum += x;
      for (std::size_t k = 0; k < d.size(); ++k)
        if (d.atoms()[k].packets == x) ++hist[k];
    }
    INFO(name);
    CHECK(std::abs(sum / n - d.mean()) / d.mean() < 0.01);
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double p = d.probability(k);
      const double sigma = std::sqrt(n * p * (1 - p));
      CHECK(std::abs(hist[k] - n * p) <= 3 * sigma + 1);
    }
  }
}

TEST_CASE("interarrivals are exponential with the configured rate") {
  TrafficSpec spec{std::make_shared<FlowSizeDistribution>(builtin_distribution("web_search")), 0.5, 8333.0};
  CHECK(spec.arrival_rate() == doctest::Approx(0.5 * 8333.0 / spec.dist->mean()));
  Rng rng(5, 1);
  const int n = 1'000'000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += next_interarrival(spec, rng);
  CHECK(std::abs(sum / n * spec.arrival_rate() - 1) < 0.01);

  Rng a(5, 1), b(5, 1);
  double sa = 0, sb = 0;
  for (int i = 0; i < 100'000; ++i) {
    sa += exponential_variate(10.0, a);
    sb += exponential_variate(20.0, b);
  }
  CHECK(sb / sa == doctest::Approx(0.5).epsilon(1e-12));

  Rng r1(9, 4), r2(9, 4);
  for (int i = 0; i < 100; ++i) CHECK(next_interarrival(spec, r1) == next_interarrival(spec, r2));
}

TEST_CASE("generated bytes approach the offered load") {
  TrafficSpec spec{std::make_shared<FlowSizeDistribution>(builtin_distribution("web_search")), 0.4, 8333.0};
  Rng rng(21, 0);
  double t = 0, pkts = 0;
  const double horizon = 20'000.0;
  while (true) {
    t += next_interarrival(spec, rng);
    if (t > horizon) break;
    pkts += sample_flow_size(*spec.dist, rng);
  }
  CHECK(std::abs(pkts / horizon / spec.link_capacity_pps - 0.4) / 0.4 < 0.02);
}

TEST_CASE("traffic spec validation") {
  TrafficSpec spec{std::make_shared<FlowSizeDistribution>(builtin_distribution("web_search")), 1.0, 8333.0};
  CHECK_THROWS(spec.validate());
  spec.load = 0.5;
  spec.link_capacity_pps = 0;
  CHECK_THROWS(spec.validate());
}

TEST_CASE("rng streams") {
  Rng a(1, 0), b(1, 1), c(1, 0);
  CHECK(a.next() != b.next());
  Rng d(1, 0);
  CHECK(c.next() == d.next());
  Rng u(2, 0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(7) < 7);
  }
}
