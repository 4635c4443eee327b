#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "repflow/metrics.hpp"

using namespace repflow;

namespace {

FctRecord rec(std::uint64_t id, std::uint32_t size, double norm, bool completed = true) {
  FctRecord r;
  r.flow_id = id;
  r.size_pkts = size;
  r.start_s = 1.0;
  r.finish_s = 1.0 + norm * 1e-3;
  r.fct_s = norm * 1e-3;
  r.norm_fct = norm;
  r.completed = completed;
  return r;
}

std::vector<HopTiming> hops(int n, double tx, double ack_tx, double prop) {
  return std::vector<HopTiming>(n, HopTiming{tx, ack_tx, prop});
}

}  // namespace

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(101 - i);
  CHECK(percentile_nearest_rank(v, 0.99) == 99);
  CHECK(percentile_nearest_rank(v, 1.0) == 100);
  CHECK(percentile_nearest_rank(v, 0.5) == 50);
  CHECK(percentile_nearest_rank({7.0}, 0.99) == 7.0);
  CHECK(percentile_nearest_rank({1.0, 2.0}, 0.99) == 2.0);
  CHECK_THROWS(percentile_nearest_rank({}, 0.5));
  CHECK_THROWS(percentile_nearest_rank({1.0}, 0.0));
}

TEST_CASE("summaries bin by size") {
  std::vector<FctRecord> rs;
  for (int i = 1; i <= 100; ++i) rs.push_back(rec(i, 10, i));
  rs.push_back(rec(200, 68, 5));
  rs.push_back(rec(201, 69, 3));
  rs.push_back(rec(202, 1000, 2));
  rs.push_back(rec(203, 10, 0, false));

  const auto s = summarize(rs, 68);
  CHECK(s.short_flows.count == 101);
  CHECK(s.large_flows.count == 2);
  CHECK(s.all.count == 103);
  CHECK(s.incomplete == 1);
  CHECK(s.large_flows.mean == doctest::Approx(2.5));
  CHECK(s.large_flows.p99 == 3);
  // rank ceil(0.99 * 101) = 100 of 1, 2, 3, 4, 5, 5, 6, ..., 100
  CHECK(s.short_flows.p99 == 99);
  CHECK(s.short_flows.count + s.large_flows.count == s.all.count);
  CHECK(s.short_flows.p99 >= s.short_flows.median);
}

TEST_CASE("single record summary") {
  const std::vector<FctRecord> one{rec(1, 5, 3.5)};
  const auto s = summarize(one, 68);
  CHECK(s.all.mean == 3.5);
  CHECK(s.all.p99 == 3.5);
  CHECK(s.large_flows.empty());
  CHECK_THROWS(summarize(std::vector<FctRecord>{}, 68));
}

TEST_CASE("overhead fraction") {
  std::vector<FctRecord> rs{rec(1, 10, 1), rec(2, 90, 1)};
  CHECK(overhead_fraction(rs) == 0.0);
  rs[0].replicated = true;
  rs[0].replica_pkts_sent = 12;
  CHECK(overhead_fraction(rs) == doctest::Approx(0.12));
  CHECK(summarize(rs, 68).overhead_fraction == doctest::Approx(0.12));
}

TEST_CASE("best case of one window is one RTT plus serialization") {
  // Single hop: R = tx + prop + ack_tx + prop.
  const double tau = 1e-4, a = 1e-6, d = 5e-6;
  const auto f = hops(1, tau, a, d);
  const double rtt = tau + d + a + d;
  CHECK(best_case_fct(1, f, f, 12, 44) == doctest::Approx(rtt));
  CHECK(best_case_fct(12, f, f, 12, 44) == doctest::Approx(rtt + 11 * tau));
  // The ack clock keeps the link busy from the second window on.
  CHECK(best_case_fct(36, f, f, 12, 44) == doctest::Approx(2 * rtt + 23 * tau).epsilon(0.25));
  CHECK(best_case_fct(36, f, f, 12, 44) >= best_case_fct(12, f, f, 12, 44) + 24 * tau - 1e-12);
}

TEST_CASE("best case over several store-and-forward hops") {
  const double tau = 1e-4, a = 2e-6, d = 1e-5;
  const auto f = hops(6, tau, a, d);
  const double rtt = 6 * (tau + d) + 6 * (a + d);
  CHECK(best_case_fct(1, f, f, 12, 44) == doctest::Approx(rtt));
  CHECK(best_case_fct(12, f, f, 12, 44) == doctest::Approx(rtt + 11 * tau));
}

TEST_CASE("best case approaches the bottleneck rate for huge flows") {
  const double tau = 1.2e-4;
  const auto f = hops(6, tau, 3.2e-6, 1e-5);
  for (std::uint32_t n : {10'000u, 100'000u}) {
    const double t = best_case_fct(n, f, f, 12, 44);
    CHECK(n * tau / t > 0.99);
    CHECK(t > n * tau);
  }
}

TEST_CASE("round-based estimate") {
  CHECK(round_based_fct(12, 1e-3, 1e-4, 12, 44) == doctest::Approx(1e-3 + 12e-4));
  CHECK(round_based_fct(36, 1e-3, 1e-4, 12, 44) == doctest::Approx(2e-3 + 36e-4));
  // 12 + 24 + 44 + 44
  CHECK(round_based_fct(124, 1e-3, 0.0, 12, 44) == doctest::Approx(4e-3));
  const auto f = hops(1, 1e-4, 1e-6, 5e-6);
  for (std::uint32_t n : {1u, 12u, 13u, 36u, 100u, 1000u})
    CHECK(best_case_fct(n, f, f, 12, 44) <= round_based_fct(n, 1e-4 + 1e-6 + 1e-5, 1e-4, 12, 44) + 1e-12);
}

TEST_CASE("best case rejects bad input") {
  const auto f = hops(1, 1e-4, 1e-6, 0);
  CHECK_THROWS(best_case_fct(0, f, f, 12, 44));
  CHECK_THROWS(best_case_fct(5, {}, f, 12, 44));
  CHECK_THROWS(best_case_fct(5, f, f, 50, 44));
}

TEST_CASE("flow csv") {
  std::vector<FctRecord> rs{rec(0, 10, 2), rec(1, 99, 1, false)};
  rs[0].replicated = true;
  rs[0].winner_was_replica = true;
  rs[0].src = 3;
  rs[0].dst = 4;
  std::ostringstream out;
  write_flow_csv(out, rs);
  std::istringstream in(out.str());
  std::string header, l1, l2;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(header == kFlowCsvHeader);
  CHECK(l1.rfind("0,10,1,1.002,0.002,2,1,1,3,4", 0) == 0);
  CHECK(l2 == "1,99,1,,,,0,0,0,0");
}

TEST_CASE("summary rows") {
  std::vector<FctRecord> rs{rec(0, 10, 2), rec(1, 100, 4)};
  const auto s = summarize(rs, 68);
  std::ostringstream a, b;
  write_summary_rows(a, "tcp", "web_search", 0.5, s, false, 1);
  write_summary_rows(b, "repflow", "web_search", 0.5, s, true, 1);
  const auto lines = [](const std::string& x) { return std::count(x.begin(), x.end(), '\n'); };
  CHECK(lines(a.str()) == 6);
  CHECK(lines(b.str()) == 7);
  CHECK(a.str().find("tcp,web_search,0.5,short,mean,2,1\n") != std::string::npos);
  CHECK(b.str().find(",all,overhead,") != std::string::npos);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3) == "3");
}
