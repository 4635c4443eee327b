#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <map>

#include "repflow/simulator.hpp"

using namespace repflow;

namespace {

ScenarioConfig scripted_fat_tree() {
  ScenarioConfig c;
  c.pattern = TrafficPattern::scripted;
  c.duration_s = 0.0;
  return c;
}

ScenarioConfig two_host() {
  ScenarioConfig c = scripted_fat_tree();
  c.topology = TopologyKind::two_host;
  return c;
}

ScenarioConfig busy(double load, std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.load = load;
  c.duration_s = 0.5;
  c.seed = seed;
  return c;
}

FlowRequest flow(HostId src, HostId dst, std::uint32_t size, double start = 0.0) {
  FlowRequest r;
  r.src = src;
  r.dst = dst;
  r.size_pkts = size;
  r.start_s = start;
  return r;
}

double best_for(const Simulator& sim, const FiveTuple& t, std::uint32_t size) {
  EcmpRouter router(sim.topology(), sim.config().seed);
  const auto fwd = hop_timings(sim.topology(), router.route(t));
  const auto rev = hop_timings(sim.topology(), router.route(t.reversed()));
  return best_case_fct(size, fwd, rev, sim.config().initial_window, sim.config().max_window);
}

void check_conservation(const RunResult& r) {
  std::uint64_t inj = 0, del = 0, drop = 0, fly = 0;
  for (const auto& f : r.flows) {
    CHECK(f.injected == f.delivered + f.dropped + f.in_flight);
    inj += f.injected;
    del += f.delivered;
    drop += f.dropped;
    fly += f.in_flight;
  }
  CHECK(inj == r.stats.data_injected);
  CHECK(del == r.stats.data_delivered);
  CHECK(drop == r.stats.data_dropped);
  CHECK(fly == r.stats.data_in_flight);
  CHECK(r.stats.data_injected == r.stats.data_delivered + r.stats.data_dropped + r.stats.data_in_flight);
}

}  // namespace

TEST_CASE("uncontended flows have normalized FCT one") {
  for (std::uint32_t size : {1u, 12u, 13u, 36u, 68u, 69u, 500u, 3000u}) {
    Simulator sim(scripted_fat_tree());
    sim.add_flow(flow(0, 15, size));
    const auto r = sim.run();
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].completed);
    CHECK(r.records[0].norm_fct == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.stats.retransmitted == 0);
    CHECK(r.stats.data_dropped == 0);
  }
}

TEST_CASE("one window costs one round trip plus serialization") {
  Simulator sim(two_host());
  sim.add_flow(flow(0, 1, 12));
  const auto r = sim.run();
  const auto& l = sim.topology().link(0);
  const double rtt = l.data_tx_time() + l.ack_tx_time() + 2 * l.propagation_s;
  CHECK(r.records[0].fct_s == doctest::Approx(rtt + 11 * l.data_tx_time()));
}

TEST_CASE("a 36 packet flow needs two windows") {
  Simulator sim(two_host());
  sim.add_flow(flow(0, 1, 36));
  const auto r = sim.run();
  const auto& l = sim.topology().link(0);
  const double rtt = l.data_tx_time() + l.ack_tx_time() + 2 * l.propagation_s;
  CHECK(r.records[0].fct_s >= rtt + 35 * l.data_tx_time() - 1e-12);
  CHECK(r.records[0].fct_s <= 2 * rtt + 35 * l.data_tx_time() + 1e-12);
}

TEST_CASE("a long flow fills a single bottleneck") {
  Simulator sim(two_host());
  sim.add_flow(flow(0, 1, 50'000));
  const auto r = sim.run();
  const auto& l = sim.topology().link(0);
  const double utilization = 50'000 * l.data_tx_time() / r.records[0].fct_s;
  CHECK(utilization >= 0.95);
  CHECK(r.links[0].busy_s / r.stats.end_time_s >= 0.95);
}

TEST_CASE("per-RTT burst stays at the window cap") {
  auto c = two_host();
  c.links.delay_s = 10e-3;  // a window of 44 drains well inside one RTT
  Simulator sim(c);
  sim.add_flow(flow(0, 1, 2000));
  const auto r = sim.run();
  const auto& l = sim.topology().link(0);
  const double rtt = l.data_tx_time() + l.ack_tx_time() + 2 * l.propagation_s;
  REQUIRE(44 * l.data_tx_time() < rtt);
  // Rounds of 12, 24, then 44 packets; the last round carries 28.
  const double rounds = 2 + std::ceil((2000.0 - (12 + 24)) / 44.0);
  CHECK(r.records[0].fct_s == doctest::Approx(rounds * rtt + 27 * l.data_tx_time()).epsilon(0.02));
  CHECK(r.records[0].norm_fct == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("forced drop of the last packet costs one timeout") {
  auto c = two_host();
  c.rto_s = 0.01;
  Simulator sim(c);
  sim.add_flow(flow(0, 1, 12));
  sim.drop_once(0, 11);
  const auto r = sim.run();
  REQUIRE(r.records[0].completed);
  CHECK(r.stats.timeouts == 1);
  CHECK(r.stats.retransmitted == 1);
  CHECK(r.stats.data_dropped == 1);
  const auto& l = sim.topology().link(0);
  const double tau = l.data_tx_time();
  const double one = tau + l.ack_tx_time() + 2 * l.propagation_s;
  // Last good ack at one + 10 tau, then the timer, then one packet round.
  CHECK(r.records[0].fct_s == doctest::Approx(one + 10 * tau + 0.01 + one).epsilon(1e-9));
  check_conservation(r);
}

TEST_CASE("replication threshold is inclusive") {
  ScenarioConfig c;
  c.replication = ReplicationMode::short_flows;
  CHECK(should_replicate(1, c));
  CHECK(should_replicate(68, c));
  CHECK_FALSE(should_replicate(69, c));
  c.replication = ReplicationMode::off;
  CHECK_FALSE(should_replicate(10, c));

  auto s = scripted_fat_tree();
  s.replication = ReplicationMode::short_flows;
  Simulator sim(s);
  sim.add_flow(flow(0, 15, 68));
  sim.add_flow(flow(1, 14, 69));
  const auto r = sim.run();
  CHECK(r.records[0].replicated);
  CHECK_FALSE(r.records[1].replicated);
  CHECK(r.flows.size() == 3);
  CHECK(r.stats.replicas == 1);
  CHECK(r.records[0].replica_pkts_sent == 68);
}

TEST_CASE("replica tuple differs only in destination port") {
  FiveTuple t{1, 2, 3000, 80, 6};
  const auto twin = replica_tuple(t);
  CHECK(twin.src_host == t.src_host);
  CHECK(twin.dst_host == t.dst_host);
  CHECK(twin.src_port == t.src_port);
  CHECK(twin.protocol == t.protocol);
  CHECK(twin.dst_port != t.dst_port);
}

TEST_CASE("no twins without replication") {
  const auto r = run(busy(0.3));
  CHECK(r.stats.replicas == 0);
  for (const auto& f : r.flows) CHECK_FALSE(f.replica);
  for (const auto& rec : r.records) CHECK_FALSE(rec.replicated);
}

TEST_CASE("first finisher stamps the record") {
  auto c = busy(0.6, 3);
  c.replication = ReplicationMode::short_flows;
  const auto r = run(c);
  std::map<std::uint64_t, std::vector<const FlowCounters*>> by_logical;
  for (const auto& f : r.flows) by_logical[f.logical_id].push_back(&f);
  int replica_wins = 0, checked = 0;
  for (const auto& rec : r.records) {
    const auto& inst = by_logical[rec.flow_id];
    if (!rec.replicated) {
      CHECK(inst.size() == 1);
      continue;
    }
    REQUIRE(inst.size() == 2);
    CHECK(rec.size_pkts <= c.short_flow_threshold);
    if (!rec.completed) continue;
    double best = 1e300;
    bool replica_best = false;
    for (const auto* f : inst)
      if (f->completed && f->finish_s < best) {
        best = f->finish_s;
        replica_best = f->replica;
      }
    CHECK(rec.finish_s == best);
    CHECK(rec.winner_was_replica == replica_best);
    CHECK(rec.fct_s == doctest::Approx(best - rec.start_s));
    replica_wins += rec.winner_was_replica;
    ++checked;
  }
  CHECK(checked > 20);
  CHECK(replica_wins > 0);
  CHECK(replica_wins < checked);
}

TEST_CASE("packet conservation") {
  for (auto c : {busy(0.7, 1), busy(0.4, 2)}) {
    c.replication = ReplicationMode::short_flows;
    check_conservation(run(c));
  }
  // Cut short: packets still in flight at the horizon.
  auto c = busy(0.7, 5);
  c.drain_timeout_s = 0.0;
  const auto r = run(c);
  CHECK(r.stats.data_in_flight > 0);
  CHECK_FALSE(r.stats.drained);
  CHECK(r.stats.incomplete > 0);
  check_conservation(r);
}

TEST_CASE("sent never exceeds size plus retransmissions") {
  auto c = busy(0.8, 4);
  c.replication = ReplicationMode::short_flows;
  const auto r = run(c);
  std::map<std::uint64_t, std::uint32_t> size;
  for (const auto& rec : r.records) size[rec.flow_id] = rec.size_pkts;
  for (const auto& f : r.flows) {
    CHECK(f.injected - f.retransmitted <= size[f.logical_id]);
    if (f.completed) CHECK(f.injected - f.retransmitted == size[f.logical_id]);
  }
}

TEST_CASE("runs are deterministic") {
  auto c = busy(0.6, 7);
  c.replication = ReplicationMode::short_flows;
  const auto a = run(c);
  const auto b = run(c);
  CHECK(a.records == b.records);
  CHECK(a.stats.trace_hash == b.stats.trace_hash);
  CHECK(a.stats.events == b.stats.events);
  c.seed = 8;
  CHECK(run(c).stats.trace_hash != a.stats.trace_hash);
}

TEST_CASE("switch queues respect the buffer") {
  auto c = busy(0.8, 2);
  c.links.buffer_pkts = 40;
  const auto r = run(c);
  Simulator probe(c);
  CHECK(r.stats.max_switch_occupancy <= 40);
  CHECK(r.stats.max_switch_occupancy == 40);
  CHECK(r.stats.data_dropped > 0);
  for (std::size_t l = 0; l < r.links.size(); ++l)
    if (!probe.topology().link(static_cast<LinkId>(l)).host_egress) CHECK(r.links[l].max_occupancy <= 40);
}

TEST_CASE("unlimited buffers never drop") {
  auto c = busy(0.8, 2);
  c.links.buffer_pkts = kUnlimitedBuffer;
  c.rto_s = 5.0;  // no spurious timeouts: only losses may trigger retransmission
  const auto r = run(c);
  CHECK(r.stats.data_dropped == 0);
  CHECK(r.stats.acks_dropped == 0);
  CHECK(r.stats.retransmitted == 0);
  CHECK(r.stats.incomplete == 0);
}

TEST_CASE("load below one keeps normalized FCT at least one") {
  const auto r = run(busy(0.5, 9));
  for (const auto& rec : r.records)
    if (rec.completed) {
      CHECK(rec.norm_fct >= 1.0 - 1e-9);
      CHECK(rec.finish_s > rec.start_s);
    }
}

TEST_CASE("dctcp-like marks and backs off") {
  auto c = busy(0.7, 1);
  c.protocol = Protocol::dctcp_like;
  const auto d = run(c);
  c.protocol = Protocol::tcp;
  const auto t = run(c);
  CHECK(d.stats.ecn_marks > 0);
  CHECK(t.stats.ecn_marks == 0);
  CHECK(d.stats.data_dropped < t.stats.data_dropped);
}

TEST_CASE("zero duration yields no flows") {
  auto c = busy(0.5);
  c.duration_s = 0.0;
  const auto r = run(c);
  CHECK(r.records.empty());
  CHECK(r.stats.drained);
}

TEST_CASE("toy scenario") {
  auto c = preset("toy-fig3");
  c.duration_s = 2.0;
  const auto with_large = run(c);
  c.toy_large_flow = false;
  const auto without = run(c);
  REQUIRE(!with_large.records.empty());
  for (const auto& rec : with_large.records) {
    CHECK(rec.src == 0);
    CHECK(rec.dst == 2);
    CHECK(rec.size_pkts == c.toy_short_size);
  }
  double a = 0, b = 0;
  for (const auto& rec : with_large.records) a += rec.fct_s;
  for (const auto& rec : without.records) b += rec.fct_s;
  CHECK(a / with_large.records.size() > b / without.records.size());
}

TEST_CASE("scripted flow validation") {
  Simulator sim(scripted_fat_tree());
  CHECK_THROWS(sim.add_flow(flow(0, 0, 5)));
  CHECK_THROWS(sim.add_flow(flow(0, 99, 5)));
  CHECK_THROWS(sim.add_flow(flow(0, 1, 0)));
  CHECK_THROWS(sim.add_flow(flow(0, 1, 5, -1.0)));
  sim.add_flow(flow(0, 1, 5));
  sim.run();
  CHECK_THROWS_AS(sim.run(), std::logic_error);
}

TEST_CASE("background flows are not reported") {
  auto c = two_host();
  Simulator sim(c);
  auto bg = flow(0, 1, 1);
  bg.background = true;
  sim.add_flow(bg);
  sim.add_flow(flow(0, 1, 20, 0.01));
  const auto r = sim.run();
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].size_pkts == 20);
  CHECK(r.records[0].norm_fct > 1.0);
}

TEST_CASE("explicit source port fixes the path") {
  Simulator a(scripted_fat_tree());
  auto f = flow(0, 15, 30);
  f.src_port = 5555;
  a.add_flow(f);
  const auto ra = a.run();
  EcmpRouter router(a.topology(), a.config().seed);
  CHECK(ra.flows[0].path == router.route(FiveTuple{0, 15, 5555, 80, 6}));
  CHECK(ra.records[0].norm_fct == doctest::Approx(1.0));
  CHECK(ra.records[0].fct_s == doctest::Approx(best_for(a, FiveTuple{0, 15, 5555, 80, 6}, 30)));
}
