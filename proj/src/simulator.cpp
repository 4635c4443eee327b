#include "repflow/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "repflow/rng.hpp"
#include "repflow/transport.hpp"
#include "repflow/workload.hpp"

namespace repflow {

namespace {

constexpr std::uint32_t kNone = UINT32_MAX;
constexpr std::uint32_t kBackgroundSize = UINT32_MAX;
constexpr std::uint16_t kFirstSrcPort = 1024;
constexpr std::uint16_t kServicePort = 80;
constexpr unsigned kMaxBackoff = 64;

// Stream ids for the random generators; hosts use their own id.
constexpr std::uint64_t kToyStream = 1ULL << 40;

enum class EventKind : std::uint8_t {
  host_arrival,   // a = host
  toy_arrival,
  scripted_start, // a = index into scripted flows
  tx_done,        // a = link
  arrive,         // a = packet
  rto,            // a = flow instance
};

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  std::uint32_t a;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    return std::tie(x.time, x.seq) > std::tie(y.time, y.seq);
  }
};

struct Packet {
  std::uint32_t instance;
  std::uint32_t seq;  // data: sequence number; ack: cumulative ack
  std::uint16_t hop;
  bool ack;
  bool ce;
};

struct Port {
  std::deque<std::uint32_t> queue;
  bool busy = false;
  std::uint32_t in_service = kNone;
};

struct Instance {
  std::uint32_t logical;
  bool replica;
  bool background;
  FiveTuple tuple;
  Path fwd, rev;
  std::uint32_t size;
  std::uint64_t snd_una = 0, snd_nxt = 0, max_sent = 0, rcv_next = 0;
  CongestionWindow cwnd;
  double rto;
  double rto_deadline = 0.0;
  unsigned backoff = 1;  // doubles per consecutive timeout
  bool rto_pending = false;
  bool done = false;
  std::vector<bool> out_of_order;  // received above rcv_next, by seq
  double finish = 0.0;
  std::uint64_t injected = 0, delivered = 0, dropped = 0, retransmitted = 0, timeouts = 0;
};

struct Logical {
  HostId src, dst;
  std::uint32_t size;
  double start;
  bool background;
  std::uint32_t original = kNone;
  std::uint32_t replica = kNone;
  bool done = false;
  double finish = 0.0;
  bool winner_replica = false;
};

double base_rtt(const Topology& topo, const Path& fwd, const Path& rev) {
  double t = 0.0;
  for (LinkId l : fwd) t += topo.link(l).data_tx_time() + topo.link(l).propagation_s;
  for (LinkId l : rev) t += topo.link(l).ack_tx_time() + topo.link(l).propagation_s;
  return t;
}

// Queueing delay of a packet that finds every switch buffer on the path full.
double full_queue_delay(const Topology& topo, const Path& fwd, std::uint32_t buffer_pkts) {
  if (buffer_pkts == kUnlimitedBuffer) return 0.0;
  double t = 0.0;
  for (LinkId l : fwd)
    if (!topo.link(l).host_egress) t += buffer_pkts * topo.link(l).data_tx_time();
  return t;
}

}  // namespace

bool should_replicate(std::uint32_t size_pkts, const ScenarioConfig& config) {
  return config.replication == ReplicationMode::short_flows &&
         size_pkts <= config.short_flow_threshold;
}

FiveTuple replica_tuple(const FiveTuple& original) {
  FiveTuple t = original;
  t.dst_port = static_cast<std::uint16_t>(original.dst_port + 1);
  return t;
}

Topology build_topology(const ScenarioConfig& config) {
  switch (config.topology) {
    case TopologyKind::fat_tree: return Topology::fat_tree(config.pods, config.links);
    case TopologyKind::toy_fig3: return Topology::toy_fig3(config.links);
    case TopologyKind::two_host: return Topology::two_host(config.links);
  }
  throw std::invalid_argument("unknown topology");
}

std::vector<HopTiming> hop_timings(const Topology& topo, const Path& path) {
  std::vector<HopTiming> out;
  out.reserve(path.size());
  for (LinkId l : path) {
    const auto& link = topo.link(l);
    out.push_back({link.data_tx_time(), link.ack_tx_time(), link.propagation_s});
  }
  return out;
}

struct Simulator::Impl {
  explicit Impl(ScenarioConfig c)
      : config(std::move(c)), topo((config.validate(), build_topology(config))),
        router(topo, config.seed) {
    if (config.pattern == TrafficPattern::random_pairs) {
      auto dist = std::make_shared<const FlowSizeDistribution>(resolve_distribution(config.workload));
      traffic.dist = dist;
      traffic.load = config.load;
    }
    ecn = config.protocol == Protocol::dctcp_like;
    ecn_threshold = config.effective_ecn_threshold();
  }

  ScenarioConfig config;
  Topology topo;
  EcmpRouter router;
  TrafficSpec traffic;
  bool ecn = false;
  std::uint32_t ecn_threshold = 0;

  std::vector<FlowRequest> scripted;
  std::set<std::tuple<std::uint64_t, std::uint32_t, bool>> drops;

  // run state
  double now = 0.0;
  std::uint64_t next_seq = 0;
  std::vector<Event> heap;
  std::vector<Packet> packets;
  std::vector<std::uint32_t> free_packets;
  std::vector<Port> ports;
  std::vector<LinkCounters> link_stats;
  bool ran = false;
  std::vector<Instance> instances;
  std::vector<Logical> logicals;
  std::vector<Rng> host_rngs;
  std::vector<std::uint16_t> next_port;
  std::optional<Rng> toy_rng;
  std::uint64_t pending_generators = 0;
  std::uint64_t active_foreground = 0;
  RunStats stats;

  void schedule(double t, EventKind kind, std::uint32_t a) {
    heap.push_back(Event{t, next_seq++, kind, a});
    std::push_heap(heap.begin(), heap.end(), EventLater{});
  }

  std::uint32_t new_packet(const Packet& p) {
    if (!free_packets.empty()) {
      const auto id = free_packets.back();
      free_packets.pop_back();
      packets[id] = p;
      return id;
    }
    packets.push_back(p);
    return static_cast<std::uint32_t>(packets.size() - 1);
  }

  void free_packet(std::uint32_t id) { free_packets.push_back(id); }

  void start_tx(LinkId l, std::uint32_t pkt) {
    auto& port = ports[l];
    port.busy = true;
    port.in_service = pkt;
    const auto& link = topo.link(l);
    const double tx = packets[pkt].ack ? link.ack_tx_time() : link.data_tx_time();
    link_stats[l].busy_s += tx;
    schedule(now + tx, EventKind::tx_done, l);
  }

  void drop(std::uint32_t pkt) {
    const auto& p = packets[pkt];
    if (p.ack) {
      ++stats.acks_dropped;
    } else {
      ++stats.data_dropped;
      ++instances[p.instance].dropped;
    }
    free_packet(pkt);
  }

  void enqueue(LinkId l, std::uint32_t pkt) {
    auto& port = ports[l];
    if (!port.busy) {
      start_tx(l, pkt);
      return;
    }
    const auto& link = topo.link(l);
    if (!link.host_egress) {
      if (port.queue.size() >= link.buffer_pkts) {
        ++link_stats[l].dropped;
        drop(pkt);
        return;
      }
      if (ecn && !packets[pkt].ack && port.queue.size() >= ecn_threshold) {
        packets[pkt].ce = true;
        ++stats.ecn_marks;
      }
    }
    port.queue.push_back(pkt);
    const auto occ = static_cast<std::uint32_t>(port.queue.size());
    link_stats[l].max_occupancy = std::max(link_stats[l].max_occupancy, occ);
    if (!link.host_egress) stats.max_switch_occupancy = std::max(stats.max_switch_occupancy, occ);
  }

  void on_tx_done(LinkId l) {
    auto& port = ports[l];
    const auto pkt = port.in_service;
    ++link_stats[l].transmitted;
    ++packets[pkt].hop;
    schedule(now + topo.link(l).propagation_s, EventKind::arrive, pkt);
    if (port.queue.empty()) {
      port.busy = false;
      port.in_service = kNone;
    } else {
      const auto next = port.queue.front();
      port.queue.pop_front();
      start_tx(l, next);
    }
  }

  void arm_rto(Instance& inst, std::uint32_t id) {
    inst.rto_deadline = now + inst.rto * inst.backoff;
    if (!inst.rto_pending) {
      inst.rto_pending = true;
      schedule(inst.rto_deadline, EventKind::rto, id);
    }
  }

  void send_available(std::uint32_t id) {
    auto& inst = instances[id];
    const std::uint64_t limit = std::min<std::uint64_t>(inst.size, inst.snd_una + inst.cwnd.window());
    bool sent = false;
    while (inst.snd_nxt < limit) {
      const auto seq = static_cast<std::uint32_t>(inst.snd_nxt);
      if (inst.snd_nxt < inst.max_sent) {
        ++inst.retransmitted;
        ++stats.retransmitted;
      }
      ++inst.snd_nxt;
      inst.max_sent = std::max(inst.max_sent, inst.snd_nxt);
      ++inst.injected;
      ++stats.data_injected;
      const auto pkt = new_packet(Packet{id, seq, 0, false, false});
      enqueue(inst.fwd.front(), pkt);
      sent = true;
    }
    if (sent && !inst.rto_pending) arm_rto(inst, id);
  }

  std::uint32_t add_instance(std::uint32_t logical, bool replica, const FiveTuple& tuple) {
    const auto& lg = logicals[logical];
    Instance inst{logical,
                  replica,
                  lg.background,
                  tuple,
                  router.route(tuple),
                  router.route(tuple.reversed()),
                  lg.size,
                  0, 0, 0, 0,
                  CongestionWindow(config.transport()),
                  0.0};
    inst.rto = effective_rto(config, base_rtt(topo, inst.fwd, inst.rev),
                             full_queue_delay(topo, inst.fwd, config.links.buffer_pkts));
    instances.push_back(std::move(inst));
    if (!lg.background) ++active_foreground;
    return static_cast<std::uint32_t>(instances.size() - 1);
  }

  void start_flow(HostId src, HostId dst, std::uint32_t size, bool background,
                  std::optional<std::uint16_t> src_port) {
    const auto logical_id = static_cast<std::uint32_t>(logicals.size());
    logicals.push_back(Logical{src, dst, size, now, background});
    FiveTuple tuple{src, dst, src_port.value_or(next_port[src]++), kServicePort, 6};
    const auto orig = add_instance(logical_id, false, tuple);
    logicals[logical_id].original = orig;
    std::uint32_t rep = kNone;
    if (!background && should_replicate(size, config)) {
      rep = add_instance(logical_id, true, replica_tuple(tuple));
      logicals[logical_id].replica = rep;
      ++stats.replicas;
    }
    send_available(orig);
    if (rep != kNone) send_available(rep);
  }

  void complete(std::uint32_t id) {
    auto& inst = instances[id];
    inst.done = true;
    inst.finish = now;
    if (!inst.background) --active_foreground;
    auto& lg = logicals[inst.logical];
    if (!lg.done) {
      lg.done = true;
      lg.finish = now;
      lg.winner_replica = inst.replica;
    }
  }

  void on_data_at_receiver(std::uint32_t pkt) {
    const auto p = packets[pkt];
    auto& inst = instances[p.instance];
    if (!drops.empty()) {
      auto it = drops.find({inst.logical, p.seq, inst.replica});
      if (it != drops.end()) {
        drops.erase(it);
        drop(pkt);
        return;
      }
    }
    ++inst.delivered;
    ++stats.data_delivered;
    if (p.seq == inst.rcv_next) {
      ++inst.rcv_next;
      while (inst.rcv_next < inst.out_of_order.size() && inst.out_of_order[inst.rcv_next]) ++inst.rcv_next;
    } else if (p.seq > inst.rcv_next) {
      if (inst.out_of_order.size() <= p.seq) inst.out_of_order.resize(p.seq + 1);
      inst.out_of_order[p.seq] = true;
    }
    free_packet(pkt);
    const auto ack = new_packet(Packet{p.instance, static_cast<std::uint32_t>(inst.rcv_next), 0, true, p.ce});
    ++stats.acks_sent;
    enqueue(inst.rev.front(), ack);
  }

  void on_ack_at_sender(std::uint32_t pkt) {
    const auto p = packets[pkt];
    free_packet(pkt);
    const auto id = p.instance;
    auto& inst = instances[id];
    if (inst.done || p.seq <= inst.snd_una) return;
    const auto newly = static_cast<std::uint32_t>(p.seq - inst.snd_una);
    inst.snd_una = p.seq;
    inst.backoff = 1;
    if (inst.snd_nxt < inst.snd_una) inst.snd_nxt = inst.snd_una;
    inst.cwnd.on_ack(newly, p.ce ? newly : 0, inst.snd_una, inst.snd_nxt);
    if (inst.snd_una >= inst.size) {
      complete(id);
      return;
    }
    arm_rto(inst, id);
    send_available(id);
  }

  void on_arrive(std::uint32_t pkt) {
    const auto& p = packets[pkt];
    const auto& inst = instances[p.instance];
    const Path& path = p.ack ? inst.rev : inst.fwd;
    if (p.hop < path.size()) {
      enqueue(path[p.hop], pkt);
    } else if (p.ack) {
      on_ack_at_sender(pkt);
    } else {
      on_data_at_receiver(pkt);
    }
  }

  void on_rto(std::uint32_t id) {
    auto& inst = instances[id];
    inst.rto_pending = false;
    if (inst.done) return;
    if (now < inst.rto_deadline) {
      inst.rto_pending = true;
      schedule(inst.rto_deadline, EventKind::rto, id);
      return;
    }
    ++inst.timeouts;
    ++stats.timeouts;
    inst.snd_nxt = inst.snd_una;
    inst.cwnd.on_timeout();
    inst.backoff = std::min(inst.backoff * 2, kMaxBackoff);
    arm_rto(inst, id);
    send_available(id);
  }

  void on_host_arrival(HostId host) {
    --pending_generators;
    auto& rng = host_rngs[host];
    const auto size = sample_flow_size(*traffic.dist, rng);
    auto dst = static_cast<HostId>(rng.below(topo.host_count() - 1));
    if (dst >= host) ++dst;
    start_flow(host, dst, size, false, std::nullopt);
    const double next = now + next_interarrival(traffic, rng);
    if (next < config.duration_s) {
      ++pending_generators;
      schedule(next, EventKind::host_arrival, host);
    }
  }

  void on_toy_arrival() {
    --pending_generators;
    start_flow(0, 2, config.toy_short_size, false, std::nullopt);
    const double next = now + exponential_variate(1.0 / config.toy_short_interval_s, *toy_rng);
    if (next < config.duration_s) {
      ++pending_generators;
      schedule(next, EventKind::toy_arrival, 0);
    }
  }

  void seed_traffic() {
    for (std::uint32_t i = 0; i < scripted.size(); ++i) {
      if (!scripted[i].background) ++pending_generators;
      schedule(scripted[i].start_s, EventKind::scripted_start, i);
    }
    if (config.pattern == TrafficPattern::random_pairs) {
      traffic.link_capacity_pps = topo.link(topo.host_uplink(0)).rate_pps;
      traffic.validate();
      host_rngs.reserve(topo.host_count());
      for (HostId h = 0; h < topo.host_count(); ++h) {
        host_rngs.emplace_back(config.seed, h);
        const double first = next_interarrival(traffic, host_rngs.back());
        if (first < config.duration_s) {
          ++pending_generators;
          schedule(first, EventKind::host_arrival, h);
        }
      }
    } else if (config.pattern == TrafficPattern::toy_fig3) {
      toy_rng.emplace(config.seed, kToyStream);
      if (config.toy_large_flow) {
        FlowRequest large;
        large.src = 1;
        large.dst = 3;
        large.size_pkts = kBackgroundSize;
        large.background = true;
        scripted.push_back(large);
        schedule(0.0, EventKind::scripted_start, static_cast<std::uint32_t>(scripted.size() - 1));
      }
      const double first = exponential_variate(1.0 / config.toy_short_interval_s, *toy_rng);
      if (first < config.duration_s) {
        ++pending_generators;
        schedule(first, EventKind::toy_arrival, 0);
      }
    }
  }

  RunResult run() {
    ports.assign(topo.links().size(), Port{});
    link_stats.assign(topo.links().size(), LinkCounters{});
    next_port.assign(topo.host_count(), kFirstSrcPort);
    seed_traffic();

    const double hard_stop = config.duration_s + config.drain_timeout_s;
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    while (!heap.empty()) {
      if (pending_generators == 0 && active_foreground == 0) break;
      std::pop_heap(heap.begin(), heap.end(), EventLater{});
      const Event ev = heap.back();
      heap.pop_back();
      if (ev.time > hard_stop) {
        stats.drained = false;
        break;
      }
      now = ev.time;
      ++stats.events;
      hash = mix64(hash ^ std::bit_cast<std::uint64_t>(ev.time)) ^
             (static_cast<std::uint64_t>(ev.kind) << 32 | ev.a);
      switch (ev.kind) {
        case EventKind::host_arrival: on_host_arrival(ev.a); break;
        case EventKind::toy_arrival: on_toy_arrival(); break;
        case EventKind::scripted_start: {
          const auto& r = scripted[ev.a];
          if (!r.background) --pending_generators;
          start_flow(r.src, r.dst, r.size_pkts, r.background, r.src_port);
          break;
        }
        case EventKind::tx_done: on_tx_done(ev.a); break;
        case EventKind::arrive: on_arrive(ev.a); break;
        case EventKind::rto: on_rto(ev.a); break;
      }
    }
    stats.trace_hash = mix64(hash);
    stats.end_time_s = now;
    if (active_foreground > 0) stats.drained = false;
    return collect();
  }

  RunResult collect() {
    RunResult out;
    // Packets still allocated are in flight.
    std::vector<std::uint64_t> in_flight(instances.size(), 0);
    {
      std::vector<bool> is_free(packets.size(), false);
      for (auto id : free_packets) is_free[id] = true;
      for (std::size_t i = 0; i < packets.size(); ++i)
        if (!is_free[i] && !packets[i].ack) ++in_flight[packets[i].instance];
    }
    out.flows.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& inst = instances[i];
      FlowCounters fc;
      fc.logical_id = inst.logical;
      fc.replica = inst.replica;
      fc.completed = inst.done;
      fc.finish_s = inst.finish;
      fc.injected = inst.injected;
      fc.delivered = inst.delivered;
      fc.dropped = inst.dropped;
      fc.in_flight = in_flight[i];
      fc.retransmitted = inst.retransmitted;
      fc.timeouts = inst.timeouts;
      fc.path = inst.fwd;
      stats.data_in_flight += in_flight[i];
      out.flows.push_back(std::move(fc));
    }

    std::map<std::pair<std::vector<LinkId>, std::uint32_t>, double> best_cache;
    const auto transport = config.transport();
    for (std::uint32_t id = 0; id < logicals.size(); ++id) {
      const auto& lg = logicals[id];
      if (lg.background) continue;
      FctRecord r;
      r.flow_id = id;
      r.size_pkts = lg.size;
      r.start_s = lg.start;
      r.src = lg.src;
      r.dst = lg.dst;
      r.replicated = lg.replica != kNone;
      if (r.replicated) r.replica_pkts_sent = instances[lg.replica].injected;
      if (lg.done) {
        const auto& orig = instances[lg.winner_replica ? lg.replica : lg.original];
        r.completed = true;
        r.finish_s = lg.finish;
        r.fct_s = lg.finish - lg.start;
        r.winner_was_replica = lg.winner_replica;
        auto key = std::make_pair(orig.fwd, lg.size);
        key.first.insert(key.first.end(), orig.rev.begin(), orig.rev.end());
        auto it = best_cache.find(key);
        if (it == best_cache.end()) {
          const auto fwd = hop_timings(topo, orig.fwd);
          const auto rev = hop_timings(topo, orig.rev);
          const double best =
              best_case_fct(lg.size, fwd, rev, transport.initial_window, transport.max_window);
          it = best_cache.emplace(std::move(key), best).first;
        }
        r.norm_fct = r.fct_s / it->second;
      } else {
        ++stats.incomplete;
      }
      out.records.push_back(r);
    }
    out.links = link_stats;
    out.stats = stats;
    return out;
  }
};

Simulator::Simulator(ScenarioConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulator::~Simulator() = default;

void Simulator::add_flow(const FlowRequest& request) {
  const auto hosts = impl_->topo.host_count();
  if (request.src >= hosts || request.dst >= hosts || request.src == request.dst)
    throw std::invalid_argument("add_flow: flow must join two distinct known hosts");
  if (request.size_pkts == 0) throw std::invalid_argument("add_flow: empty flow");
  if (!(request.start_s >= 0.0)) throw std::invalid_argument("add_flow: negative start time");
  impl_->scripted.push_back(request);
  if (request.background) impl_->scripted.back().size_pkts = kBackgroundSize;
}

void Simulator::drop_once(std::uint64_t logical_id, std::uint32_t seq, bool replica) {
  impl_->drops.insert({logical_id, seq, replica});
}

const Topology& Simulator::topology() const noexcept { return impl_->topo; }
const ScenarioConfig& Simulator::config() const noexcept { return impl_->config; }

RunResult Simulator::run() {
  if (impl_->ran) throw std::logic_error("Simulator::run may only be called once");
  impl_->ran = true;
  return impl_->run();
}

RunResult run(const ScenarioConfig& config) {
  Simulator sim(config);
  return sim.run();
}

}  // namespace repflow
