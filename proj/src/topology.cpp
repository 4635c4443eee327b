#include "repflow/topology.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "repflow/rng.hpp"
#include "repflow/workload.hpp"

namespace repflow {

namespace {

constexpr std::uint16_t kUnreachable = UINT16_MAX;

double mbps_to_pps(double mbps) { return mbps * 1e6 / (8.0 * kPacketBytes); }

}  // namespace

double Link::data_tx_time() const { return 1.0 / rate_pps; }
double Link::ack_tx_time() const {
  return static_cast<double>(kAckBytes) / kPacketBytes / rate_pps;
}

std::uint64_t FiveTuple::hash() const {
  std::uint64_t h = mix64((static_cast<std::uint64_t>(src_host) << 32) | dst_host);
  h = mix64(h ^ ((static_cast<std::uint64_t>(src_port) << 24) |
                 (static_cast<std::uint64_t>(dst_port) << 8) | protocol));
  return h;
}

NodeId Topology::add_node(NodeKind kind, std::uint32_t pod) {
  nodes_.push_back(Node{kind, pod, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Topology::connect(NodeId a, NodeId b, double mbps, const LinkParams& params) {
  auto add = [&](NodeId from, NodeId to) {
    Link l;
    l.from = from;
    l.to = to;
    l.rate_pps = mbps_to_pps(mbps);
    l.propagation_s = params.delay_s;
    l.host_egress = nodes_[from].kind == NodeKind::host;
    l.buffer_pkts = l.host_egress ? kUnlimitedBuffer : params.buffer_pkts;
    links_.push_back(l);
    nodes_[from].out_links.push_back(static_cast<LinkId>(links_.size() - 1));
  };
  add(a, b);
  add(b, a);
}

void Topology::finalize() {
  const auto n = node_count();
  distance_.assign(static_cast<std::size_t>(host_count_) * n, kUnreachable);
  std::deque<NodeId> frontier;
  for (HostId dst = 0; dst < host_count_; ++dst) {
    auto* dist = distance_.data() + static_cast<std::size_t>(dst) * n;
    dist[dst] = 0;
    frontier.assign(1, dst);
    // Links come in pairs, so reverse adjacency equals forward adjacency.
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      // Hosts other than dst are never transit nodes.
      if (u != dst && nodes_[u].kind == NodeKind::host) continue;
      for (LinkId l : nodes_[u].out_links) {
        const NodeId v = links_[l].to;
        if (dist[v] == kUnreachable) {
          dist[v] = static_cast<std::uint16_t>(dist[u] + 1);
          frontier.push_back(v);
        }
      }
    }
  }
}

Topology Topology::fat_tree(unsigned pods, const LinkParams& params) {
  if (pods < 2 || pods % 2 != 0)
    throw std::invalid_argument("fat-tree pod count must be even and >= 2");
  Topology t;
  t.pods_ = pods;
  const unsigned half = pods / 2;
  const unsigned hosts_per_pod = half * half;
  const double host_mbps = params.host_link_mbps.value_or(params.link_mbps);

  t.host_count_ = pods * hosts_per_pod;
  for (unsigned h = 0; h < t.host_count_; ++h) t.add_node(NodeKind::host, h / hosts_per_pod);
  std::vector<NodeId> edge(pods * half), agg(pods * half), core(half * half);
  for (unsigned p = 0; p < pods; ++p)
    for (unsigned i = 0; i < half; ++i) edge[p * half + i] = t.add_node(NodeKind::edge, p);
  for (unsigned p = 0; p < pods; ++p)
    for (unsigned i = 0; i < half; ++i) agg[p * half + i] = t.add_node(NodeKind::aggregation, p);
  for (unsigned c = 0; c < half * half; ++c) core[c] = t.add_node(NodeKind::core, 0);

  for (unsigned h = 0; h < t.host_count_; ++h) {
    const unsigned pod = h / hosts_per_pod;
    const unsigned e = (h % hosts_per_pod) / half;
    t.connect(h, edge[pod * half + e], host_mbps, params);
  }
  for (unsigned p = 0; p < pods; ++p)
    for (unsigned e = 0; e < half; ++e)
      for (unsigned a = 0; a < half; ++a)
        t.connect(edge[p * half + e], agg[p * half + a], params.link_mbps, params);
  // Aggregation switch a of every pod uplinks to cores [a*half, (a+1)*half).
  for (unsigned p = 0; p < pods; ++p)
    for (unsigned a = 0; a < half; ++a)
      for (unsigned c = 0; c < half; ++c)
        t.connect(agg[p * half + a], core[a * half + c], params.link_mbps, params);

  for (auto& n : t.nodes_) std::sort(n.out_links.begin(), n.out_links.end());
  t.finalize();
  return t;
}

Topology Topology::toy_fig3(const LinkParams& params) {
  Topology t;
  t.pods_ = 0;
  t.host_count_ = 4;
  const double host_mbps = params.host_link_mbps.value_or(params.link_mbps);
  for (unsigned h = 0; h < 4; ++h) t.add_node(NodeKind::host, 0);
  const NodeId s1 = t.add_node(NodeKind::edge, 0);
  const NodeId s2 = t.add_node(NodeKind::edge, 0);
  const NodeId s3 = t.add_node(NodeKind::aggregation, 0);
  const NodeId s4 = t.add_node(NodeKind::aggregation, 0);
  // H1, H2 under S1; H3, H4 under S2.
  t.connect(0, s1, host_mbps, params);
  t.connect(1, s1, host_mbps, params);
  t.connect(2, s2, host_mbps, params);
  t.connect(3, s2, host_mbps, params);
  t.connect(s1, s3, params.link_mbps, params);
  t.connect(s1, s4, params.link_mbps, params);
  t.connect(s2, s3, params.link_mbps, params);
  t.connect(s2, s4, params.link_mbps, params);
  t.finalize();
  return t;
}

Topology Topology::two_host(const LinkParams& params) {
  Topology t;
  t.host_count_ = 2;
  t.add_node(NodeKind::host, 0);
  t.add_node(NodeKind::host, 0);
  t.connect(0, 1, params.host_link_mbps.value_or(params.link_mbps), params);
  t.finalize();
  return t;
}

std::uint32_t Topology::count(NodeKind kind) const {
  return static_cast<std::uint32_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [kind](const Node& n) { return n.kind == kind; }));
}

std::uint32_t Topology::distance(NodeId node, HostId dst) const {
  if (dst >= host_count_ || node >= node_count()) throw std::out_of_range("unknown node or host id");
  return distance_[static_cast<std::size_t>(dst) * node_count() + node];
}

std::vector<LinkId> Topology::next_hops(NodeId at, HostId dst) const {
  std::vector<LinkId> out;
  const auto here = distance(at, dst);
  if (here == 0 || here == kUnreachable) return out;
  for (LinkId l : nodes_[at].out_links) {
    const NodeId v = links_[l].to;
    if (nodes_[v].kind == NodeKind::host && v != dst) continue;
    if (distance(v, dst) + 1 == here) out.push_back(l);
  }
  return out;
}

std::vector<Path> Topology::equal_cost_paths(HostId src, HostId dst) const {
  if (src >= host_count_ || dst >= host_count_) throw std::out_of_range("unknown host id");
  if (src == dst) throw std::invalid_argument("equal_cost_paths: src == dst");
  std::vector<Path> paths;
  Path current;
  auto walk = [&](auto&& self, NodeId at) -> void {
    if (at == dst) {
      paths.push_back(current);
      return;
    }
    for (LinkId l : next_hops(at, dst)) {
      current.push_back(l);
      self(self, links_[l].to);
      current.pop_back();
    }
  };
  walk(walk, src);
  return paths;
}

LinkId Topology::host_uplink(HostId h) const {
  if (h >= host_count_) throw std::out_of_range("unknown host id");
  return nodes_[h].out_links.front();
}

double Topology::path_propagation(const Path& path) const {
  double total = 0.0;
  for (LinkId l : path) total += links_[l].propagation_s;
  return total;
}

EcmpRouter::EcmpRouter(const Topology& topo, std::uint64_t seed) : topo_(&topo) {
  salts_.resize(topo.node_count());
  const std::uint64_t base = mix64(seed ^ 0xec3b9a5e1f0d2c47ULL);
  for (NodeId n = 0; n < topo.node_count(); ++n) salts_[n] = mix64(base + n);
}

Path EcmpRouter::route(const FiveTuple& tuple) const {
  const auto& topo = *topo_;
  if (tuple.src_host >= topo.host_count() || tuple.dst_host >= topo.host_count() ||
      tuple.src_host == tuple.dst_host)
    throw std::invalid_argument("ecmp_route: tuple must join two distinct hosts");
  const std::uint64_t key = tuple.hash();
  Path path;
  NodeId at = tuple.src_host;
  while (at != tuple.dst_host) {
    const auto hops = topo.next_hops(at, tuple.dst_host);
    const LinkId chosen =
        hops.size() == 1 ? hops.front() : hops[mix64(key ^ salts_[at]) % hops.size()];
    path.push_back(chosen);
    at = topo.link(chosen).to;
  }
  return path;
}

std::string to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::host: return "host";
    case NodeKind::edge: return "edge";
    case NodeKind::aggregation: return "aggregation";
    case NodeKind::core: return "core";
  }
  return "unknown";
}

}  // namespace repflow
