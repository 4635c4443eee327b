#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace repflow {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using HostId = std::uint32_t;

inline constexpr std::uint32_t kUnlimitedBuffer = UINT32_MAX;

enum class NodeKind : std::uint8_t { host, edge, aggregation, core };

struct LinkParams {
  double link_mbps = 100.0;
  double delay_s = 10e-6;
  std::uint32_t buffer_pkts = 100;
  // Rate of host access links; defaults to link_mbps.
  std::optional<double> host_link_mbps;
};

struct Node {
  NodeKind kind = NodeKind::host;
  std::uint32_t pod = 0;
  std::vector<LinkId> out_links;  // ascending link id
};

// Directed link with an egress queue at `from`.
struct Link {
  NodeId from = 0;
  NodeId to = 0;
  double rate_pps = 0.0;        // 1500-byte packets per second
  double propagation_s = 0.0;
  std::uint32_t buffer_pkts = 0;
  bool host_egress = false;     // queue lives in a host NIC, never drops

  double data_tx_time() const;
  double ack_tx_time() const;
};

struct FiveTuple {
  std::uint32_t src_host = 0;
  std::uint32_t dst_host = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 6;

  FiveTuple reversed() const { return {dst_host, src_host, dst_port, src_port, protocol}; }
  std::uint64_t hash() const;

  friend bool operator==(const FiveTuple&, const FiveTuple&) = default;
};

using Path = std::vector<LinkId>;

// Hosts occupy node ids [0, host_count()); switches follow.
class Topology {
 public:
  // p-pod fat-tree: p^3/4 hosts, p^2 edge+aggregation switches, p^2/4 cores.
  static Topology fat_tree(unsigned pods, const LinkParams& params);
  // Two edge switches with two hosts each, joined by two upper switches.
  static Topology toy_fig3(const LinkParams& params);
  // Two hosts joined by one bidirectional link.
  static Topology two_host(const LinkParams& params);

  std::uint32_t host_count() const noexcept { return host_count_; }
  std::uint32_t node_count() const noexcept { return static_cast<std::uint32_t>(nodes_.size()); }
  std::uint32_t switch_count() const noexcept { return node_count() - host_count_; }
  std::uint32_t count(NodeKind kind) const;
  unsigned pods() const noexcept { return pods_; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Link& link(LinkId id) const { return links_.at(id); }
  const std::vector<Link>& links() const noexcept { return links_; }

  // Hop distance from `node` to host `dst`.
  std::uint32_t distance(NodeId node, HostId dst) const;

  // Out-links of `at` that lie on some shortest path to `dst`, in link order.
  std::vector<LinkId> next_hops(NodeId at, HostId dst) const;

  std::vector<Path> equal_cost_paths(HostId src, HostId dst) const;

  // Uplink of a host.
  LinkId host_uplink(HostId h) const;

  // Path transit time pieces.
  double path_propagation(const Path& path) const;

 private:
  Topology() = default;
  NodeId add_node(NodeKind kind, std::uint32_t pod);
  void connect(NodeId a, NodeId b, double mbps, const LinkParams& params);
  void finalize();

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::uint32_t host_count_ = 0;
  unsigned pods_ = 0;
  std::vector<std::uint16_t> distance_;  // host-major: distance_[dst * nodes + node]
};

// Per-switch ECMP: every switch hashes the five-tuple with its own salt and
// picks next_hops()[hash % n]. The hash is the SplitMix64 finalizer folded
// over the tuple fields, then mixed with the switch salt.
class EcmpRouter {
 public:
  EcmpRouter(const Topology& topo, std::uint64_t seed);

  Path route(const FiveTuple& tuple) const;
  std::uint64_t salt(NodeId node) const { return salts_.at(node); }

 private:
  const Topology* topo_;
  std::vector<std::uint64_t> salts_;
};

std::string to_string(NodeKind kind);

}  // namespace repflow
