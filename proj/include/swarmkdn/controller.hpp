#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "swarmkdn/channel.hpp"
#include "swarmkdn/sparql.hpp"
#include "swarmkdn/store.hpp"
#include "swarmkdn/topology.hpp"

namespace swarmkdn {

struct ControllerConfig {
  double alpha = 0.3;
  double congestion_threshold_us = 500.0;
  std::uint16_t rtps_udp_port = 7400;
  std::uint32_t acl_priority_base = 100;
};

/// Switch-to-switch link in one direction.
struct DirectedLink {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  auto operator<=>(const DirectedLink&) const = default;
};

std::string to_string(const DirectedLink& l);

struct LinkWeight {
  double ewma_latency_us = 0.0;
  std::uint64_t last_update = 0;
  std::uint64_t sample_count = 0;
  bool operator==(const LinkWeight&) const = default;
};

/// Per directed switch link EWMA of INT latency samples, seeded with the
/// static link latency. Only links present in the topology have entries.
class LinkWeightTable {
 public:
  LinkWeightTable() = default;
  explicit LinkWeightTable(const Topology& topo);

  bool contains(const DirectedLink& l) const { return weights_.contains(l); }
  const LinkWeight& at(const DirectedLink& l) const;
  double ewma(const DirectedLink& l) const { return at(l).ewma_latency_us; }

  /// ewma' = alpha * sample + (1 - alpha) * ewma.
  void update(const DirectedLink& l, double sample, double alpha, std::uint64_t now);
  void set(const DirectedLink& l, double ewma);

  const std::map<DirectedLink, LinkWeight>& all() const { return weights_; }
  bool operator==(const LinkWeightTable&) const = default;

 private:
  std::map<DirectedLink, LinkWeight> weights_;
};

/// A switch on a path and the port it sends the packet out of.
struct PathHop {
  std::uint32_t switch_id = 0;
  std::uint16_t egress_port = 0;
  bool operator==(const PathHop&) const = default;
};
using Path = std::vector<PathHop>;

/// Minimum total EWMA path from src to dst (Dijkstra). Ties go to fewer hops,
/// then to the lexicographically smallest switch-id sequence. The last hop
/// egresses on final_egress_port. Throws NoPath or UnknownSwitch.
Path shortest_path(const Topology& topo, const LinkWeightTable& weights, std::uint32_t src,
                   std::uint32_t dst, std::uint16_t final_egress_port = 0);

/// Best path from src to every reachable switch under the same order, as
/// switch-id sequences. Paths to different destinations share prefixes.
std::map<std::uint32_t, std::vector<std::uint32_t>> shortest_path_tree(const Topology& topo,
                                                                         const LinkWeightTable& weights,
                                                                         std::uint32_t src);

/// Port on switch a that leads to switch b.
std::uint16_t port_towards(const Topology& topo, std::uint32_t a, std::uint32_t b);

struct MemberInfo {
  std::string host_iri;
  Ipv4Address ip = 0;
  std::uint32_t switch_id = 0;
  std::uint16_t port = 0;
  bool operator==(const MemberInfo&) const = default;
};

/// What one route has programmed on one switch.
struct SwitchProgram {
  std::set<std::uint16_t> ports;
  std::uint16_t group_id = 0;  // 0 when the action is Forward or Drop
  bool deny = false;
  bool operator==(const SwitchProgram&) const = default;
};

struct Route {
  std::string source_host;  // host id
  std::string target;       // "group:<swarm>" or "host:<id>"
  bool multicast = true;
  AclMatch match;
  std::uint32_t priority = 0;
  std::map<std::string, Path> member_paths;  // member host id -> path
  std::map<std::uint32_t, SwitchProgram> installed;
  std::uint64_t generation = 0;
};

class RouteState {
 public:
  using Key = std::pair<std::string, std::string>;

  const Route* find(const Key& k) const;
  Route* find(const Key& k);
  Route& upsert(const Key& k);
  const std::map<Key, Route>& all() const { return routes_; }
  std::map<Key, Route>& all() { return routes_; }
  bool empty() const { return routes_.empty(); }

 private:
  std::map<Key, Route> routes_;
};

struct WriteAction {
  WriteRequest request;
  std::uint64_t delay_us = 0;  // applied this long after the action is issued
  bool operator==(const WriteAction&) const = default;
};

struct LogAction {
  std::string message;
  bool operator==(const LogAction&) const = default;
};

using ControlAction = std::variant<WriteAction, PacketOut, LogAction>;

/// Control-plane applications over the dynamic knowledge graph: swarm
/// multicast access control, INT-driven adaptive routing and
/// capability-aware node selection. Single-threaded; the controller is the
/// only writer of its store.
class Controller {
 public:
  explicit Controller(ControllerConfig config = {});

  const ControllerConfig& config() const { return config_; }
  const TripleStore& store() const { return store_; }
  const LinkWeightTable& weights() const { return weights_; }
  const RouteState& routes() const { return routes_; }
  const Topology& topology() const { return topology_; }

  /// Loads the topology and host records into an empty graph and seeds
  /// link weights with static latencies. Throws DuplicateBootstrap.
  void bootstrap(const Topology& topo);
  bool bootstrapped() const { return bootstrapped_; }

  /// Runs a query against the graph.
  sparql::ResultTable query(std::string_view sparql_text) const;

  /// Other members of the publisher's swarm, ordered by host IRI. Throws
  /// UnknownPublisher.
  std::vector<MemberInfo> resolve_swarm_members(Ipv4Address publisher_ip) const;

  /// Routes a packet-in by reason.
  std::vector<ControlAction> handle_packet_in(const PacketIn& pi, std::uint64_t now);

  /// Installs per-switch replication towards the publisher's swarm peers
  /// and re-emits the pending packet.
  std::vector<ControlAction> handle_rtps_packet_in(const PacketIn& pi);

  /// Records the report in the graph and folds consecutive hop pairs into
  /// link weights. Returns the links whose weight changed.
  std::vector<DirectedLink> ingest_int_report(const IntReport& r, std::uint64_t now,
                                              std::vector<std::string>* log = nullptr);

  /// Links whose EWMA is strictly above the threshold, in link order.
  std::vector<DirectedLink> detect_congestion() const;

  Path compute_path(std::uint32_t src_switch, std::uint32_t dst_switch,
                    std::uint16_t final_egress_port = 0) const;

  /// Recomputes routes that cross a congested link and reprograms changed
  /// ones make-before-break.
  std::vector<ControlAction> reroute_on_congestion();

  /// Unicast route between two hosts, programmed as exact src/dst ACL
  /// entries along the current best path.
  std::vector<ControlAction> install_unicast_route(std::string_view src_host, std::string_view dst_host);

  /// Host with all required capability bits and the lowest cpu load; ties
  /// by IRI. Throws NoCapableNode.
  std::string select_node(std::uint16_t required_capabilities) const;

  /// Mirrors successful table writes into the graph as flow entries.
  void observe_write(const WriteRequest& req, const WriteReply& reply);

 private:
  struct Desired {
    std::map<std::string, Path> member_paths;
    std::map<std::uint32_t, SwitchProgram> programs;
  };

  std::optional<std::string> host_by_ip(Ipv4Address ip) const;
  Desired plan(const Route& route, std::uint32_t root, const std::vector<MemberInfo>& members,
               std::vector<ControlAction>& log) const;
  std::vector<ControlAction> reconcile(Route& route, const Desired& desired, std::uint32_t root);
  std::uint16_t allocate_group(std::uint32_t switch_id);
  std::uint64_t drain_delay(const Route& route) const;
  TableEntry acl_entry(const Route& route, const SwitchProgram& program) const;

  ControllerConfig config_;
  Topology topology_;
  TripleStore store_;
  LinkWeightTable weights_;
  RouteState routes_;
  std::map<std::uint32_t, std::uint16_t> next_group_;
  std::uint64_t report_seq_ = 0;
  bool bootstrapped_ = false;
};

/// Builds the IntReport a sink would have produced from a report packet-in
/// frame. Throws if the frame carries no INT stack.
IntReport int_report_from_frame(std::uint32_t sink_switch, ByteView frame);

}  // namespace swarmkdn
