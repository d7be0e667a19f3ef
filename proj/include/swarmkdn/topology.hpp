#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmkdn/packet.hpp"
#include "swarmkdn/switch.hpp"

namespace swarmkdn {

struct SwitchSpec {
  std::uint32_t id = 0;
  std::uint32_t proc_latency_us = 0;
  IntRole int_role = IntRole::None;
};

struct HostSpec {
  std::string id;
  MacAddress mac{};
  Ipv4Address ip = 0;
  std::uint32_t switch_id = 0;
  std::uint16_t port = 0;
  std::string swarm_id;
  std::uint16_t capabilities = 0;
  std::uint8_t cpu_load_pct = 0;
  std::int16_t loc_x = 0;
  std::int16_t loc_y = 0;
  std::uint32_t node_id = 0;
};

/// A link end is either a switch port or a host.
struct Endpoint {
  enum class Kind { Switch, Host };
  Kind kind = Kind::Switch;
  std::uint32_t switch_id = 0;
  std::uint16_t port = 0;
  std::string host_id;

  bool is_switch() const { return kind == Kind::Switch; }
  /// "s<id>.<port>" or the host id; stable and free of ':'.
  std::string token() const;
  bool operator==(const Endpoint&) const = default;
};

struct LinkSpec {
  Endpoint a;
  Endpoint b;
  std::uint32_t latency_us = 0;
};

/// Validated network description as loaded from a topology file.
struct Topology {
  std::vector<SwitchSpec> switches;
  std::vector<HostSpec> hosts;
  std::vector<LinkSpec> links;

  const SwitchSpec* find_switch(std::uint32_t id) const;
  const HostSpec* find_host(std::string_view id) const;
  const HostSpec* find_host_by_ip(Ipv4Address ip) const;
  /// Ports of a switch in ascending order, derived from its links.
  std::vector<std::uint16_t> switch_ports(std::uint32_t id) const;
  /// Index of the switch-to-switch link between a and b, if any.
  std::optional<std::size_t> find_switch_link(std::uint32_t a, std::uint32_t b) const;
  /// Index of the link attaching a host.
  std::optional<std::size_t> find_host_link(std::string_view host_id) const;

  /// Throws ParseError on structural problems: duplicate ids or addresses,
  /// ports used twice, parallel switch links, hosts whose switch/port does
  /// not match their link.
  void validate() const;
};

/// Endpoint syntax: "s<id>:<port>" for a switch port, anything else names a
/// host.
Endpoint parse_endpoint(std::string_view text);

Topology parse_topology_json(std::string_view text);
Topology load_topology(const std::string& path);

}  // namespace swarmkdn
