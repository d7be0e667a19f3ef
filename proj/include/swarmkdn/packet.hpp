#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmkdn/bytes.hpp"

namespace swarmkdn {

using MacAddress = std::array<std::uint8_t, 6>;
using GuidPrefix = std::array<std::uint8_t, 12>;

/// IPv4 addresses are carried as host-order integers; the codec writes them
/// big-endian.
using Ipv4Address = std::uint32_t;

inline constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr std::uint8_t kIpProtoUdp = 17;
inline constexpr std::uint8_t kIntDscp = 0x17;
inline constexpr std::uint8_t kIntVersion = 1;
inline constexpr std::size_t kIntHopCap = 16;
inline constexpr std::size_t kEthernetBytes = 14;
inline constexpr std::size_t kIpv4Bytes = 20;
inline constexpr std::size_t kUdpBytes = 8;
inline constexpr std::size_t kIntShimBytes = 4;
inline constexpr std::size_t kNodeMetaBytes = 11;
inline constexpr std::size_t kIntHopBytes = 8;
inline constexpr std::size_t kRtpsBytes = 20;
inline constexpr std::array<std::uint8_t, 4> kRtpsMagic = {'R', 'T', 'P', 'S'};

struct EthernetHeader {
  MacAddress dst_mac{};
  MacAddress src_mac{};
  std::uint16_t ethertype = 0;
  bool operator==(const EthernetHeader&) const = default;
};

struct Ipv4Header {
  std::uint8_t dscp = 0;
  std::uint16_t total_length = 0;
  std::uint8_t ttl = 64;
  std::uint8_t protocol = 0;
  Ipv4Address src_ip = 0;
  Ipv4Address dst_ip = 0;
  bool operator==(const Ipv4Header&) const = default;
};

struct UdpHeader {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint16_t length = 0;
  bool operator==(const UdpHeader&) const = default;
};

struct RtpsHeader {
  std::uint16_t protocol_version = 0;
  std::uint16_t vendor_id = 0;
  GuidPrefix guid_prefix{};
  bool operator==(const RtpsHeader&) const = default;
};

/// Swarm-node properties embedded by an INT source.
struct NodeMetadata {
  std::uint32_t node_id = 0;
  std::uint8_t cpu_load_pct = 0;
  std::int16_t loc_x = 0;
  std::int16_t loc_y = 0;
  std::uint16_t capabilities = 0;
  bool operator==(const NodeMetadata&) const = default;
};

struct IntHopMetadata {
  std::uint32_t switch_id = 0;
  std::uint32_t hop_latency_us = 0;
  bool operator==(const IntHopMetadata&) const = default;
};

/// INT shim contents. The wire hop_count is hops.size(); the node metadata
/// flag is node_meta.has_value().
struct IntStack {
  std::uint8_t version = kIntVersion;
  std::optional<NodeMetadata> node_meta;
  std::vector<IntHopMetadata> hops;  // source-to-sink order

  std::size_t hop_count() const { return hops.size(); }
  std::size_t wire_size() const {
    return kIntShimBytes + (node_meta ? kNodeMetaBytes : 0) + hops.size() * kIntHopBytes;
  }
  bool operator==(const IntStack&) const = default;
};

struct HeaderStack {
  EthernetHeader eth;
  std::optional<Ipv4Header> ipv4;
  std::optional<UdpHeader> udp;
  std::optional<IntStack> int_stack;
  std::optional<RtpsHeader> rtps;
  Bytes payload;

  bool operator==(const HeaderStack&) const = default;
};

/// Parses a wire frame. Unknown ethertypes and non-UDP protocols leave the
/// remainder in payload; a UDP payload without the RTPS magic stays opaque.
HeaderStack parse_packet(ByteView frame);

/// Serializes a header stack bit-exactly. Length fields are written as
/// stored and must agree with the content (see fix_lengths).
Bytes emit_packet(const HeaderStack& h);

/// Recomputes ipv4.total_length and udp.length from the present layers.
void fix_lengths(HeaderStack& h);

/// Throws InvariantViolation when the layer flags disagree with each other.
void check_invariants(const HeaderStack& h);

// CPU port encapsulation.

enum class CpuReason : std::uint8_t {
  RtpsInspect = 0x01,
  IntReport = 0x02,
  TableMiss = 0x03,
};

bool is_valid_cpu_reason(std::uint8_t reason);

inline constexpr std::uint16_t kCpuOutAllPorts = 0xFFFF;
// Port 0 is never a front-panel port; packet-out to it means "run the
// ingress pipeline".
inline constexpr std::uint16_t kCpuOutPipeline = 0;

struct CpuIn {
  std::uint16_t ingress_port = 0;
  std::uint8_t reason = 0;
  Bytes frame;
  bool operator==(const CpuIn&) const = default;
};

struct CpuOut {
  std::uint16_t egress_port = 0;
  Bytes frame;
  bool operator==(const CpuOut&) const = default;
};

Bytes encode_cpu_in(const CpuIn& m);
CpuIn decode_cpu_in(ByteView bytes);
Bytes encode_cpu_out(const CpuOut& m);
CpuOut decode_cpu_out(ByteView bytes);

// Address helpers.

std::string format_ipv4(Ipv4Address ip);
Ipv4Address parse_ipv4(std::string_view text);
std::string format_mac(const MacAddress& mac);
MacAddress parse_mac(std::string_view text);
bool is_multicast_ipv4(Ipv4Address ip);
MacAddress multicast_mac_for(Ipv4Address ip);

}  // namespace swarmkdn
