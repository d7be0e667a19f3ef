#include "swarmkdn/packet.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace swarmkdn {
namespace {

bool looks_like_rtps(ByteView data) {
  return data.size() >= kRtpsBytes && std::equal(kRtpsMagic.begin(), kRtpsMagic.end(), data.begin());
}

std::size_t udp_body_size(const HeaderStack& h) {
  return (h.int_stack ? h.int_stack->wire_size() : 0) + (h.rtps ? kRtpsBytes : 0) +
         h.payload.size();
}

std::size_t ipv4_total_size(const HeaderStack& h) {
  std::size_t n = kIpv4Bytes;
  if (h.udp) {
    n += kUdpBytes + udp_body_size(h);
  } else {
    n += h.payload.size();
  }
  return n;
}

[[noreturn]] void violation(const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, what);
}

IntStack parse_int_stack(ByteReader& in) {
  const std::size_t start = in.offset();
  if (in.remaining() < kIntShimBytes) {
    throw DecodeError(ErrorCode::BadIntStack, start, "INT shim shorter than 4 bytes");
  }
  IntStack stack;
  stack.version = in.u8();
  const std::size_t hop_count = in.u8();
  const std::size_t meta_len = in.u8();
  const std::uint8_t reserved = in.u8();
  if (stack.version != kIntVersion) {
    throw DecodeError(ErrorCode::BadIntStack, start, "unsupported INT version");
  }
  if (meta_len != 0 && meta_len != kNodeMetaBytes) {
    throw DecodeError(ErrorCode::BadIntStack, start + 2, "node metadata length must be 0 or 11");
  }
  if (reserved != 0) {
    throw DecodeError(ErrorCode::BadIntStack, start + 3, "reserved byte not zero");
  }
  if (hop_count > kIntHopCap) {
    throw DecodeError(ErrorCode::BadIntStack, start + 1, "hop count above cap");
  }
  if (in.remaining() < meta_len + hop_count * kIntHopBytes) {
    throw DecodeError(ErrorCode::BadIntStack, start + 1,
                      "hop count " + std::to_string(hop_count) + " exceeds remaining bytes");
  }
  if (meta_len != 0) {
    NodeMetadata meta;
    meta.node_id = in.u32();
    meta.cpu_load_pct = in.u8();
    meta.loc_x = in.i16();
    meta.loc_y = in.i16();
    meta.capabilities = in.u16();
    if (meta.cpu_load_pct > 100) {
      throw DecodeError(ErrorCode::BadIntStack, in.offset() - 7, "cpu load above 100");
    }
    stack.node_meta = meta;
  }
  stack.hops.reserve(hop_count);
  for (std::size_t i = 0; i < hop_count; ++i) {
    IntHopMetadata hop;
    hop.switch_id = in.u32();
    hop.hop_latency_us = in.u32();
    stack.hops.push_back(hop);
  }
  return stack;
}

void emit_int_stack(ByteWriter& out, const IntStack& stack) {
  out.u8(stack.version);
  out.u8(static_cast<std::uint8_t>(stack.hops.size()));
  out.u8(stack.node_meta ? kNodeMetaBytes : 0);
  out.u8(0);
  if (stack.node_meta) {
    const auto& m = *stack.node_meta;
    out.u32(m.node_id);
    out.u8(m.cpu_load_pct);
    out.i16(m.loc_x);
    out.i16(m.loc_y);
    out.u16(m.capabilities);
  }
  for (const auto& hop : stack.hops) {
    out.u32(hop.switch_id);
    out.u32(hop.hop_latency_us);
  }
}

}  // namespace

HeaderStack parse_packet(ByteView frame) {
  ByteReader in(frame, ErrorCode::TruncatedFrame);
  HeaderStack h;
  h.eth.dst_mac = in.array<6>();
  h.eth.src_mac = in.array<6>();
  h.eth.ethertype = in.u16();
  if (h.eth.ethertype != kEthertypeIpv4) {
    auto rest = in.rest();
    h.payload.assign(rest.begin(), rest.end());
    return h;
  }

  const std::size_t ip_start = in.offset();
  const std::size_t ip_available = in.remaining();
  Ipv4Header ip;
  if (in.u8() != 0x45) {
    throw DecodeError(ErrorCode::MalformedFrame, ip_start, "only 20-byte IPv4 headers are supported");
  }
  ip.dscp = in.u8();
  ip.total_length = in.u16();
  const std::uint16_t ident = in.u16();
  const std::uint16_t frag = in.u16();
  ip.ttl = in.u8();
  ip.protocol = in.u8();
  const std::uint16_t checksum = in.u16();
  ip.src_ip = in.u32();
  ip.dst_ip = in.u32();
  if (ident != 0 || frag != 0 || checksum != 0) {
    throw DecodeError(ErrorCode::MalformedFrame, ip_start + 4, "id, flags and checksum must be zero");
  }
  if (ip.total_length > ip_available) {
    throw DecodeError(ErrorCode::TruncatedFrame, ip_start + 2,
                      "IPv4 total length " + std::to_string(ip.total_length) + " exceeds " +
                          std::to_string(ip_available) + " available bytes");
  }
  if (ip.total_length != ip_available) {
    throw DecodeError(ErrorCode::MalformedFrame, ip_start + 2,
                      "IPv4 total length disagrees with frame size");
  }
  h.ipv4 = ip;
  if (ip.protocol != kIpProtoUdp) {
    auto rest = in.rest();
    h.payload.assign(rest.begin(), rest.end());
    return h;
  }

  const std::size_t udp_start = in.offset();
  const std::size_t udp_available = in.remaining();
  UdpHeader udp;
  udp.src_port = in.u16();
  udp.dst_port = in.u16();
  udp.length = in.u16();
  if (in.u16() != 0) {
    throw DecodeError(ErrorCode::MalformedFrame, udp_start + 6, "UDP checksum must be zero");
  }
  if (udp.length > udp_available) {
    throw DecodeError(ErrorCode::TruncatedFrame, udp_start + 4, "UDP length exceeds available bytes");
  }
  if (udp.length != udp_available) {
    throw DecodeError(ErrorCode::MalformedFrame, udp_start + 4, "UDP length disagrees with IPv4 length");
  }
  h.udp = udp;

  if (ip.dscp == kIntDscp) {
    h.int_stack = parse_int_stack(in);
  }

  const std::size_t body_start = in.offset();
  auto body = in.rest();
  if (looks_like_rtps(body)) {
    ByteReader rtps_in(body, ErrorCode::TruncatedFrame, body_start);
    rtps_in.take(kRtpsMagic.size());
    RtpsHeader rtps;
    rtps.protocol_version = rtps_in.u16();
    rtps.vendor_id = rtps_in.u16();
    rtps.guid_prefix = rtps_in.array<12>();
    h.rtps = rtps;
    body = rtps_in.rest();
  }
  h.payload.assign(body.begin(), body.end());
  return h;
}

void fix_lengths(HeaderStack& h) {
  if (h.udp) h.udp->length = static_cast<std::uint16_t>(kUdpBytes + udp_body_size(h));
  if (h.ipv4) h.ipv4->total_length = static_cast<std::uint16_t>(ipv4_total_size(h));
}

void check_invariants(const HeaderStack& h) {
  const bool is_ip = h.eth.ethertype == kEthertypeIpv4;
  if (is_ip != h.ipv4.has_value()) violation("ipv4 layer must be present iff ethertype is 0x0800");
  const bool is_udp = h.ipv4 && h.ipv4->protocol == kIpProtoUdp;
  if (is_udp != h.udp.has_value()) violation("udp layer must be present iff ipv4.protocol is 17");
  const bool is_int = h.udp && h.ipv4->dscp == kIntDscp;
  if (is_int != h.int_stack.has_value()) violation("INT stack must be present iff UDP with dscp 0x17");
  if (h.rtps && !h.udp) violation("rtps layer requires udp");
  if (h.udp && !h.rtps && looks_like_rtps(h.payload)) {
    violation("opaque UDP payload would parse as RTPS");
  }
  if (h.int_stack) {
    const auto& st = *h.int_stack;
    if (st.version != kIntVersion) violation("INT version must be 1");
    if (st.hops.size() > kIntHopCap) violation("INT hop count above cap");
    if (st.node_meta && st.node_meta->cpu_load_pct > 100) violation("cpu load above 100");
  }
  if (h.ipv4) {
    const std::size_t total = ipv4_total_size(h);
    if (total > 0xFFFF) violation("IPv4 datagram longer than 65535 bytes");
    if (h.ipv4->total_length != total) violation("ipv4.total_length disagrees with content");
  }
  if (h.udp && h.udp->length != kUdpBytes + udp_body_size(h)) {
    violation("udp.length disagrees with content");
  }
}

Bytes emit_packet(const HeaderStack& h) {
  check_invariants(h);
  ByteWriter out;
  out.raw(h.eth.dst_mac);
  out.raw(h.eth.src_mac);
  out.u16(h.eth.ethertype);
  if (h.ipv4) {
    const auto& ip = *h.ipv4;
    out.u8(0x45);
    out.u8(ip.dscp);
    out.u16(ip.total_length);
    out.u16(0);
    out.u16(0);
    out.u8(ip.ttl);
    out.u8(ip.protocol);
    out.u16(0);
    out.u32(ip.src_ip);
    out.u32(ip.dst_ip);
  }
  if (h.udp) {
    out.u16(h.udp->src_port);
    out.u16(h.udp->dst_port);
    out.u16(h.udp->length);
    out.u16(0);
  }
  if (h.int_stack) emit_int_stack(out, *h.int_stack);
  if (h.rtps) {
    out.raw(kRtpsMagic);
    out.u16(h.rtps->protocol_version);
    out.u16(h.rtps->vendor_id);
    out.raw(h.rtps->guid_prefix);
  }
  out.raw(h.payload);
  return out.take();
}

bool is_valid_cpu_reason(std::uint8_t reason) { return reason >= 0x01 && reason <= 0x03; }

Bytes encode_cpu_in(const CpuIn& m) {
  ByteWriter out;
  out.u16(m.ingress_port);
  out.u8(m.reason);
  out.u8(0);
  out.raw(m.frame);
  return out.take();
}

CpuIn decode_cpu_in(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::TruncatedFrame);
  CpuIn m;
  m.ingress_port = in.u16();
  m.reason = in.u8();
  if (!is_valid_cpu_reason(m.reason)) {
    throw DecodeError(ErrorCode::MalformedFrame, 2, "unknown packet-in reason");
  }
  if (in.u8() != 0) throw DecodeError(ErrorCode::MalformedFrame, 3, "pad byte not zero");
  auto rest = in.rest();
  m.frame.assign(rest.begin(), rest.end());
  return m;
}

Bytes encode_cpu_out(const CpuOut& m) {
  ByteWriter out;
  out.u16(m.egress_port);
  out.u16(0);
  out.raw(m.frame);
  return out.take();
}

CpuOut decode_cpu_out(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::TruncatedFrame);
  CpuOut m;
  m.egress_port = in.u16();
  if (in.u16() != 0) throw DecodeError(ErrorCode::MalformedFrame, 2, "pad bytes not zero");
  auto rest = in.rest();
  m.frame.assign(rest.begin(), rest.end());
  return m;
}

std::string format_ipv4(Ipv4Address ip) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xFF, (ip >> 16) & 0xFF,
                (ip >> 8) & 0xFF, ip & 0xFF);
  return buf;
}

Ipv4Address parse_ipv4(std::string_view text) {
  Ipv4Address out = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int i = 0; i < 4; ++i) {
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc{} || octet > 255 || next == p) {
      throw Error(ErrorCode::ParseError, "bad IPv4 address '" + std::string(text) + "'");
    }
    out = (out << 8) | octet;
    p = next;
    if (i < 3) {
      if (p == end || *p != '.') {
        throw Error(ErrorCode::ParseError, "bad IPv4 address '" + std::string(text) + "'");
      }
      ++p;
    }
  }
  if (p != end) throw Error(ErrorCode::ParseError, "bad IPv4 address '" + std::string(text) + "'");
  return out;
}

std::string format_mac(const MacAddress& mac) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", mac[0], mac[1], mac[2], mac[3],
                mac[4], mac[5]);
  return buf;
}

MacAddress parse_mac(std::string_view text) {
  MacAddress mac{};
  if (text.size() != 17) throw Error(ErrorCode::ParseError, "bad MAC address '" + std::string(text) + "'");
  for (int i = 0; i < 6; ++i) {
    const char* p = text.data() + i * 3;
    unsigned v = 0;
    auto [next, ec] = std::from_chars(p, p + 2, v, 16);
    if (ec != std::errc{} || next != p + 2 || (i < 5 && p[2] != ':')) {
      throw Error(ErrorCode::ParseError, "bad MAC address '" + std::string(text) + "'");
    }
    mac[i] = static_cast<std::uint8_t>(v);
  }
  return mac;
}

bool is_multicast_ipv4(Ipv4Address ip) { return (ip >> 28) == 0xE; }

MacAddress multicast_mac_for(Ipv4Address ip) {
  return {0x01, 0x00, 0x5e, static_cast<std::uint8_t>((ip >> 16) & 0x7F),
          static_cast<std::uint8_t>(ip >> 8), static_cast<std::uint8_t>(ip)};
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace swarmkdn
