#include "doctest.h"
#include "support.hpp"

using namespace swarmkdn;
using testsupport::Rng;

namespace {

Bytes hex(std::string_view s) {
  Bytes out;
  std::string digits;
  for (char c : s) {
    if (std::isxdigit(static_cast<unsigned char>(c))) digits += c;
  }
  for (std::size_t i = 0; i + 1 < digits.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
  }
  return out;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("minimal frame with unknown ethertype") {
  Bytes frame(14, 0);
  frame[12] = 0x12;
  frame[13] = 0x34;
  const auto h = parse_packet(frame);
  CHECK(h.eth.ethertype == 0x1234);
  CHECK_FALSE(h.ipv4);
  CHECK_FALSE(h.udp);
  CHECK(h.payload.empty());
  CHECK(emit_packet(h) == frame);
}

TEST_CASE("frames shorter than an Ethernet header are truncated") {
  CHECK(code_of([] { parse_packet(Bytes(13, 0)); }) == ErrorCode::TruncatedFrame);
}

TEST_CASE("hand-assembled RTPS frame") {
  // eth | ipv4 (dscp 0, len 20+8+20+3) | udp 7400 (len 31) | RTPS 0203 0101 guid | "abc"
  const Bytes frame = hex(
      "010203040506 0a0b0c0d0e0f 0800"
      "45 00 0033 0000 0000 40 11 0000 0a000001 0a000002"
      "c000 1ce8 001f 0000"
      "52545053 0203 0101 000102030405060708090a0b"
      "616263");
  const auto h = parse_packet(frame);
  REQUIRE(h.ipv4);
  CHECK(h.ipv4->total_length == 0x33);
  CHECK(h.ipv4->src_ip == 0x0A000001u);
  REQUIRE(h.udp);
  CHECK(h.udp->dst_port == 7400);
  CHECK_FALSE(h.int_stack);
  REQUIRE(h.rtps);
  CHECK(h.rtps->protocol_version == 0x0203);
  CHECK(h.rtps->vendor_id == 0x0101);
  CHECK(h.rtps->guid_prefix == GuidPrefix{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(h.payload == Bytes{'a', 'b', 'c'});
  CHECK(emit_packet(h) == frame);
}

TEST_CASE("UDP payload without RTPS magic stays opaque") {
  HeaderStack h;
  h.eth.ethertype = kEthertypeIpv4;
  h.ipv4 = Ipv4Header{0, 0, 64, kIpProtoUdp, 1, 2};
  h.udp = UdpHeader{1, 2, 0};
  h.payload = {'R', 'T', 'P', 'X', 0, 0};
  fix_lengths(h);
  const auto back = parse_packet(emit_packet(h));
  CHECK_FALSE(back.rtps);
  CHECK(back == h);
}

TEST_CASE("INT stack with node metadata and two hops survives emit and parse") {
  HeaderStack h;
  h.eth.ethertype = kEthertypeIpv4;
  h.ipv4 = Ipv4Header{kIntDscp, 0, 64, kIpProtoUdp, 0x0A000001u, 0x0A000002u};
  h.udp = UdpHeader{49152, 9000, 0};
  IntStack s;
  s.node_meta = NodeMetadata{7, 40, -3, 12, 0x0005};
  s.hops = {{1, 50}, {2, 70}};
  h.int_stack = s;
  h.payload = {1, 2, 3};
  fix_lengths(h);
  const Bytes wire = emit_packet(h);
  CHECK(wire.size() == 14 + 20 + 8 + 4 + 11 + 16 + 3);
  // shim right after UDP
  CHECK(wire[42] == 1);
  CHECK(wire[43] == 2);
  CHECK(wire[44] == 11);
  CHECK(wire[45] == 0);
  const auto back = parse_packet(wire);
  REQUIRE(back.int_stack);
  CHECK(back.int_stack->hop_count() == 2);
  CHECK(back.int_stack->hops[0] == IntHopMetadata{1, 50});
  CHECK(back.int_stack->hops[1] == IntHopMetadata{2, 70});
  CHECK(back.int_stack->node_meta == s.node_meta);
  CHECK(back == h);
}

TEST_CASE("sixteen hops occupy 4 + 11 + 128 INT bytes") {
  IntStack s;
  s.node_meta = NodeMetadata{};
  s.hops.assign(16, IntHopMetadata{1, 1});
  CHECK(s.wire_size() == 4 + 11 + 16 * 8);
  HeaderStack h;
  h.eth.ethertype = kEthertypeIpv4;
  h.ipv4 = Ipv4Header{kIntDscp, 0, 64, kIpProtoUdp, 1, 2};
  h.udp = UdpHeader{};
  h.int_stack = s;
  fix_lengths(h);
  CHECK(emit_packet(h).size() == 14 + 20 + 8 + 143);
}

TEST_CASE("Ethernet-only stack emits 14 bytes") {
  HeaderStack h;
  h.eth.ethertype = 0x88B5;
  CHECK(emit_packet(h).size() == 14);
}

TEST_CASE("emit rejects inconsistent layer flags") {
  HeaderStack h;
  h.eth.ethertype = kEthertypeIpv4;
  h.ipv4 = Ipv4Header{0, 0, 64, 6, 1, 2};
  h.rtps = RtpsHeader{};
  fix_lengths(h);
  CHECK(code_of([&] { emit_packet(h); }) == ErrorCode::InvariantViolation);

  HeaderStack no_ip;
  no_ip.eth.ethertype = kEthertypeIpv4;
  CHECK(code_of([&] { emit_packet(no_ip); }) == ErrorCode::InvariantViolation);
}

TEST_CASE("parse errors carry codes and offsets") {
  HeaderStack h;
  h.eth.ethertype = kEthertypeIpv4;
  h.ipv4 = Ipv4Header{kIntDscp, 0, 64, kIpProtoUdp, 1, 2};
  h.udp = UdpHeader{};
  IntStack s;
  s.hops = {{1, 5}};
  h.int_stack = s;
  fix_lengths(h);
  Bytes wire = emit_packet(h);

  SUBCASE("declared IPv4 length beyond the frame") {
    Bytes cut(wire.begin(), wire.end() - 1);
    try {
      parse_packet(cut);
      FAIL("no throw");
    } catch (const DecodeError& e) {
      CHECK(e.code() == ErrorCode::TruncatedFrame);
      CHECK(e.offset() == 16);
    }
  }
  SUBCASE("hop count larger than the remaining bytes") {
    wire[43] = 3;
    CHECK(code_of([&] { parse_packet(wire); }) == ErrorCode::BadIntStack);
  }
  SUBCASE("hop count above the cap") {
    wire[43] = 17;
    CHECK(code_of([&] { parse_packet(wire); }) == ErrorCode::BadIntStack);
  }
  SUBCASE("nonzero checksum") {
    wire[24] = 1;
    CHECK(code_of([&] { parse_packet(wire); }) == ErrorCode::MalformedFrame);
  }
}

TEST_CASE("random header stacks round-trip") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const HeaderStack h = testsupport::random_header_stack(rng);
    const Bytes wire = emit_packet(h);
    const HeaderStack back = parse_packet(wire);
    REQUIRE(back == h);
    REQUIRE(emit_packet(back) == wire);
  }
}

TEST_CASE("CPU port encapsulation layout") {
  const CpuIn in{0x0102, 0x02, {0xAA, 0xBB}};
  const Bytes enc = encode_cpu_in(in);
  CHECK(enc == Bytes{0x01, 0x02, 0x02, 0x00, 0xAA, 0xBB});
  CHECK(decode_cpu_in(enc) == in);

  const CpuOut out{kCpuOutAllPorts, {0x01}};
  const Bytes enc_out = encode_cpu_out(out);
  CHECK(enc_out == Bytes{0xFF, 0xFF, 0x00, 0x00, 0x01});
  CHECK(decode_cpu_out(enc_out) == out);

  CHECK(code_of([] { decode_cpu_in(Bytes{0, 1, 0x09, 0}); }) == ErrorCode::MalformedFrame);
  CHECK(code_of([] { decode_cpu_out(Bytes{0, 1}); }) == ErrorCode::TruncatedFrame);
}

TEST_CASE("address helpers") {
  CHECK(parse_ipv4("10.0.0.1") == 0x0A000001u);
  CHECK(format_ipv4(0xC0A80A01u) == "192.168.10.1");
  CHECK(code_of([] { parse_ipv4("10.0.0"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_ipv4("10.0.0.256"); }) == ErrorCode::ParseError);
  CHECK(format_mac(parse_mac("02:00:00:00:00:0a")) == "02:00:00:00:00:0a");
  CHECK(is_multicast_ipv4(parse_ipv4("239.255.0.1")));
  CHECK_FALSE(is_multicast_ipv4(parse_ipv4("10.0.0.1")));
  CHECK(multicast_mac_for(parse_ipv4("239.255.0.1")) == MacAddress{0x01, 0x00, 0x5e, 0x7f, 0x00, 0x01});
}
