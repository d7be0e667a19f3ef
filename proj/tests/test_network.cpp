#include "doctest.h"
#include "support.hpp"

#include "swarmkdn/network.hpp"

using namespace swarmkdn;
using testsupport::Rng;

namespace {

const char* kOneSwitch = R"({
  "switches": [{"id": 1, "proc_latency_us": 50, "int_role": "sink"}],
  "hosts": [
    {"id": "h1", "mac": "02:00:00:00:00:01", "ip": "10.0.0.1", "switch": 1, "port": 1,
     "swarm_id": "a", "capabilities": 3, "cpu_load_pct": 40, "loc_x": 5, "loc_y": -6},
    {"id": "h2", "mac": "02:00:00:00:00:02", "ip": "10.0.0.2", "switch": 1, "port": 2,
     "swarm_id": "a", "capabilities": 1, "cpu_load_pct": 10, "loc_x": 0, "loc_y": 0}
  ],
  "links": [{"a": "s1:1", "b": "h1", "latency_us": 10}, {"a": "s1:2", "b": "h2", "latency_us": 10}]
})";

const char* kChain = R"({
  "switches": [{"id": 1, "proc_latency_us": 11, "int_role": "transit"},
               {"id": 2, "proc_latency_us": 22, "int_role": "transit"},
               {"id": 3, "proc_latency_us": 33, "int_role": "sink"}],
  "hosts": [
    {"id": "h1", "mac": "02:00:00:00:00:01", "ip": "10.0.0.1", "switch": 1, "port": 1,
     "swarm_id": "a", "capabilities": 3, "cpu_load_pct": 40, "loc_x": 5, "loc_y": -6, "node_id": 77},
    {"id": "h2", "mac": "02:00:00:00:00:02", "ip": "10.0.0.2", "switch": 3, "port": 1,
     "swarm_id": "a", "capabilities": 1, "cpu_load_pct": 10, "loc_x": 0, "loc_y": 0}
  ],
  "links": [{"a": "s1:1", "b": "h1", "latency_us": 5}, {"a": "s3:1", "b": "h2", "latency_us": 5},
            {"a": "s1:2", "b": "s2:1", "latency_us": 100}, {"a": "s2:2", "b": "s3:2", "latency_us": 100}]
})";

TableEntry l2_to(const MacAddress& mac, std::uint16_t port) { return TableEntry{L2Match{mac}, 0, ForwardAction{port}}; }

std::vector<ObservableEvent> drain(Network& net) {
  std::vector<ObservableEvent> all;
  while (!net.idle()) {
    auto evs = net.step();
    all.insert(all.end(), evs.begin(), evs.end());
  }
  return all;
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

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("topology file parsing and validation") {
  const auto topo = parse_topology_json(kChain);
  CHECK(topo.switches.size() == 3);
  CHECK(topo.find_host("h1")->node_id == 77);
  CHECK(topo.find_host("h2")->node_id == 78);
  CHECK(topo.switch_ports(2) == std::vector<std::uint16_t>{1, 2});
  CHECK(topo.find_switch_link(3, 2) == 3u);

  const std::string base = kOneSwitch;
  CHECK(code_of([&] { parse_topology_json("{"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { parse_topology_json(replace_once(base, "\"ip\": \"10.0.0.2\"", "\"ip\": \"10.0.0.1\"")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { parse_topology_json(replace_once(base, "\"b\": \"h2\"", "\"b\": \"h1\"")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { parse_topology_json(replace_once(base, "\"a\": \"s1:2\"", "\"a\": \"s1:3\"")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { parse_topology_json(replace_once(base, "\"proc_latency_us\": 50", "\"proc_latency_us\": 0")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { parse_topology_json(replace_once(base, "\"cpu_load_pct\": 40", "\"cpu_load_pct\": 140")); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { load_topology("/nonexistent/topo.json"); }) == ErrorCode::IoError);
}

TEST_CASE("one-switch delivery time is two link latencies plus processing") {
  Network net(parse_topology_json(kOneSwitch));
  table_write(net.switch_state(1), WriteOp::Insert, l2_to(parse_mac("02:00:00:00:00:02"), 2));
  net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9000, false, false, Bytes{1, 2});
  const auto evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].kind == ObservableEvent::Kind::Delivery);
  CHECK(evs[0].host_id == "h2");
  CHECK(evs[0].time == 2 * 10 + 50);
  const auto pkt = parse_packet(evs[0].frame);
  CHECK(pkt.payload == Bytes{1, 2});
  CHECK_FALSE(pkt.int_stack);
}

TEST_CASE("RTPS without entries reaches the controller") {
  Network net(parse_topology_json(kOneSwitch));
  const Bytes sent = net.inject_from_host("h1", parse_ipv4("239.255.0.1"), 7400, true, false, {});
  const auto evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].kind == ObservableEvent::Kind::PacketIn);
  CHECK(evs[0].reason == 0x01);
  CHECK(evs[0].port == 1);
  CHECK(evs[0].time == 10);
  const auto cpu = decode_cpu_in(evs[0].frame);
  CHECK(cpu.ingress_port == 1);
  CHECK(cpu.frame == sent);
}

TEST_CASE("non-RTPS L2 miss is dropped") {
  Network net(parse_topology_json(kOneSwitch));
  net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9000, false, true, {});
  const auto evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].kind == ObservableEvent::Kind::Drop);
  CHECK(net.counters().drops == 1);
}

TEST_CASE("host frames carry node metadata and RTPS when asked") {
  Network net(parse_topology_json(kOneSwitch));
  const auto both = parse_packet(net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 7400, true, true, Bytes{9}));
  REQUIRE(both.int_stack);
  CHECK(both.ipv4->dscp == kIntDscp);
  CHECK(both.int_stack->hop_count() == 0);
  REQUIRE(both.int_stack->node_meta);
  CHECK(both.int_stack->node_meta->cpu_load_pct == 40);
  CHECK(both.int_stack->node_meta->loc_x == 5);
  CHECK(both.int_stack->node_meta->loc_y == -6);
  CHECK(both.int_stack->node_meta->capabilities == 3);
  CHECK(both.rtps);
  CHECK(both.eth.dst_mac == parse_mac("02:00:00:00:00:02"));

  net.set_cpu_load("h1", 75);
  const auto raw = net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 7400, true, true, {});
  CHECK(parse_packet(raw).int_stack->node_meta->cpu_load_pct == 75);

  const Bytes rtps_only = net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 7400, true, false, {});
  const std::size_t udp_payload = kEthernetBytes + kIpv4Bytes + kUdpBytes;
  CHECK(std::equal(kRtpsMagic.begin(), kRtpsMagic.end(), rtps_only.begin() + udp_payload));

  const auto plain = parse_packet(net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9, false, false, Bytes{7}));
  CHECK(plain.ipv4->dscp == 0);
  CHECK_FALSE(plain.int_stack);
  CHECK_FALSE(plain.rtps);
  CHECK(plain.payload == Bytes{7});

  CHECK(code_of([&] { net.inject_from_host("nobody", 1, 1, false, false, {}); }) == ErrorCode::UnknownHost);
}

TEST_CASE("three-switch INT chain reports every hop") {
  Network net(parse_topology_json(kChain));
  const auto h2_mac = parse_mac("02:00:00:00:00:02");
  table_write(net.switch_state(1), WriteOp::Insert, l2_to(h2_mac, 2));
  table_write(net.switch_state(2), WriteOp::Insert, l2_to(h2_mac, 2));
  table_write(net.switch_state(3), WriteOp::Insert, l2_to(h2_mac, 1));
  net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9000, false, true, Bytes{0xAB});
  const auto evs = drain(net);
  REQUIRE(evs.size() == 2);
  const auto& report = evs[0];
  const auto& delivery = evs[1];
  CHECK(report.kind == ObservableEvent::Kind::PacketIn);
  CHECK(report.reason == 0x02);
  CHECK(report.switch_id == 3);
  CHECK(delivery.kind == ObservableEvent::Kind::Delivery);
  CHECK(delivery.time == 5 + 11 + 100 + 22 + 100 + 33 + 5);

  const auto stack = parse_packet(decode_cpu_in(report.frame).frame).int_stack;
  REQUIRE(stack);
  CHECK(stack->hops == std::vector<IntHopMetadata>{{1, 11}, {2, 22}, {3, 33}});
  CHECK(stack->node_meta->node_id == 77);

  const auto delivered = parse_packet(delivery.frame);
  CHECK_FALSE(delivered.int_stack);
  CHECK(delivered.ipv4->dscp == 0);
  CHECK(delivered.payload == Bytes{0xAB});
}

TEST_CASE("packet-out leaves on the requested port") {
  Network net(parse_topology_json(kOneSwitch));
  const Bytes frame = net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9, false, false, {});
  drain(net);
  net.packet_out(1, 2, frame);
  auto evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].host_id == "h2");

  net.packet_out(1, kCpuOutAllPorts, frame);
  evs = drain(net);
  CHECK(evs.size() == 2);

  net.packet_out(1, 9, frame);
  evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].kind == ObservableEvent::Kind::Drop);
}

TEST_CASE("packet-out to the pipeline port is matched like ingress traffic") {
  const auto topo = parse_topology_json(kOneSwitch);
  Network net(topo);
  const Bytes rtps = net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 7400, true, false, {});
  drain(net);
  // No entries yet: an RTPS frame would go back to the CPU, which is refused.
  net.packet_out(1, kCpuOutPipeline, rtps);
  auto evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].kind == ObservableEvent::Kind::Drop);
  CHECK(evs[0].drop_reason == "cpu-loop");

  table_write(net.switch_state(1), WriteOp::Insert, l2_to(topo.hosts[1].mac, 2));
  const Bytes plain = net.inject_from_host("h1", parse_ipv4("10.0.0.2"), 9, false, false, {});
  drain(net);
  net.packet_out(1, kCpuOutPipeline, plain);
  evs = drain(net);
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].host_id == "h2");

  // Port 0 is reserved for this purpose and cannot be wired.
  const auto port0 = replace_once(replace_once(kOneSwitch, "\"a\": \"s1:2\"", "\"a\": \"s1:0\""),
                                  "\"switch\": 1, \"port\": 2", "\"switch\": 1, \"port\": 0");
  try {
    parse_topology_json(port0);
    FAIL("port 0 accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("reserved") != std::string::npos);
  }
}

TEST_CASE("event replay is deterministic and the clock never goes back") {
  const auto topo = load_topology(testsupport::data_path("swarm9.json"));
  auto run = [&](std::uint64_t seed) {
    Network net(topo);
    Rng rng(seed);
    // some L2 reachability so packets travel further than one hop
    for (const auto& h : topo.hosts) {
      table_write(net.switch_state(h.switch_id), WriteOp::Insert, l2_to(h.mac, h.port));
    }
    std::vector<std::string> trace;
    std::uint64_t last = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto& src = topo.hosts[testsupport::uniform(rng, 0, topo.hosts.size() - 1)];
      const auto& dst = topo.hosts[testsupport::uniform(rng, 0, topo.hosts.size() - 1)];
      net.inject_from_host(src.id, dst.ip, 7400, testsupport::coin(rng), testsupport::coin(rng),
                           testsupport::random_bytes(rng, 4));
      for (int k = 0; k < 3 && !net.idle(); ++k) {
        for (const auto& ev : net.step()) trace.push_back(format_event(ev));
        CHECK(net.now() >= last);
        last = net.now();
      }
    }
    for (const auto& ev : drain(net)) trace.push_back(format_event(ev));
    return trace;
  };
  const auto a = run(99);
  const auto b = run(99);
  CHECK(a.size() > 1000);
  CHECK(a == b);
  CHECK(a != run(100));
}
