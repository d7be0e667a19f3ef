#include "swarmkdn/network.hpp"

#include <cinttypes>
#include <cstdio>

namespace swarmkdn {

std::string format_event(const ObservableEvent& ev) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016" PRIx64, fnv1a64(ev.frame));
  std::string line = "t=" + std::to_string(ev.time) + " ";
  switch (ev.kind) {
    case ObservableEvent::Kind::Delivery:
      line += "delivery host=" + ev.host_id;
      break;
    case ObservableEvent::Kind::PacketIn: {
      char reason[5];
      std::snprintf(reason, sizeof reason, "0x%02x", ev.reason);
      line += "packet_in switch=" + std::to_string(ev.switch_id) + " port=" + std::to_string(ev.port) +
              " reason=" + reason;
      break;
    }
    case ObservableEvent::Kind::Drop:
      line += "drop switch=" + std::to_string(ev.switch_id) + " port=" + std::to_string(ev.port) +
              " why=" + ev.drop_reason;
      break;
  }
  line += " len=" + std::to_string(ev.frame.size()) + " digest=" + digest;
  return line;
}

Network::Network(Topology topology) : topology_(std::move(topology)) {
  topology_.validate();
  for (const auto& s : topology_.switches) {
    auto ports = topology_.switch_ports(s.id);
    switches_.emplace(s.id, SwitchState(s.id, s.proc_latency_us, s.int_role,
                                        std::set<std::uint16_t>(ports.begin(), ports.end())));
  }
  auto ref_of = [&](const Endpoint& ep) {
    NodeRef r;
    if (ep.is_switch()) {
      r.switch_id = ep.switch_id;
      r.port = ep.port;
    } else {
      r.is_host = true;
      r.host_index = host_index(ep.host_id);
    }
    return r;
  };
  for (std::size_t i = 0; i < topology_.links.size(); ++i) {
    const auto& l = topology_.links[i];
    if (l.a.is_switch()) ports_[{l.a.switch_id, l.a.port}] = PortPeer{ref_of(l.b), i};
    if (l.b.is_switch()) ports_[{l.b.switch_id, l.b.port}] = PortPeer{ref_of(l.a), i};
  }
}

SwitchState& Network::switch_state(std::uint32_t id) {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw Error(ErrorCode::UnknownSwitch, "switch " + std::to_string(id));
  return it->second;
}

const SwitchState& Network::switch_state(std::uint32_t id) const {
  auto it = switches_.find(id);
  if (it == switches_.end()) throw Error(ErrorCode::UnknownSwitch, "switch " + std::to_string(id));
  return it->second;
}

std::vector<std::uint32_t> Network::switch_ids() const {
  std::vector<std::uint32_t> ids;
  for (const auto& [id, _] : switches_) ids.push_back(id);
  return ids;
}

std::optional<std::uint64_t> Network::next_event_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().time;
}

std::size_t Network::host_index(std::string_view host_id) const {
  for (std::size_t i = 0; i < topology_.hosts.size(); ++i) {
    if (topology_.hosts[i].id == host_id) return i;
  }
  throw Error(ErrorCode::UnknownHost, "host '" + std::string(host_id) + "'");
}

const Network::PortPeer& Network::peer_of(std::uint32_t switch_id, std::uint16_t port) const {
  return ports_.at({switch_id, port});
}

void Network::schedule(Pending ev) {
  ev.seq = next_seq_++;
  queue_.push(std::move(ev));
}

std::vector<ObservableEvent> Network::step() {
  std::vector<ObservableEvent> out;
  if (queue_.empty()) return out;
  Pending ev = queue_.top();
  queue_.pop();
  clock_ = std::max(clock_, ev.time);
  ++counters_.events_processed;

  if (ev.kind == Pending::Kind::PacketOut) {
    emit_packet_out(ev, out);
  } else if (ev.target.is_host) {
    ObservableEvent d;
    d.kind = ObservableEvent::Kind::Delivery;
    d.time = clock_;
    d.host_id = topology_.hosts[ev.target.host_index].id;
    d.frame = std::move(ev.frame);
    ++counters_.deliveries;
    out.push_back(std::move(d));
  } else {
    arrive_at_switch(ev, out);
  }
  return out;
}

std::vector<ObservableEvent> Network::run_until(std::uint64_t t) {
  std::vector<ObservableEvent> out;
  while (!queue_.empty() && queue_.top().time <= t) {
    auto evs = step();
    out.insert(out.end(), std::make_move_iterator(evs.begin()), std::make_move_iterator(evs.end()));
  }
  clock_ = std::max(clock_, t);
  return out;
}

std::vector<ObservableEvent> Network::run_before(std::uint64_t t) {
  std::vector<ObservableEvent> out;
  while (!queue_.empty() && queue_.top().time < t) {
    auto evs = step();
    out.insert(out.end(), std::make_move_iterator(evs.begin()), std::make_move_iterator(evs.end()));
  }
  clock_ = std::max(clock_, t);
  return out;
}

void Network::drop(std::uint32_t switch_id, std::uint16_t port, std::string reason,
                   std::vector<ObservableEvent>& out) {
  ObservableEvent d;
  d.kind = ObservableEvent::Kind::Drop;
  d.time = clock_;
  d.switch_id = switch_id;
  d.port = port;
  d.drop_reason = std::move(reason);
  ++counters_.drops;
  out.push_back(std::move(d));
}

void Network::arrive_at_switch(const Pending& ev, std::vector<ObservableEvent>& out) {
  auto& sw = switch_state(ev.target.switch_id);
  const std::uint16_t in_port = ev.target.port;
  HeaderStack pkt;
  try {
    pkt = parse_packet(ev.frame);
  } catch (const Error& e) {
    drop(sw.id(), in_port, "parse-error", out);
    return;
  }

  forward(sw, in_port, std::move(pkt), ev.frame, out);
}

void Network::forward(SwitchState& sw, std::uint16_t in_port, HeaderStack pkt, const Bytes& frame,
                      std::vector<ObservableEvent>& out) {
  const bool from_cpu = in_port == kCpuOutPipeline;
  ForwardingDecision decision;
  try {
    decision = apply_pipeline(sw, pkt, in_port);
  } catch (const Error& e) {
    drop(sw.id(), in_port, "unknown-group", out);
    return;
  }

  if (std::holds_alternative<DropAction>(decision)) {
    drop(sw.id(), in_port, "pipeline", out);
  } else if (const auto* cpu = std::get_if<SendToCpuAction>(&decision)) {
    // A controller-submitted frame that misses again would bounce forever.
    if (from_cpu) {
      drop(sw.id(), in_port, "cpu-loop", out);
      return;
    }
    ObservableEvent pi;
    pi.kind = ObservableEvent::Kind::PacketIn;
    pi.time = clock_;
    pi.switch_id = sw.id();
    pi.port = in_port;
    pi.reason = cpu->reason;
    pi.frame = encode_cpu_in(CpuIn{in_port, cpu->reason, frame});
    ++counters_.packet_ins;
    out.push_back(std::move(pi));
  } else if (const auto* fwd = std::get_if<ForwardAction>(&decision)) {
    egress(sw, fwd->port, in_port, std::move(pkt), out);
  } else {
    const auto group = std::get<MulticastAction>(decision).group_id;
    for (auto& [port, copy] : multicast_replicate(sw, group, pkt, in_port)) {
      egress(sw, port, in_port, std::move(copy), out);
    }
  }
}

void Network::emit_packet_out(const Pending& ev, std::vector<ObservableEvent>& out) {
  auto& sw = switch_state(ev.target.switch_id);
  HeaderStack pkt;
  try {
    pkt = parse_packet(ev.frame);
  } catch (const Error&) {
    drop(sw.id(), ev.target.port, "parse-error", out);
    return;
  }
  if (ev.target.port == kCpuOutPipeline) {
    forward(sw, kCpuOutPipeline, std::move(pkt), ev.frame, out);
  } else if (ev.target.port == kCpuOutAllPorts) {
    for (auto port : sw.ports()) egress(sw, port, kCpuOutAllPorts, pkt, out);
  } else if (sw.has_port(ev.target.port)) {
    egress(sw, ev.target.port, kCpuOutAllPorts, std::move(pkt), out);
  } else {
    drop(sw.id(), ev.target.port, "bad-port", out);
  }
}

void Network::egress(SwitchState& sw, std::uint16_t port, std::uint16_t ingress_port, HeaderStack pkt,
                     std::vector<ObservableEvent>& out) {
  const auto& peer = peer_of(sw.id(), port);
  auto result = process_int(sw, std::move(pkt), peer.peer.is_host);
  if (result.hop_cap_exceeded) ++counters_.hop_cap_exceeded;
  if (result.report) {
    // The report travels to the controller as the frame the sink saw,
    // its own hop included.
    HeaderStack with_int = result.packet;
    with_int.ipv4->dscp = kIntDscp;
    with_int.int_stack = result.report->stack;
    fix_lengths(with_int);
    ObservableEvent pi;
    pi.kind = ObservableEvent::Kind::PacketIn;
    pi.time = clock_;
    pi.switch_id = sw.id();
    pi.port = ingress_port;
    pi.reason = static_cast<std::uint8_t>(CpuReason::IntReport);
    pi.frame = encode_cpu_in(CpuIn{ingress_port, pi.reason, emit_packet(with_int)});
    ++counters_.packet_ins;
    ++counters_.int_reports;
    out.push_back(std::move(pi));
  }

  Pending next;
  next.kind = Pending::Kind::Arrival;
  next.time = clock_ + sw.proc_latency_us() + topology_.links[peer.link_index].latency_us;
  next.target = peer.peer;
  next.frame = emit_packet(result.packet);
  schedule(std::move(next));
}

Bytes Network::inject_from_host(std::string_view host_id, Ipv4Address dst_ip, std::uint16_t dst_port,
                                bool rtps, bool int_enabled, ByteView payload) {
  const std::size_t idx = host_index(host_id);
  const auto& host = topology_.hosts[idx];

  HeaderStack h;
  h.eth.src_mac = host.mac;
  if (const auto* dst = topology_.find_host_by_ip(dst_ip)) {
    h.eth.dst_mac = dst->mac;
  } else if (is_multicast_ipv4(dst_ip)) {
    h.eth.dst_mac = multicast_mac_for(dst_ip);
  } else {
    h.eth.dst_mac.fill(0xFF);
  }
  h.eth.ethertype = kEthertypeIpv4;
  Ipv4Header ip;
  ip.dscp = int_enabled ? kIntDscp : 0;
  ip.ttl = 64;
  ip.protocol = kIpProtoUdp;
  ip.src_ip = host.ip;
  ip.dst_ip = dst_ip;
  h.ipv4 = ip;
  h.udp = UdpHeader{49152, dst_port, 0};
  if (int_enabled) {
    IntStack stack;
    stack.node_meta = NodeMetadata{host.node_id, host.cpu_load_pct, host.loc_x, host.loc_y,
                                   host.capabilities};
    h.int_stack = std::move(stack);
  }
  if (rtps) {
    RtpsHeader r;
    r.protocol_version = 0x0203;
    r.vendor_id = 0x0101;
    ByteWriter guid;
    guid.u32(host.node_id);
    guid.raw(host.mac);
    auto g = guid.take();
    std::copy(g.begin(), g.end(), r.guid_prefix.begin());
    h.rtps = r;
  }
  h.payload.assign(payload.begin(), payload.end());
  fix_lengths(h);
  Bytes frame = emit_packet(h);

  const auto link = topology_.find_host_link(host.id);
  Pending ev;
  ev.kind = Pending::Kind::Arrival;
  ev.time = clock_ + topology_.links[*link].latency_us;
  ev.target.switch_id = host.switch_id;
  ev.target.port = host.port;
  ev.frame = frame;
  schedule(std::move(ev));
  return frame;
}

void Network::packet_out(std::uint32_t switch_id, std::uint16_t egress_port, Bytes frame) {
  switch_state(switch_id);
  Pending ev;
  ev.kind = Pending::Kind::PacketOut;
  ev.time = clock_;
  ev.target.switch_id = switch_id;
  ev.target.port = egress_port;
  ev.frame = std::move(frame);
  schedule(std::move(ev));
}

void Network::set_link_latency(std::size_t link_index, std::uint32_t latency_us) {
  if (link_index >= topology_.links.size()) throw Error(ErrorCode::UnknownEntity, "link index out of range");
  topology_.links[link_index].latency_us = latency_us;
}

void Network::set_proc_latency(std::uint32_t switch_id, std::uint32_t latency_us) {
  if (latency_us == 0) throw Error(ErrorCode::InvariantViolation, "proc latency must be positive");
  switch_state(switch_id).set_proc_latency_us(latency_us);
  for (auto& s : topology_.switches) {
    if (s.id == switch_id) s.proc_latency_us = latency_us;
  }
}

void Network::set_cpu_load(std::string_view host_id, std::uint8_t pct) {
  if (pct > 100) throw Error(ErrorCode::InvariantViolation, "cpu load above 100");
  topology_.hosts[host_index(host_id)].cpu_load_pct = pct;
}

}  // namespace swarmkdn
