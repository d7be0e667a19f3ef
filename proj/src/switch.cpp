#include "swarmkdn/switch.hpp"

#include <algorithm>

namespace swarmkdn {

std::string_view to_string(TableId t) { return t == TableId::Acl ? "acl" : "l2"; }

std::string_view to_string(WriteOp op) {
  switch (op) {
    case WriteOp::Insert: return "insert";
    case WriteOp::Modify: return "modify";
    case WriteOp::Delete: return "delete";
  }
  return "?";
}

std::string_view to_string(IntRole r) {
  switch (r) {
    case IntRole::None: return "none";
    case IntRole::Transit: return "transit";
    case IntRole::Sink: return "sink";
  }
  return "?";
}

IntRole parse_int_role(std::string_view text) {
  if (text == "none") return IntRole::None;
  if (text == "transit") return IntRole::Transit;
  if (text == "sink") return IntRole::Sink;
  throw Error(ErrorCode::ParseError, "unknown int_role '" + std::string(text) + "'");
}

std::string describe(const Action& a) {
  struct Visitor {
    std::string operator()(const ForwardAction& f) const { return "forward(" + std::to_string(f.port) + ")"; }
    std::string operator()(const DropAction&) const { return "drop"; }
    std::string operator()(const SendToCpuAction& c) const { return "cpu(" + std::to_string(c.reason) + ")"; }
    std::string operator()(const MulticastAction& m) const {
      return "multicast(" + std::to_string(m.group_id) + ")";
    }
  };
  return std::visit(Visitor{}, a);
}

Bytes key_bytes(const MatchKey& key) {
  ByteWriter out;
  if (const auto* acl = std::get_if<AclMatch>(&key)) {
    out.u32(acl->src_ip);
    out.u32(acl->src_mask);
    out.u32(acl->dst_ip);
    out.u32(acl->dst_mask);
    out.u16(acl->udp_dst_port);
    out.u16(acl->udp_dst_port_mask);
  } else {
    out.raw(std::get<L2Match>(key).dst_mac);
  }
  return out.take();
}

SwitchState::SwitchState(std::uint32_t switch_id, std::uint32_t proc_latency_us, IntRole role,
                         std::set<std::uint16_t> ports)
    : id_(switch_id), proc_latency_us_(proc_latency_us), int_role_(role), ports_(std::move(ports)) {}

std::size_t SwitchState::table_size(TableId t) const { return table(t).size(); }

const MulticastGroup* SwitchState::find_group(std::uint16_t group_id) const {
  auto it = groups_.find(group_id);
  return it == groups_.end() ? nullptr : &it->second;
}

std::vector<MulticastGroup> SwitchState::groups() const {
  std::vector<MulticastGroup> out;
  out.reserve(groups_.size());
  for (const auto& [_, g] : groups_) out.push_back(g);
  return out;
}

namespace {

void validate_key(const TableEntry& e) {
  if (const auto* acl = std::get_if<AclMatch>(&e.key)) {
    if ((acl->src_ip & ~acl->src_mask) != 0 || (acl->dst_ip & ~acl->dst_mask) != 0 ||
        (acl->udp_dst_port & ~acl->udp_dst_port_mask) != 0) {
      throw Error(ErrorCode::InvalidEntry, "ACL value has bits outside its mask");
    }
  } else if (e.priority != 0) {
    throw Error(ErrorCode::InvalidEntry, "L2 entries carry no priority");
  }
}

}  // namespace

void validate_entry(const SwitchState& s, const TableEntry& e) {
  validate_key(e);
  if (const auto* fwd = std::get_if<ForwardAction>(&e.action)) {
    if (!s.has_port(fwd->port)) {
      throw Error(ErrorCode::InvalidEntry, "forward to port " + std::to_string(fwd->port) +
                                               " which switch " + std::to_string(s.id()) + " lacks");
    }
  } else if (const auto* cpu = std::get_if<SendToCpuAction>(&e.action)) {
    if (!is_valid_cpu_reason(cpu->reason)) throw Error(ErrorCode::InvalidEntry, "bad CPU reason");
  } else if (const auto* mc = std::get_if<MulticastAction>(&e.action)) {
    if (mc->group_id == 0) throw Error(ErrorCode::InvalidEntry, "group 0 is reserved");
    if (s.find_group(mc->group_id) == nullptr) {
      throw Error(ErrorCode::UnknownGroup, "group " + std::to_string(mc->group_id));
    }
  }
}

std::size_t table_write(SwitchState& s, WriteOp op, const TableEntry& e) {
  if (op == WriteOp::Delete) {
    validate_key(e);
  } else {
    validate_entry(s, e);
  }
  auto& table = s.table(e.table());
  auto key = std::make_pair(key_bytes(e.key), e.priority);
  auto it = table.find(key);
  switch (op) {
    case WriteOp::Insert:
      if (it != table.end()) throw Error(ErrorCode::AlreadyExists, "table entry already present");
      table.emplace(std::move(key), e);
      break;
    case WriteOp::Modify:
      if (it == table.end()) throw Error(ErrorCode::NotFound, "no entry to modify");
      it->second.action = e.action;
      break;
    case WriteOp::Delete:
      if (it == table.end()) throw Error(ErrorCode::NotFound, "no entry to delete");
      table.erase(it);
      break;
  }
  return table.size();
}

std::size_t group_write(SwitchState& s, WriteOp op, const MulticastGroup& g) {
  if (g.group_id == 0) throw Error(ErrorCode::InvalidEntry, "group 0 is reserved");
  if (op != WriteOp::Delete) {
    if (g.egress_ports.empty()) throw Error(ErrorCode::InvalidEntry, "group without egress ports");
    for (auto port : g.egress_ports) {
      if (!s.has_port(port)) {
        throw Error(ErrorCode::InvalidEntry, "group port " + std::to_string(port) + " does not exist");
      }
    }
  }
  auto it = s.groups_.find(g.group_id);
  switch (op) {
    case WriteOp::Insert:
      if (it != s.groups_.end()) throw Error(ErrorCode::AlreadyExists, "group already present");
      s.groups_.emplace(g.group_id, g);
      break;
    case WriteOp::Modify:
      if (it == s.groups_.end()) throw Error(ErrorCode::NotFound, "no group to modify");
      it->second.egress_ports = g.egress_ports;
      break;
    case WriteOp::Delete:
      if (it == s.groups_.end()) throw Error(ErrorCode::NotFound, "no group to delete");
      s.groups_.erase(it);
      break;
  }
  return s.groups_.size();
}

std::vector<TableEntry> table_read(const SwitchState& s, TableId t) {
  const auto& table = s.table(t);
  std::vector<const SwitchState::EntryMap::value_type*> rows;
  rows.reserve(table.size());
  for (const auto& kv : table) rows.push_back(&kv);
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    if (a->first.second != b->first.second) return a->first.second > b->first.second;
    return a->first.first < b->first.first;
  });
  std::vector<TableEntry> out;
  out.reserve(rows.size());
  for (const auto* kv : rows) out.push_back(kv->second);
  return out;
}

bool acl_matches(const AclMatch& m, const HeaderStack& pkt) {
  if (!pkt.ipv4) return false;
  const std::uint16_t port = pkt.udp ? pkt.udp->dst_port : 0;
  return (pkt.ipv4->src_ip & m.src_mask) == m.src_ip && (pkt.ipv4->dst_ip & m.dst_mask) == m.dst_ip &&
         (port & m.udp_dst_port_mask) == m.udp_dst_port;
}

ForwardingDecision apply_pipeline(const SwitchState& s, const HeaderStack& pkt,
                                  std::uint16_t /*ingress_port*/) {
  // The ACL map iterates in (key bytes, priority) order, so the first entry
  // seen at the best priority is also the smallest key among equals.
  const TableEntry* best = nullptr;
  for (const auto& [key, entry] : s.acl_) {
    if (best != nullptr && entry.priority <= best->priority) continue;
    if (acl_matches(std::get<AclMatch>(entry.key), pkt)) best = &entry;
  }

  ForwardingDecision decision = DropAction{};
  if (best != nullptr) {
    decision = best->action;
  } else if (pkt.rtps) {
    decision = SendToCpuAction{static_cast<std::uint8_t>(CpuReason::RtpsInspect)};
  } else {
    auto it = s.l2_.find({key_bytes(L2Match{pkt.eth.dst_mac}), 0});
    if (it != s.l2_.end()) decision = it->second.action;
  }

  if (const auto* mc = std::get_if<MulticastAction>(&decision)) {
    if (s.find_group(mc->group_id) == nullptr) {
      throw Error(ErrorCode::UnknownGroup, "decision references group " + std::to_string(mc->group_id));
    }
  }
  return decision;
}

IntResult process_int(SwitchState& s, HeaderStack pkt, bool host_egress) {
  IntResult result;
  if (s.int_role() == IntRole::None || !pkt.int_stack) {
    result.packet = std::move(pkt);
    return result;
  }
  auto& stack = *pkt.int_stack;
  if (stack.hops.size() >= kIntHopCap) {
    s.note_hop_cap_exceeded();
    result.hop_cap_exceeded = true;
  } else {
    stack.hops.push_back({s.id(), s.proc_latency_us()});
  }
  if (s.int_role() == IntRole::Sink && host_egress) {
    IntReport report;
    report.sink_switch_id = s.id();
    report.src_ip = pkt.ipv4->src_ip;
    report.dst_ip = pkt.ipv4->dst_ip;
    report.stack = std::move(stack);
    result.report = std::move(report);
    pkt.int_stack.reset();
    pkt.ipv4->dscp = 0;
  }
  fix_lengths(pkt);
  result.packet = std::move(pkt);
  return result;
}

std::vector<std::pair<std::uint16_t, HeaderStack>> multicast_replicate(
    const SwitchState& s, std::uint16_t group_id, const HeaderStack& pkt,
    std::uint16_t ingress_port) {
  const auto* group = s.find_group(group_id);
  if (group == nullptr) throw Error(ErrorCode::UnknownGroup, "group " + std::to_string(group_id));
  std::vector<std::pair<std::uint16_t, HeaderStack>> copies;
  for (auto port : group->egress_ports) {
    if (port != ingress_port) copies.emplace_back(port, pkt);
  }
  return copies;
}

}  // namespace swarmkdn
