#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "swarmkdn/packet.hpp"

namespace swarmkdn {

enum class TableId : std::uint8_t { Acl = 1, L2 = 2 };

std::string_view to_string(TableId t);

/// Ternary match over (src_ip, dst_ip, udp_dst_port). A value may not carry
/// bits outside its mask.
struct AclMatch {
  Ipv4Address src_ip = 0;
  Ipv4Address src_mask = 0;
  Ipv4Address dst_ip = 0;
  Ipv4Address dst_mask = 0;
  std::uint16_t udp_dst_port = 0;
  std::uint16_t udp_dst_port_mask = 0;
  bool operator==(const AclMatch&) const = default;
};

struct L2Match {
  MacAddress dst_mac{};
  bool operator==(const L2Match&) const = default;
};

using MatchKey = std::variant<AclMatch, L2Match>;

struct ForwardAction {
  std::uint16_t port = 0;
  bool operator==(const ForwardAction&) const = default;
};
struct DropAction {
  bool operator==(const DropAction&) const = default;
};
struct SendToCpuAction {
  std::uint8_t reason = 0;
  bool operator==(const SendToCpuAction&) const = default;
};
struct MulticastAction {
  std::uint16_t group_id = 0;
  bool operator==(const MulticastAction&) const = default;
};

using Action = std::variant<ForwardAction, DropAction, SendToCpuAction, MulticastAction>;
using ForwardingDecision = Action;

std::string describe(const Action& a);

struct TableEntry {
  MatchKey key;
  std::uint32_t priority = 0;  // ACL only; L2 entries keep 0
  Action action;

  TableId table() const { return std::holds_alternative<AclMatch>(key) ? TableId::Acl : TableId::L2; }
  bool operator==(const TableEntry&) const = default;
};

/// Raw key bytes used for duplicate detection and deterministic ordering.
/// ACL: src,src_mask,dst,dst_mask (u32 each), port,port_mask (u16 each).
/// L2: the 6-byte MAC.
Bytes key_bytes(const MatchKey& key);

struct MulticastGroup {
  std::uint16_t group_id = 0;
  std::set<std::uint16_t> egress_ports;
  bool operator==(const MulticastGroup&) const = default;
};

enum class WriteOp : std::uint8_t { Insert = 1, Modify = 2, Delete = 3 };

std::string_view to_string(WriteOp op);

enum class IntRole : std::uint8_t { None, Transit, Sink };

std::string_view to_string(IntRole r);
IntRole parse_int_role(std::string_view text);

/// One P4-style switch: two match-action tables, a replication engine and
/// its INT role. Table contents change only through table_write/group_write.
class SwitchState {
 public:
  SwitchState(std::uint32_t switch_id, std::uint32_t proc_latency_us, IntRole role,
              std::set<std::uint16_t> ports);

  std::uint32_t id() const { return id_; }
  std::uint32_t proc_latency_us() const { return proc_latency_us_; }
  void set_proc_latency_us(std::uint32_t us) { proc_latency_us_ = us; }
  IntRole int_role() const { return int_role_; }
  const std::set<std::uint16_t>& ports() const { return ports_; }
  bool has_port(std::uint16_t port) const { return ports_.contains(port); }

  std::size_t table_size(TableId t) const;
  const MulticastGroup* find_group(std::uint16_t group_id) const;
  std::vector<MulticastGroup> groups() const;

  std::uint64_t hop_cap_exceeded() const { return hop_cap_exceeded_; }
  void note_hop_cap_exceeded() { ++hop_cap_exceeded_; }

 private:
  using EntryMap = std::map<std::pair<Bytes, std::uint32_t>, TableEntry>;

  EntryMap& table(TableId t) { return t == TableId::Acl ? acl_ : l2_; }
  const EntryMap& table(TableId t) const { return t == TableId::Acl ? acl_ : l2_; }

  friend std::size_t table_write(SwitchState&, WriteOp, const TableEntry&);
  friend std::size_t group_write(SwitchState&, WriteOp, const MulticastGroup&);
  friend std::vector<TableEntry> table_read(const SwitchState&, TableId);
  friend ForwardingDecision apply_pipeline(const SwitchState&, const HeaderStack&, std::uint16_t);

  std::uint32_t id_;
  std::uint32_t proc_latency_us_;
  IntRole int_role_;
  std::set<std::uint16_t> ports_;
  EntryMap acl_;
  EntryMap l2_;
  std::map<std::uint16_t, MulticastGroup> groups_;
  std::uint64_t hop_cap_exceeded_ = 0;
};

/// Validates an entry against the switch (ports, group references, mask
/// discipline). Throws InvalidEntry or UnknownGroup.
void validate_entry(const SwitchState& s, const TableEntry& e);

/// Insert/Modify/Delete with P4Runtime-style errors (AlreadyExists,
/// NotFound). Returns the resulting table size.
std::size_t table_write(SwitchState& s, WriteOp op, const TableEntry& e);

/// Same contract for replication groups. Returns the resulting group count.
std::size_t group_write(SwitchState& s, WriteOp op, const MulticastGroup& g);

/// Snapshot ordered by priority descending, then key bytes ascending.
std::vector<TableEntry> table_read(const SwitchState& s, TableId t);

/// ACL first (highest priority, ties by ascending key bytes); on a miss RTPS
/// goes to the CPU, everything else falls through to L2; an L2 miss drops.
ForwardingDecision apply_pipeline(const SwitchState& s, const HeaderStack& pkt,
                                  std::uint16_t ingress_port);

/// Does the ACL key match the packet's fields?
bool acl_matches(const AclMatch& m, const HeaderStack& pkt);

struct IntReport {
  std::uint32_t sink_switch_id = 0;
  Ipv4Address src_ip = 0;
  Ipv4Address dst_ip = 0;
  IntStack stack;
  bool operator==(const IntReport&) const = default;
};

struct IntResult {
  HeaderStack packet;
  std::optional<IntReport> report;
  bool hop_cap_exceeded = false;
};

/// Egress INT processing. Transit appends {switch_id, proc_latency}; a Sink
/// facing a host also extracts the stack into a report and strips the shim.
/// A Sink forwarding towards another switch acts as Transit.
IntResult process_int(SwitchState& s, HeaderStack pkt, bool host_egress = true);

/// One copy per group port except the ingress port.
std::vector<std::pair<std::uint16_t, HeaderStack>> multicast_replicate(
    const SwitchState& s, std::uint16_t group_id, const HeaderStack& pkt,
    std::uint16_t ingress_port);

}  // namespace swarmkdn
