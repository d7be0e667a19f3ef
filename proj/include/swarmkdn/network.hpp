#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "swarmkdn/packet.hpp"
#include "swarmkdn/switch.hpp"
#include "swarmkdn/topology.hpp"

namespace swarmkdn {

/// What the outside world can see of a simulation step.
struct ObservableEvent {
  enum class Kind { Delivery, PacketIn, Drop };

  Kind kind = Kind::Delivery;
  std::uint64_t time = 0;
  std::string host_id;          // Delivery
  std::uint32_t switch_id = 0;  // PacketIn, Drop
  std::uint16_t port = 0;       // ingress port for PacketIn/Drop
  std::uint8_t reason = 0;      // PacketIn: CpuReason
  std::string drop_reason;      // Drop
  Bytes frame;                  // delivered frame, or the CPU-in encapsulated bytes

  bool operator==(const ObservableEvent&) const = default;
};

/// One trace line; stable across runs and platforms.
std::string format_event(const ObservableEvent& ev);

struct NetworkCounters {
  std::uint64_t events_processed = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t packet_ins = 0;
  std::uint64_t drops = 0;
  std::uint64_t int_reports = 0;
  std::uint64_t hop_cap_exceeded = 0;
};

/// Deterministic discrete-event simulation of hosts, links and switches.
/// Events are ordered by (virtual time, insertion order). A Network may be
/// moved between threads but is never shared mutably.
class Network {
 public:
  explicit Network(Topology topology);

  const Topology& topology() const { return topology_; }
  SwitchState& switch_state(std::uint32_t id);
  const SwitchState& switch_state(std::uint32_t id) const;
  std::vector<std::uint32_t> switch_ids() const;

  std::uint64_t now() const { return clock_; }
  bool idle() const { return queue_.empty(); }
  std::optional<std::uint64_t> next_event_time() const;

  /// Processes the earliest event. An empty queue yields no events.
  std::vector<ObservableEvent> step();

  /// Runs every event with time <= t, then moves the clock to t.
  std::vector<ObservableEvent> run_until(std::uint64_t t);

  /// Runs every event with time < t, then moves the clock to t.
  std::vector<ObservableEvent> run_before(std::uint64_t t);

  /// Builds a UDP frame at the host (INT shim with the host's node metadata
  /// when int_enabled, RTPS header when rtps) and schedules its arrival at
  /// the attachment switch. Returns the emitted frame.
  Bytes inject_from_host(std::string_view host_id, Ipv4Address dst_ip, std::uint16_t dst_port,
                         bool rtps, bool int_enabled, ByteView payload);

  /// Controller packet-out at the current time: the frame leaves the switch
  /// on egress_port, on every port for kCpuOutAllPorts, or goes through the
  /// ingress pipeline with no ingress port for kCpuOutPipeline.
  void packet_out(std::uint32_t switch_id, std::uint16_t egress_port, Bytes frame);

  void set_link_latency(std::size_t link_index, std::uint32_t latency_us);
  void set_proc_latency(std::uint32_t switch_id, std::uint32_t latency_us);
  void set_cpu_load(std::string_view host_id, std::uint8_t pct);

  const NetworkCounters& counters() const { return counters_; }

 private:
  struct NodeRef {
    bool is_host = false;
    std::uint32_t switch_id = 0;
    std::uint16_t port = 0;
    std::size_t host_index = 0;
  };
  struct PortPeer {
    NodeRef peer;
    std::size_t link_index = 0;
  };
  struct Pending {
    enum class Kind { Arrival, PacketOut };
    std::uint64_t time = 0;
    std::uint64_t seq = 0;
    Kind kind = Kind::Arrival;
    NodeRef target;  // arrival node, or packet-out switch with port = egress
    Bytes frame;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void schedule(Pending ev);
  void arrive_at_switch(const Pending& ev, std::vector<ObservableEvent>& out);
  void forward(SwitchState& sw, std::uint16_t in_port, HeaderStack pkt, const Bytes& frame,
               std::vector<ObservableEvent>& out);
  void emit_packet_out(const Pending& ev, std::vector<ObservableEvent>& out);
  void egress(SwitchState& sw, std::uint16_t port, std::uint16_t ingress_port, HeaderStack pkt,
              std::vector<ObservableEvent>& out);
  void drop(std::uint32_t switch_id, std::uint16_t port, std::string reason,
            std::vector<ObservableEvent>& out);
  const PortPeer& peer_of(std::uint32_t switch_id, std::uint16_t port) const;
  std::size_t host_index(std::string_view host_id) const;

  Topology topology_;
  std::map<std::uint32_t, SwitchState> switches_;
  std::map<std::pair<std::uint32_t, std::uint16_t>, PortPeer> ports_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::uint64_t clock_ = 0;
  std::uint64_t next_seq_ = 0;
  NetworkCounters counters_;
};

}  // namespace swarmkdn
