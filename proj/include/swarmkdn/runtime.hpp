#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "swarmkdn/channel.hpp"
#include "swarmkdn/controller.hpp"
#include "swarmkdn/network.hpp"

namespace swarmkdn {

struct Delivery {
  std::uint64_t time = 0;
  std::string host_id;
  Bytes frame;
};

struct RuntimeCounters {
  std::uint64_t packet_ins = 0;
  std::uint64_t int_reports = 0;
  std::uint64_t writes_issued = 0;     // write requests sent to switches
  std::uint64_t updates_failed = 0;    // per-update statuses other than Ok
  std::uint64_t packet_outs = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t drops = 0;
};

/// Couples the simulated fabric and the controller. Every packet-in,
/// write and packet-out crosses the control channel as encoded bytes.
/// Delayed writes (make-before-break cleanup) are held here and applied at
/// their due time, after network events scheduled for the same instant.
class Runtime {
 public:
  explicit Runtime(const Topology& topo, ControllerConfig config = {});

  Network& network() { return network_; }
  const Network& network() const { return network_; }
  Controller& controller() { return controller_; }
  const Controller& controller() const { return controller_; }

  std::uint64_t now() const { return network_.now(); }

  /// Executes a batch of controller actions at the current instant.
  void apply(const std::vector<ControlAction>& actions);

  /// Processes everything due strictly before t, then sets the clock to t.
  void run_before(std::uint64_t t);
  /// Processes everything due at or before t, then sets the clock to t.
  void run_until(std::uint64_t t);
  /// Runs until no event or pending write is left. Returns false if
  /// max_steps was reached first.
  bool run_to_idle(std::uint64_t max_steps = 50'000'000);

  bool idle() const { return network_.idle() && delayed_.empty(); }

  /// Called after every processed step; tests use it to check invariants
  /// at each event-queue instant.
  void set_step_hook(std::function<void(const Runtime&)> hook) { hook_ = std::move(hook); }

  const std::vector<std::string>& trace() const { return trace_; }
  const std::vector<Delivery>& deliveries() const { return deliveries_; }
  const RuntimeCounters& counters() const { return counters_; }

 private:
  struct DelayedWrite {
    std::uint64_t due = 0;
    std::uint64_t seq = 0;
    WriteRequest request;
  };
  struct LaterWrite {
    bool operator()(const DelayedWrite& a, const DelayedWrite& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };

  /// One unit of progress with due time <= limit (inclusive) or < limit.
  bool step_once(std::uint64_t limit, bool inclusive);
  void handle_events(const std::vector<ObservableEvent>& events);
  void send_write(const WriteRequest& req);
  void record(std::string line);

  Network network_;
  Controller controller_;
  std::priority_queue<DelayedWrite, std::vector<DelayedWrite>, LaterWrite> delayed_;
  std::uint64_t next_write_seq_ = 0;
  std::vector<std::string> trace_;
  std::vector<Delivery> deliveries_;
  RuntimeCounters counters_;
  std::function<void(const Runtime&)> hook_;
};

}  // namespace swarmkdn
