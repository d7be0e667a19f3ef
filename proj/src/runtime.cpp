#include "swarmkdn/runtime.hpp"

#include "swarmkdn/log.hpp"

namespace swarmkdn {
namespace {

std::string_view op_name(WriteOp op) {
  switch (op) {
    case WriteOp::Insert: return "insert";
    case WriteOp::Modify: return "modify";
    case WriteOp::Delete: return "delete";
  }
  return "?";
}

std::string describe_update(const Update& u) {
  std::string s(op_name(u.op));
  if (const auto* g = std::get_if<MulticastGroup>(&u.entity)) {
    s += " group=" + std::to_string(g->group_id) + " ports=";
    bool first = true;
    for (auto p : g->egress_ports) {
      if (!first) s += ',';
      s += std::to_string(p);
      first = false;
    }
    return s;
  }
  const auto& e = std::get<TableEntry>(u.entity);
  s += e.table() == TableId::Acl ? " acl" : " l2";
  s += " prio=" + std::to_string(e.priority) + " key=" + to_hex(key_bytes(e.key)) + " " + describe(e.action);
  return s;
}

template <typename T>
T through_channel(const T& msg) {
  return std::get<T>(decode_message(encode_message(msg)));
}

}  // namespace

Runtime::Runtime(const Topology& topo, ControllerConfig config) : network_(topo), controller_(config) {
  controller_.bootstrap(topo);
}

void Runtime::record(std::string line) {
  log::debug(line);
  trace_.push_back(std::move(line));
}

void Runtime::send_write(const WriteRequest& req) {
  const WriteRequest wire = through_channel(req);
  const WriteReply reply = through_channel(dispatch_write(network_, wire));
  ++counters_.writes_issued;
  std::string line = "t=" + std::to_string(now()) + " write switch=" + std::to_string(wire.switch_id);
  for (std::size_t i = 0; i < wire.updates.size(); ++i) {
    const auto status = i < reply.statuses.size() ? reply.statuses[i] : WriteStatus::InvalidEntry;
    if (status != WriteStatus::Ok) ++counters_.updates_failed;
    line += " [" + describe_update(wire.updates[i]) + ": " + std::string(to_string(status)) + "]";
  }
  record(std::move(line));
  controller_.observe_write(wire, reply);
}

void Runtime::apply(const std::vector<ControlAction>& actions) {
  for (const auto& action : actions) {
    if (const auto* w = std::get_if<WriteAction>(&action)) {
      if (w->delay_us == 0) {
        send_write(w->request);
      } else {
        delayed_.push(DelayedWrite{now() + w->delay_us, next_write_seq_++, w->request});
      }
    } else if (const auto* po = std::get_if<PacketOut>(&action)) {
      const PacketOut wire = through_channel(*po);
      ++counters_.packet_outs;
      record("t=" + std::to_string(now()) + " packet_out switch=" + std::to_string(wire.switch_id) +
             " port=" + std::to_string(wire.egress_port) + " len=" + std::to_string(wire.frame.size()));
      network_.packet_out(wire.switch_id, wire.egress_port, wire.frame);
    } else {
      const auto& msg = std::get<LogAction>(action).message;
      log::info(msg);
      trace_.push_back("t=" + std::to_string(now()) + " log " + msg);
    }
  }
}

void Runtime::handle_events(const std::vector<ObservableEvent>& events) {
  for (const auto& ev : events) {
    record(format_event(ev));
    switch (ev.kind) {
      case ObservableEvent::Kind::Delivery:
        ++counters_.deliveries;
        deliveries_.push_back(Delivery{ev.time, ev.host_id, ev.frame});
        break;
      case ObservableEvent::Kind::Drop:
        ++counters_.drops;
        break;
      case ObservableEvent::Kind::PacketIn: {
        ++counters_.packet_ins;
        if (ev.reason == static_cast<std::uint8_t>(CpuReason::IntReport)) ++counters_.int_reports;
        const PacketIn pi = through_channel(packet_in_from_cpu(ev.switch_id, ev.frame));
        apply(controller_.handle_packet_in(pi, now()));
        break;
      }
    }
  }
}

bool Runtime::step_once(std::uint64_t limit, bool inclusive) {
  const auto event_time = network_.next_event_time();
  const bool write_first = !delayed_.empty() && (!event_time || delayed_.top().due < *event_time);
  std::uint64_t due = 0;
  if (write_first) {
    due = delayed_.top().due;
  } else if (event_time) {
    due = *event_time;
  } else {
    return false;
  }
  if (inclusive ? due > limit : due >= limit) return false;

  if (write_first) {
    const DelayedWrite w = delayed_.top();
    delayed_.pop();
    if (w.due > now()) network_.run_before(w.due);
    send_write(w.request);
  } else {
    handle_events(network_.step());
  }
  if (hook_) hook_(*this);
  return true;
}

void Runtime::run_before(std::uint64_t t) {
  while (step_once(t, false)) {
  }
  if (t > now()) network_.run_before(t);
}

void Runtime::run_until(std::uint64_t t) {
  while (step_once(t, true)) {
  }
  if (t > now()) network_.run_until(t);
}

bool Runtime::run_to_idle(std::uint64_t max_steps) {
  for (std::uint64_t i = 0; i < max_steps; ++i) {
    if (!step_once(UINT64_MAX, true)) return true;
  }
  return idle();
}

}  // namespace swarmkdn
