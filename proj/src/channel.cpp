#include "swarmkdn/channel.hpp"

namespace swarmkdn {
namespace {

enum class EntityKind : std::uint8_t { TableEntry = 1, Group = 2 };
enum class ActionKind : std::uint8_t { Forward = 1, Drop = 2, SendToCpu = 3, Multicast = 4 };

[[noreturn]] void malformed(std::size_t offset, const std::string& what) {
  throw DecodeError(ErrorCode::MalformedBody, offset, what);
}

void put_entity(ByteWriter& out, const Entity& e) {
  if (const auto* entry = std::get_if<TableEntry>(&e)) {
    out.u8(static_cast<std::uint8_t>(EntityKind::TableEntry));
    out.u8(static_cast<std::uint8_t>(entry->table()));
    const Bytes key = key_bytes(entry->key);
    out.u16(static_cast<std::uint16_t>(key.size()));
    out.raw(key);
    out.u32(entry->priority);
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, ForwardAction>) {
            out.u8(static_cast<std::uint8_t>(ActionKind::Forward));
            out.u16(a.port);
          } else if constexpr (std::is_same_v<A, DropAction>) {
            out.u8(static_cast<std::uint8_t>(ActionKind::Drop));
          } else if constexpr (std::is_same_v<A, SendToCpuAction>) {
            out.u8(static_cast<std::uint8_t>(ActionKind::SendToCpu));
            out.u8(a.reason);
          } else {
            out.u8(static_cast<std::uint8_t>(ActionKind::Multicast));
            out.u16(a.group_id);
          }
        },
        entry->action);
  } else {
    const auto& g = std::get<MulticastGroup>(e);
    out.u8(static_cast<std::uint8_t>(EntityKind::Group));
    out.u16(g.group_id);
    out.u16(static_cast<std::uint16_t>(g.egress_ports.size()));
    for (auto p : g.egress_ports) out.u16(p);
  }
}

Entity get_entity(ByteReader& in) {
  const std::size_t at = in.offset();
  const auto kind = in.u8();
  if (kind == static_cast<std::uint8_t>(EntityKind::TableEntry)) {
    TableEntry e;
    const std::size_t table_at = in.offset();
    const auto table = in.u8();
    const std::size_t key_len_at = in.offset();
    const std::size_t key_len = in.u16();
    ByteReader key(in.take(key_len), ErrorCode::MalformedBody, key_len_at + 2);
    if (table == static_cast<std::uint8_t>(TableId::Acl)) {
      if (key_len != 20) malformed(key_len_at, "ACL key must be 20 bytes");
      AclMatch m;
      m.src_ip = key.u32();
      m.src_mask = key.u32();
      m.dst_ip = key.u32();
      m.dst_mask = key.u32();
      m.udp_dst_port = key.u16();
      m.udp_dst_port_mask = key.u16();
      e.key = m;
    } else if (table == static_cast<std::uint8_t>(TableId::L2)) {
      if (key_len != 6) malformed(key_len_at, "L2 key must be 6 bytes");
      e.key = L2Match{key.array<6>()};
    } else {
      malformed(table_at, "unknown table id " + std::to_string(table));
    }
    e.priority = in.u32();
    const std::size_t action_at = in.offset();
    switch (static_cast<ActionKind>(in.u8())) {
      case ActionKind::Forward: e.action = ForwardAction{in.u16()}; break;
      case ActionKind::Drop: e.action = DropAction{}; break;
      case ActionKind::SendToCpu: e.action = SendToCpuAction{in.u8()}; break;
      case ActionKind::Multicast: e.action = MulticastAction{in.u16()}; break;
      default: malformed(action_at, "unknown action kind");
    }
    return e;
  }
  if (kind == static_cast<std::uint8_t>(EntityKind::Group)) {
    MulticastGroup g;
    g.group_id = in.u16();
    const std::size_t count = in.u16();
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t port_at = in.offset();
      if (!g.egress_ports.insert(in.u16()).second) malformed(port_at, "duplicate group port");
    }
    return g;
  }
  malformed(at, "unknown entity kind " + std::to_string(kind));
}

void put_body(ByteWriter& out, const Message& m) {
  std::visit(
      [&](const auto& msg) {
        using M = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<M, WriteRequest>) {
          out.u32(msg.switch_id);
          out.u32(static_cast<std::uint32_t>(msg.updates.size()));
          for (const auto& u : msg.updates) {
            out.u8(static_cast<std::uint8_t>(u.op));
            put_entity(out, u.entity);
          }
        } else if constexpr (std::is_same_v<M, WriteReply>) {
          out.u32(msg.switch_id);
          out.u32(static_cast<std::uint32_t>(msg.statuses.size()));
          for (auto s : msg.statuses) out.u8(static_cast<std::uint8_t>(s));
        } else if constexpr (std::is_same_v<M, ReadRequest>) {
          out.u32(msg.switch_id);
          out.u8(static_cast<std::uint8_t>(msg.target));
        } else if constexpr (std::is_same_v<M, ReadReply>) {
          out.u32(msg.switch_id);
          out.u32(static_cast<std::uint32_t>(msg.entities.size()));
          for (const auto& e : msg.entities) put_entity(out, e);
        } else if constexpr (std::is_same_v<M, PacketIn>) {
          out.u32(msg.switch_id);
          out.raw(encode_cpu_in(CpuIn{msg.ingress_port, msg.reason, msg.frame}));
        } else {
          out.u32(msg.switch_id);
          out.raw(encode_cpu_out(CpuOut{msg.egress_port, msg.frame}));
        }
      },
      m);
}

Bytes frame_bytes(ByteReader& in) {
  auto rest = in.rest();
  if (rest.size() > kMaxFrameBytes) malformed(in.offset() - rest.size(), "frame exceeds maximum length");
  return {rest.begin(), rest.end()};
}

Message get_body(MessageType type, ByteReader& in) {
  switch (type) {
    case MessageType::WriteRequest: {
      WriteRequest req;
      req.switch_id = in.u32();
      const std::size_t count = in.u32();
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t op_at = in.offset();
        const auto op = in.u8();
        if (op < 1 || op > 3) malformed(op_at, "unknown update op");
        req.updates.push_back(Update{static_cast<WriteOp>(op), get_entity(in)});
      }
      return req;
    }
    case MessageType::WriteReply: {
      WriteReply rep;
      rep.switch_id = in.u32();
      const std::size_t count = in.u32();
      if (count > in.remaining()) malformed(in.offset() - 4, "status count exceeds body");
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t at = in.offset();
        const auto s = in.u8();
        if (s > static_cast<std::uint8_t>(WriteStatus::InvalidEntry)) malformed(at, "unknown status");
        rep.statuses.push_back(static_cast<WriteStatus>(s));
      }
      return rep;
    }
    case MessageType::ReadRequest: {
      ReadRequest req;
      req.switch_id = in.u32();
      const std::size_t at = in.offset();
      const auto t = in.u8();
      if (t != 1 && t != 2 && t != 0xFF) malformed(at, "unknown read target");
      req.target = static_cast<ReadTarget>(t);
      return req;
    }
    case MessageType::ReadReply: {
      ReadReply rep;
      rep.switch_id = in.u32();
      const std::size_t count = in.u32();
      for (std::size_t i = 0; i < count; ++i) rep.entities.push_back(get_entity(in));
      return rep;
    }
    case MessageType::PacketIn: {
      PacketIn pi;
      pi.switch_id = in.u32();
      pi.ingress_port = in.u16();
      const std::size_t reason_at = in.offset();
      pi.reason = in.u8();
      if (!is_valid_cpu_reason(pi.reason)) malformed(reason_at, "packet-in reason must be 0x01..0x03");
      if (in.u8() != 0) malformed(reason_at + 1, "pad byte not zero");
      pi.frame = frame_bytes(in);
      return pi;
    }
    case MessageType::PacketOut: {
      PacketOut po;
      po.switch_id = in.u32();
      po.egress_port = in.u16();
      if (in.u16() != 0) malformed(in.offset() - 2, "pad bytes not zero");
      po.frame = frame_bytes(in);
      return po;
    }
  }
  malformed(in.offset(), "unreachable");
}

}  // namespace

std::string_view to_string(WriteStatus s) {
  switch (s) {
    case WriteStatus::Ok: return "ok";
    case WriteStatus::AlreadyExists: return "already-exists";
    case WriteStatus::NotFound: return "not-found";
    case WriteStatus::UnknownGroup: return "unknown-group";
    case WriteStatus::InvalidEntry: return "invalid-entry";
  }
  return "?";
}

MessageType message_type(const Message& m) {
  return static_cast<MessageType>(m.index() + 1);
}

Bytes encode_message(const Message& m) {
  ByteWriter body;
  put_body(body, m);
  Bytes b = body.take();
  ByteWriter out;
  out.u16(kChannelMagic);
  out.u8(kChannelVersion);
  out.u8(static_cast<std::uint8_t>(message_type(m)));
  out.u32(static_cast<std::uint32_t>(b.size()));
  out.raw(b);
  return out.take();
}

Message decode_message(ByteView bytes) {
  if (bytes.size() < kChannelHeaderBytes) {
    throw DecodeError(ErrorCode::BadLength, bytes.size(), "message shorter than its 8-byte header");
  }
  ByteReader head(bytes.first(kChannelHeaderBytes), ErrorCode::BadLength);
  if (head.u16() != kChannelMagic) throw DecodeError(ErrorCode::BadMagic, 0, "expected magic 0x4B44");
  if (head.u8() != kChannelVersion) throw DecodeError(ErrorCode::BadMagic, 2, "unsupported version");
  const auto type = head.u8();
  const std::size_t body_len = head.u32();
  if (type < 0x01 || type > 0x06) {
    throw DecodeError(ErrorCode::UnknownType, 3, "message type " + std::to_string(type));
  }
  const std::size_t available = bytes.size() - kChannelHeaderBytes;
  if (body_len != available) {
    throw DecodeError(ErrorCode::BadLength, 4,
                      "body length " + std::to_string(body_len) + " but " + std::to_string(available) +
                          " bytes follow the header");
  }
  ByteReader in(bytes.subspan(kChannelHeaderBytes), ErrorCode::MalformedBody, kChannelHeaderBytes);
  Message m = get_body(static_cast<MessageType>(type), in);
  if (!in.done()) malformed(in.offset(), "trailing bytes after body");
  return m;
}

WriteReply dispatch_write(Network& net, const WriteRequest& req) {
  auto& sw = net.switch_state(req.switch_id);
  WriteReply reply;
  reply.switch_id = req.switch_id;
  reply.statuses.reserve(req.updates.size());
  for (const auto& u : req.updates) {
    WriteStatus status = WriteStatus::Ok;
    try {
      if (const auto* e = std::get_if<TableEntry>(&u.entity)) {
        table_write(sw, u.op, *e);
      } else {
        group_write(sw, u.op, std::get<MulticastGroup>(u.entity));
      }
    } catch (const Error& err) {
      switch (err.code()) {
        case ErrorCode::AlreadyExists: status = WriteStatus::AlreadyExists; break;
        case ErrorCode::NotFound: status = WriteStatus::NotFound; break;
        case ErrorCode::UnknownGroup: status = WriteStatus::UnknownGroup; break;
        default: status = WriteStatus::InvalidEntry; break;
      }
    }
    reply.statuses.push_back(status);
  }
  return reply;
}

ReadReply dispatch_read(const Network& net, const ReadRequest& req) {
  const auto& sw = net.switch_state(req.switch_id);
  ReadReply reply;
  reply.switch_id = req.switch_id;
  if (req.target == ReadTarget::Groups) {
    for (auto& g : sw.groups()) reply.entities.emplace_back(std::move(g));
  } else {
    const auto table = req.target == ReadTarget::Acl ? TableId::Acl : TableId::L2;
    for (auto& e : table_read(sw, table)) reply.entities.emplace_back(std::move(e));
  }
  return reply;
}

PacketIn packet_in_from_cpu(std::uint32_t switch_id, ByteView cpu_in_bytes) {
  CpuIn cpu = decode_cpu_in(cpu_in_bytes);
  return PacketIn{switch_id, cpu.ingress_port, cpu.reason, std::move(cpu.frame)};
}

}  // namespace swarmkdn
