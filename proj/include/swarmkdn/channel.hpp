#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "swarmkdn/network.hpp"
#include "swarmkdn/switch.hpp"

namespace swarmkdn {

inline constexpr std::uint16_t kChannelMagic = 0x4B44;  // "KD"
inline constexpr std::uint8_t kChannelVersion = 0x01;
inline constexpr std::size_t kChannelHeaderBytes = 8;
/// Largest frame carried in PacketIn/PacketOut: an Ethernet header plus a
/// maximal IPv4 datagram.
inline constexpr std::size_t kMaxFrameBytes = kEthernetBytes + 0xFFFF;

enum class MessageType : std::uint8_t {
  WriteRequest = 0x01,
  WriteReply = 0x02,
  ReadRequest = 0x03,
  ReadReply = 0x04,
  PacketIn = 0x05,
  PacketOut = 0x06,
};

using Entity = std::variant<TableEntry, MulticastGroup>;

struct Update {
  WriteOp op = WriteOp::Insert;
  Entity entity;
  bool operator==(const Update&) const = default;
};

enum class WriteStatus : std::uint8_t {
  Ok = 0,
  AlreadyExists = 1,
  NotFound = 2,
  UnknownGroup = 3,
  InvalidEntry = 4,
};

std::string_view to_string(WriteStatus s);

struct WriteRequest {
  std::uint32_t switch_id = 0;
  std::vector<Update> updates;
  bool operator==(const WriteRequest&) const = default;
};

struct WriteReply {
  std::uint32_t switch_id = 0;
  std::vector<WriteStatus> statuses;
  bool operator==(const WriteReply&) const = default;
};

/// Read target: one of the tables, or the replication groups.
enum class ReadTarget : std::uint8_t { Acl = 1, L2 = 2, Groups = 0xFF };

struct ReadRequest {
  std::uint32_t switch_id = 0;
  ReadTarget target = ReadTarget::Acl;
  bool operator==(const ReadRequest&) const = default;
};

struct ReadReply {
  std::uint32_t switch_id = 0;
  std::vector<Entity> entities;
  bool operator==(const ReadReply&) const = default;
};

struct PacketIn {
  std::uint32_t switch_id = 0;
  std::uint16_t ingress_port = 0;
  std::uint8_t reason = 0;
  Bytes frame;
  bool operator==(const PacketIn&) const = default;
};

struct PacketOut {
  std::uint32_t switch_id = 0;
  std::uint16_t egress_port = 0;
  Bytes frame;
  bool operator==(const PacketOut&) const = default;
};

using Message = std::variant<WriteRequest, WriteReply, ReadRequest, ReadReply, PacketIn, PacketOut>;

MessageType message_type(const Message& m);

/// Framing: magic(2) version(1) type(1) body_length(4) body.
Bytes encode_message(const Message& m);

/// Throws DecodeError with BadMagic, BadLength, UnknownType or MalformedBody
/// and the offending offset.
Message decode_message(ByteView bytes);

/// Applies updates in order with continue-on-error semantics; one status per
/// update. Throws UnknownSwitch when the target switch does not exist.
WriteReply dispatch_write(Network& net, const WriteRequest& req);

ReadReply dispatch_read(const Network& net, const ReadRequest& req);

/// Packet-in as carried over the channel, from the switch's CPU-port bytes.
PacketIn packet_in_from_cpu(std::uint32_t switch_id, ByteView cpu_in_bytes);

}  // namespace swarmkdn
