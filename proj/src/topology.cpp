#include "swarmkdn/topology.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace swarmkdn {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

bool valid_host_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

template <typename T>
T get_uint(const json& obj, const char* key, std::uint64_t max, std::optional<T> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    bad(std::string("missing field '") + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad(std::string("field '") + key + "' must be a non-negative integer");
  }
  auto n = v.get<std::uint64_t>();
  if (n > max) bad(std::string("field '") + key + "' out of range");
  return static_cast<T>(n);
}

std::int16_t get_i16(const json& obj, const char* key) {
  if (!obj.contains(key)) return 0;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  auto n = v.get<std::int64_t>();
  if (n < -32768 || n > 32767) bad(std::string("field '") + key + "' out of range");
  return static_cast<std::int16_t>(n);
}

std::string get_string(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    bad(std::string("missing string field '") + key + "'");
  }
  return obj.at(key).get<std::string>();
}

}  // namespace

std::string Endpoint::token() const {
  if (kind == Kind::Host) return host_id;
  return "s" + std::to_string(switch_id) + "." + std::to_string(port);
}

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  auto colon = text.find(':');
  if (text.size() > 1 && text[0] == 's' && colon != std::string_view::npos) {
    std::uint32_t id = 0;
    std::uint16_t port = 0;
    auto r1 = std::from_chars(text.data() + 1, text.data() + colon, id);
    auto r2 = std::from_chars(text.data() + colon + 1, text.data() + text.size(), port);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + colon || r2.ec != std::errc{} ||
        r2.ptr != text.data() + text.size()) {
      bad("bad switch endpoint '" + std::string(text) + "'");
    }
    ep.kind = Endpoint::Kind::Switch;
    ep.switch_id = id;
    ep.port = port;
    return ep;
  }
  if (!valid_host_id(text)) bad("bad endpoint '" + std::string(text) + "'");
  ep.kind = Endpoint::Kind::Host;
  ep.host_id = std::string(text);
  return ep;
}

const SwitchSpec* Topology::find_switch(std::uint32_t id) const {
  for (const auto& s : switches) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const HostSpec* Topology::find_host(std::string_view id) const {
  for (const auto& h : hosts) {
    if (h.id == id) return &h;
  }
  return nullptr;
}

const HostSpec* Topology::find_host_by_ip(Ipv4Address ip) const {
  for (const auto& h : hosts) {
    if (h.ip == ip) return &h;
  }
  return nullptr;
}

std::vector<std::uint16_t> Topology::switch_ports(std::uint32_t id) const {
  std::set<std::uint16_t> ports;
  for (const auto& l : links) {
    for (const auto* ep : {&l.a, &l.b}) {
      if (ep->is_switch() && ep->switch_id == id) ports.insert(ep->port);
    }
  }
  return {ports.begin(), ports.end()};
}

std::optional<std::size_t> Topology::find_switch_link(std::uint32_t a, std::uint32_t b) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (!l.a.is_switch() || !l.b.is_switch()) continue;
    if ((l.a.switch_id == a && l.b.switch_id == b) || (l.a.switch_id == b && l.b.switch_id == a)) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> Topology::find_host_link(std::string_view host_id) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if ((!l.a.is_switch() && l.a.host_id == host_id) || (!l.b.is_switch() && l.b.host_id == host_id)) {
      return i;
    }
  }
  return std::nullopt;
}

void Topology::validate() const {
  std::set<std::uint32_t> switch_ids;
  for (const auto& s : switches) {
    if (!switch_ids.insert(s.id).second) bad("duplicate switch id " + std::to_string(s.id));
    if (s.proc_latency_us == 0) bad("switch " + std::to_string(s.id) + " needs proc_latency_us > 0");
  }
  std::set<std::string> host_ids;
  std::set<Ipv4Address> ips;
  std::set<MacAddress> macs;
  for (const auto& h : hosts) {
    if (!valid_host_id(h.id)) bad("bad host id '" + h.id + "'");
    if (!host_ids.insert(h.id).second) bad("duplicate host id '" + h.id + "'");
    if (!ips.insert(h.ip).second) bad("duplicate host ip " + format_ipv4(h.ip));
    if (!macs.insert(h.mac).second) bad("duplicate host mac " + format_mac(h.mac));
    if (!switch_ids.contains(h.switch_id)) bad("host '" + h.id + "' attached to unknown switch");
    if (h.swarm_id.empty() || !valid_host_id(h.swarm_id)) bad("host '" + h.id + "' has a bad swarm_id");
    if (h.cpu_load_pct > 100) bad("host '" + h.id + "' cpu_load_pct above 100");
  }

  std::set<std::pair<std::uint32_t, std::uint16_t>> used_ports;
  std::set<std::string> attached_hosts;
  std::set<std::pair<std::uint32_t, std::uint32_t>> switch_pairs;
  for (const auto& l : links) {
    if (!l.a.is_switch() && !l.b.is_switch()) bad("host-to-host links are not supported");
    for (const auto* ep : {&l.a, &l.b}) {
      if (ep->is_switch()) {
        if (!switch_ids.contains(ep->switch_id)) bad("link references unknown switch " + ep->token());
        if (ep->port == kCpuOutAllPorts || ep->port == kCpuOutPipeline) bad("ports 0 and 65535 are reserved");
        if (!used_ports.insert({ep->switch_id, ep->port}).second) {
          bad("port " + ep->token() + " used by more than one link");
        }
      } else {
        if (!host_ids.contains(ep->host_id)) bad("link references unknown host '" + ep->host_id + "'");
        if (!attached_hosts.insert(ep->host_id).second) bad("host '" + ep->host_id + "' has two links");
      }
    }
    if (l.a.is_switch() && l.b.is_switch()) {
      if (l.a.switch_id == l.b.switch_id) bad("self-loop on switch " + std::to_string(l.a.switch_id));
      auto key = std::minmax(l.a.switch_id, l.b.switch_id);
      if (!switch_pairs.insert({key.first, key.second}).second) {
        bad("parallel links between switches " + std::to_string(key.first) + " and " +
            std::to_string(key.second));
      }
    } else {
      const auto& host_ep = l.a.is_switch() ? l.b : l.a;
      const auto& sw_ep = l.a.is_switch() ? l.a : l.b;
      const auto* h = find_host(host_ep.host_id);
      if (h->switch_id != sw_ep.switch_id || h->port != sw_ep.port) {
        bad("host '" + h->id + "' link does not match its switch/port fields");
      }
    }
  }
  for (const auto& h : hosts) {
    if (!attached_hosts.contains(h.id)) bad("host '" + h.id + "' has no link");
  }
}

Topology parse_topology_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("topology is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("topology must be a JSON object");

  Topology topo;
  for (const auto& s : doc.value("switches", json::array())) {
    SwitchSpec spec;
    spec.id = get_uint<std::uint32_t>(s, "id", 0xFFFFFFFFu);
    spec.proc_latency_us = get_uint<std::uint32_t>(s, "proc_latency_us", 0xFFFFFFFFu);
    spec.int_role = parse_int_role(s.value("int_role", std::string("none")));
    topo.switches.push_back(spec);
  }
  std::uint32_t next_node_id = 1;
  for (const auto& h : doc.value("hosts", json::array())) {
    HostSpec spec;
    spec.id = get_string(h, "id");
    spec.mac = parse_mac(get_string(h, "mac"));
    spec.ip = parse_ipv4(get_string(h, "ip"));
    spec.switch_id = get_uint<std::uint32_t>(h, "switch", 0xFFFFFFFFu);
    spec.port = get_uint<std::uint16_t>(h, "port", 0xFFFF);
    spec.swarm_id = get_string(h, "swarm_id");
    spec.capabilities = get_uint<std::uint16_t>(h, "capabilities", 0xFFFF, std::uint16_t{0});
    spec.cpu_load_pct = get_uint<std::uint8_t>(h, "cpu_load_pct", 100, std::uint8_t{0});
    spec.loc_x = get_i16(h, "loc_x");
    spec.loc_y = get_i16(h, "loc_y");
    spec.node_id = get_uint<std::uint32_t>(h, "node_id", 0xFFFFFFFFu, next_node_id);
    next_node_id = spec.node_id + 1;
    topo.hosts.push_back(std::move(spec));
  }
  for (const auto& l : doc.value("links", json::array())) {
    LinkSpec spec;
    spec.a = parse_endpoint(get_string(l, "a"));
    spec.b = parse_endpoint(get_string(l, "b"));
    spec.latency_us = get_uint<std::uint32_t>(l, "latency_us", 0xFFFFFFFFu);
    topo.links.push_back(std::move(spec));
  }
  topo.validate();
  return topo;
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open topology file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_topology_json(buf.str());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) {
      throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    throw;
  }
}

}  // namespace swarmkdn
