// Shared generators and brute-force oracles for the unit and acceptance
// tests. Oracles deliberately avoid the library's own indexes and joins.
#pragma once

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "swarmkdn/channel.hpp"
#include "swarmkdn/controller.hpp"
#include "swarmkdn/packet.hpp"
#include "swarmkdn/sparql.hpp"
#include "swarmkdn/store.hpp"
#include "swarmkdn/topology.hpp"

#ifndef SWARMKDN_TEST_DATA
#define SWARMKDN_TEST_DATA "tests/data"
#endif

namespace testsupport {

using namespace swarmkdn;
using Rng = std::mt19937_64;

inline std::string data_path(const std::string& name) { return std::string(SWARMKDN_TEST_DATA) + "/" + name; }

// Code of the Error thrown by f, or nullopt if f returned normally.
template <typename F>
std::optional<ErrorCode> thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

inline Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(uniform(rng, 0, 255));
  return b;
}

template <std::size_t N>
std::array<std::uint8_t, N> random_array(Rng& rng) {
  std::array<std::uint8_t, N> a{};
  for (auto& x : a) x = static_cast<std::uint8_t>(uniform(rng, 0, 255));
  return a;
}

inline IntStack random_int_stack(Rng& rng, std::size_t max_hops = kIntHopCap) {
  IntStack s;
  if (coin(rng)) {
    NodeMetadata m;
    m.node_id = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
    m.cpu_load_pct = static_cast<std::uint8_t>(uniform(rng, 0, 100));
    m.loc_x = static_cast<std::int16_t>(uniform(rng, 0, 0xFFFF));
    m.loc_y = static_cast<std::int16_t>(uniform(rng, 0, 0xFFFF));
    m.capabilities = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    s.node_meta = m;
  }
  const auto hops = uniform(rng, 0, max_hops);
  for (std::uint64_t i = 0; i < hops; ++i) {
    s.hops.push_back({static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX)),
                      static_cast<std::uint32_t>(uniform(rng, 1, UINT32_MAX))});
  }
  return s;
}

/// Any well-formed header stack, lengths already consistent.
inline HeaderStack random_header_stack(Rng& rng) {
  HeaderStack h;
  h.eth.dst_mac = random_array<6>(rng);
  h.eth.src_mac = random_array<6>(rng);
  if (!coin(rng, 0.85)) {
    do {
      h.eth.ethertype = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    } while (h.eth.ethertype == kEthertypeIpv4);
    h.payload = random_bytes(rng, uniform(rng, 0, 64));
    return h;
  }
  h.eth.ethertype = kEthertypeIpv4;
  Ipv4Header ip;
  ip.ttl = static_cast<std::uint8_t>(uniform(rng, 0, 255));
  ip.src_ip = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
  ip.dst_ip = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
  const bool udp = coin(rng, 0.85);
  if (udp) {
    ip.protocol = kIpProtoUdp;
    UdpHeader u;
    u.src_port = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    u.dst_port = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    h.udp = u;
    if (coin(rng)) {
      ip.dscp = kIntDscp;
      h.int_stack = random_int_stack(rng);
    }
    if (coin(rng)) {
      RtpsHeader r;
      r.protocol_version = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
      r.vendor_id = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
      r.guid_prefix = random_array<12>(rng);
      h.rtps = r;
    }
  } else {
    do {
      ip.protocol = static_cast<std::uint8_t>(uniform(rng, 0, 255));
    } while (ip.protocol == kIpProtoUdp);
  }
  if (!h.int_stack) {
    do {
      ip.dscp = static_cast<std::uint8_t>(uniform(rng, 0, 255));
    } while (ip.dscp == kIntDscp);
  }
  h.ipv4 = ip;
  h.payload = random_bytes(rng, uniform(rng, 0, 64));
  if (h.udp && !h.rtps && h.payload.size() >= 4) h.payload[0] = 'x';  // keep opaque payloads opaque
  fix_lengths(h);
  return h;
}

inline AclMatch random_acl_match(Rng& rng, std::uint32_t value_space = 4) {
  // Small value spaces make overlapping matches likely.
  AclMatch m;
  auto mask32 = [&]() -> std::uint32_t {
    switch (uniform(rng, 0, 2)) {
      case 0: return 0;
      case 1: return 0xFFFFFFFFu;
      default: return 0xFFFFFF00u;
    }
  };
  m.src_mask = mask32();
  m.dst_mask = mask32();
  m.udp_dst_port_mask = coin(rng) ? 0xFFFF : 0;
  m.src_ip = (0x0A000000u + static_cast<std::uint32_t>(uniform(rng, 0, value_space))) & m.src_mask;
  m.dst_ip = (0x0A000000u + static_cast<std::uint32_t>(uniform(rng, 0, value_space))) & m.dst_mask;
  m.udp_dst_port = static_cast<std::uint16_t>(7400 + uniform(rng, 0, 2)) & m.udp_dst_port_mask;
  return m;
}

inline Action random_action(Rng& rng, const std::vector<std::uint16_t>& ports,
                            const std::vector<std::uint16_t>& groups) {
  switch (uniform(rng, 0, 3)) {
    case 0:
      if (!ports.empty()) return ForwardAction{ports[uniform(rng, 0, ports.size() - 1)]};
      return DropAction{};
    case 1: return DropAction{};
    case 2: return SendToCpuAction{static_cast<std::uint8_t>(uniform(rng, 1, 3))};
    default:
      if (!groups.empty()) return MulticastAction{groups[uniform(rng, 0, groups.size() - 1)]};
      return DropAction{};
  }
}

inline TableEntry random_entry(Rng& rng, const std::vector<std::uint16_t>& ports,
                               const std::vector<std::uint16_t>& groups, bool acl) {
  TableEntry e;
  if (acl) {
    e.key = random_acl_match(rng);
    e.priority = static_cast<std::uint32_t>(uniform(rng, 0, 5));
  } else {
    MacAddress mac{0x02, 0, 0, 0, 0, static_cast<std::uint8_t>(uniform(rng, 0, 7))};
    e.key = L2Match{mac};
  }
  e.action = random_action(rng, ports, groups);
  return e;
}

/// Unconstrained entity for codec tests.
inline Entity random_entity(Rng& rng) {
  if (coin(rng, 0.3)) {
    MulticastGroup g;
    g.group_id = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    const auto n = uniform(rng, 0, 6);
    for (std::uint64_t i = 0; i < n; ++i) g.egress_ports.insert(static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF)));
    return g;
  }
  TableEntry e;
  if (coin(rng)) {
    AclMatch m;
    m.src_ip = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
    m.src_mask = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
    m.dst_ip = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
    m.dst_mask = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
    m.udp_dst_port = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    m.udp_dst_port_mask = static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF));
    e.key = m;
    e.priority = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
  } else {
    e.key = L2Match{random_array<6>(rng)};
  }
  switch (uniform(rng, 0, 3)) {
    case 0: e.action = ForwardAction{static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF))}; break;
    case 1: e.action = DropAction{}; break;
    case 2: e.action = SendToCpuAction{static_cast<std::uint8_t>(uniform(rng, 0, 255))}; break;
    default: e.action = MulticastAction{static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF))}; break;
  }
  return e;
}

inline Bytes random_frame(Rng& rng) {
  const auto pick = uniform(rng, 0, 99);
  if (pick == 0) return {};
  if (pick == 1) return random_bytes(rng, kMaxFrameBytes);
  return random_bytes(rng, uniform(rng, 1, 300));
}

inline Message random_message(Rng& rng) {
  const auto sw = static_cast<std::uint32_t>(uniform(rng, 0, UINT32_MAX));
  switch (uniform(rng, 0, 5)) {
    case 0: {
      WriteRequest r{sw, {}};
      const auto n = uniform(rng, 0, 5);
      for (std::uint64_t i = 0; i < n; ++i) {
        r.updates.push_back({static_cast<WriteOp>(uniform(rng, 1, 3)), random_entity(rng)});
      }
      return r;
    }
    case 1: {
      WriteReply r{sw, {}};
      const auto n = uniform(rng, 0, 8);
      for (std::uint64_t i = 0; i < n; ++i) r.statuses.push_back(static_cast<WriteStatus>(uniform(rng, 0, 4)));
      return r;
    }
    case 2: {
      static constexpr ReadTarget targets[] = {ReadTarget::Acl, ReadTarget::L2, ReadTarget::Groups};
      return ReadRequest{sw, targets[uniform(rng, 0, 2)]};
    }
    case 3: {
      ReadReply r{sw, {}};
      const auto n = uniform(rng, 0, 5);
      for (std::uint64_t i = 0; i < n; ++i) r.entities.push_back(random_entity(rng));
      return r;
    }
    case 4:
      return PacketIn{sw, static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF)),
                      static_cast<std::uint8_t>(uniform(rng, 1, 3)), random_frame(rng)};
    default:
      return PacketOut{sw, static_cast<std::uint16_t>(uniform(rng, 0, 0xFFFF)), random_frame(rng)};
  }
}

// ---- brute-force SPARQL evaluation ----

inline bool oracle_compare(const Term& a, sparql::CompareOp op, const Term& b) {
  int cmp = 0;
  if (a.kind == Term::Kind::Integer && b.kind == Term::Kind::Integer) {
    long long x = 0;
    long long y = 0;
    std::from_chars(a.value.data(), a.value.data() + a.value.size(), x);
    std::from_chars(b.value.data(), b.value.data() + b.value.size(), y);
    cmp = x < y ? -1 : (x > y ? 1 : 0);
  } else if (a.kind == b.kind) {
    const auto sa = rdf::serialize(a);
    const auto sb = rdf::serialize(b);
    cmp = sa < sb ? -1 : (sa > sb ? 1 : 0);
  } else {
    return false;
  }
  switch (op) {
    case sparql::CompareOp::Eq: return cmp == 0;
    case sparql::CompareOp::Ne: return cmp != 0;
    case sparql::CompareOp::Lt: return cmp < 0;
    case sparql::CompareOp::Le: return cmp <= 0;
    case sparql::CompareOp::Gt: return cmp > 0;
    case sparql::CompareOp::Ge: return cmp >= 0;
  }
  return false;
}

/// Nested loops, one level per pattern in query order. Each level scans the
/// triples that agree with that pattern's constants (found by a linear pass).
inline sparql::ResultTable brute_force_select(const sparql::SelectQuery& q, const std::vector<Triple>& triples) {
  using Binding = std::map<std::string, Term>;
  std::vector<Binding> solutions;
  Binding current;

  auto fits = [](const PatternTerm& pt, const Term& value) {
    const auto* t = std::get_if<Term>(&pt);
    return t == nullptr || *t == value;
  };
  std::vector<std::vector<const Triple*>> level(q.patterns.size());
  for (std::size_t d = 0; d < q.patterns.size(); ++d) {
    const auto& p = q.patterns[d];
    for (const auto& t : triples) {
      if (fits(p.subject, t.subject) && fits(p.predicate, t.predicate) && fits(p.object, t.object)) {
        level[d].push_back(&t);
      }
    }
  }

  auto unify = [](const PatternTerm& pt, const Term& value, Binding& b, std::vector<std::string>& added) {
    if (const auto* t = std::get_if<Term>(&pt)) return *t == value;
    const auto& name = std::get<Variable>(pt).name;
    auto it = b.find(name);
    if (it != b.end()) return it->second == value;
    b.emplace(name, value);
    added.push_back(name);
    return true;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == q.patterns.size()) {
      solutions.push_back(current);
      return;
    }
    const auto& p = q.patterns[depth];
    for (const Triple* tp : level[depth]) {
      const Triple& t = *tp;
      std::vector<std::string> added;
      if (unify(p.subject, t.subject, current, added) && unify(p.predicate, t.predicate, current, added) &&
          unify(p.object, t.object, current, added)) {
        rec(depth + 1);
      }
      for (const auto& n : added) current.erase(n);
    }
  };
  rec(0);

  sparql::ResultTable out;
  for (const auto& v : q.variables) out.header.push_back(v.name);
  for (const auto& s : solutions) {
    bool keep = true;
    for (const auto& f : q.filters) {
      const Term& lhs = s.at(f.lhs.name);
      const Term rhs = std::holds_alternative<Term>(f.rhs) ? std::get<Term>(f.rhs)
                                                           : s.at(std::get<Variable>(f.rhs).name);
      if (!oracle_compare(lhs, f.op, rhs)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    std::vector<Term> row;
    for (const auto& v : q.variables) row.push_back(s.at(v.name));
    out.rows.push_back(std::move(row));
  }
  auto key = [](const std::vector<Term>& row) {
    std::vector<std::string> k;
    for (const auto& t : row) k.push_back(rdf::serialize(t));
    return k;
  };
  std::stable_sort(out.rows.begin(), out.rows.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  if (q.distinct) {
    out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
  }
  if (q.limit && out.rows.size() > *q.limit) out.rows.resize(*q.limit);
  return out;
}

// ---- brute-force routing ----

struct PathChoice {
  double cost = 0.0;
  std::vector<std::uint32_t> seq;
};

/// Minimum over every simple path by (cost, hop count, switch-id sequence).
inline std::optional<PathChoice> brute_force_best_path(const Topology& topo, const LinkWeightTable& w,
                                                       std::uint32_t src, std::uint32_t dst) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> adj;
  for (const auto& l : topo.links) {
    if (l.a.is_switch() && l.b.is_switch()) {
      adj[l.a.switch_id].push_back(l.b.switch_id);
      adj[l.b.switch_id].push_back(l.a.switch_id);
    }
  }
  std::optional<PathChoice> best;
  std::vector<std::uint32_t> seq{src};
  std::set<std::uint32_t> seen{src};
  std::function<void(double)> dfs = [&](double cost) {
    const auto u = seq.back();
    if (u == dst) {
      const PathChoice cand{cost, seq};
      auto better = [](const PathChoice& a, const PathChoice& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.seq.size() != b.seq.size()) return a.seq.size() < b.seq.size();
        return a.seq < b.seq;
      };
      if (!best || better(cand, *best)) best = cand;
      return;
    }
    for (auto v : adj[u]) {
      if (seen.contains(v)) continue;
      seen.insert(v);
      seq.push_back(v);
      dfs(cost + w.ewma({u, v}));
      seq.pop_back();
      seen.erase(v);
    }
  };
  dfs(0.0);
  return best;
}

/// Random connected switch fabric (spanning tree plus extra edges) with no
/// hosts, for routing property tests.
inline Topology random_fabric(Rng& rng, std::uint32_t n, double extra_edge_p) {
  Topology t;
  for (std::uint32_t i = 1; i <= n; ++i) t.switches.push_back({i, static_cast<std::uint32_t>(uniform(rng, 1, 100)), IntRole::Sink});
  std::map<std::uint32_t, std::uint16_t> next_port;
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b || edges.contains({std::min(a, b), std::max(a, b)})) return;
    edges.insert({std::min(a, b), std::max(a, b)});
    LinkSpec l;
    l.a.kind = Endpoint::Kind::Switch;
    l.a.switch_id = a;
    l.a.port = ++next_port[a];
    l.b.kind = Endpoint::Kind::Switch;
    l.b.switch_id = b;
    l.b.port = ++next_port[b];
    l.latency_us = static_cast<std::uint32_t>(uniform(rng, 1, 5) * 10);
    t.links.push_back(l);
  };
  for (std::uint32_t i = 2; i <= n; ++i) add(static_cast<std::uint32_t>(uniform(rng, 1, i - 1)), i);
  for (std::uint32_t a = 1; a <= n; ++a) {
    for (std::uint32_t b = a + 1; b <= n; ++b) {
      if (coin(rng, extra_edge_p)) add(a, b);
    }
  }
  return t;
}

// Attaches k hosts h1..hk to random switches on fresh ports, spread over
// `swarms` groups named g0, g1, ...
inline void add_random_hosts(Rng& rng, Topology& t, std::uint32_t k, std::uint32_t swarms) {
  std::map<std::uint32_t, std::uint16_t> next_port;
  for (const auto& l : t.links) {
    for (const Endpoint* e : {&l.a, &l.b}) {
      if (e->is_switch()) next_port[e->switch_id] = std::max(next_port[e->switch_id], e->port);
    }
  }
  for (std::uint32_t i = 1; i <= k; ++i) {
    const auto& sw = t.switches[uniform(rng, 0, t.switches.size() - 1)];
    HostSpec h;
    h.id = "h" + std::to_string(i);
    h.mac = {0x02, 0, 0, 0, static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i)};
    h.ip = 0x0A000000u + i;
    h.switch_id = sw.id;
    h.port = ++next_port[sw.id];
    h.swarm_id = "g" + std::to_string(uniform(rng, 0, swarms - 1));
    h.capabilities = static_cast<std::uint16_t>(uniform(rng, 0, 7));
    h.cpu_load_pct = static_cast<std::uint8_t>(uniform(rng, 0, 100));
    h.loc_x = static_cast<std::int16_t>(uniform(rng, 0, 200)) - 100;
    h.loc_y = static_cast<std::int16_t>(uniform(rng, 0, 200)) - 100;
    h.node_id = i;
    t.hosts.push_back(h);
    LinkSpec l;
    l.a.kind = Endpoint::Kind::Switch;
    l.a.switch_id = sw.id;
    l.a.port = h.port;
    l.b.kind = Endpoint::Kind::Host;
    l.b.host_id = h.id;
    l.latency_us = 10;
    t.links.push_back(l);
  }
}

// Random graph over a small vocabulary so joins and duplicate objects occur.
inline std::vector<Triple> random_store_triples(Rng& rng, std::size_t n) {
  static const std::vector<std::string> preds = {rdf::pred::memberOf, rdf::pred::hasIp,   rdf::pred::cpuLoad,
                                                 rdf::pred::connects, rdf::pred::latencyUs, rdf::pred::onSwitch,
                                                 rdf::pred::locX,     rdf::pred::capabilities};
  static const std::vector<std::string> strings = {"a", "b", "c", "10.0.0.1", "x\"y", ""};
  const std::size_t subjects = std::max<std::size_t>(4, n / 5);
  auto subject = [&] {
    const auto k = uniform(rng, 0, subjects - 1);
    return Term::iri(std::string(rdf::kNs) + (k % 2 ? "host:h" : "switch:") + std::to_string(k));
  };
  std::vector<Triple> out;
  for (std::size_t i = 0; i < n; ++i) {
    Triple t{subject(), Term::iri(preds[uniform(rng, 0, preds.size() - 1)]), {}};
    const auto r = uniform(rng, 0, 99);
    if (r < 40) t.object = subject();
    else if (r < 80) t.object = Term::integer(static_cast<std::int64_t>(uniform(rng, 0, 70)) - 20);
    else if (r < 95) t.object = Term::string(strings[uniform(rng, 0, strings.size() - 1)]);
    else t.object = Term::boolean(coin(rng));
    out.push_back(std::move(t));
  }
  return out;
}

// Query text in the supported subset. Constants are drawn from the store so
// results are rarely empty; the first pattern always has a constant and every
// later pattern shares a variable, which keeps the nested-loop oracle cheap.
inline std::string random_query_text(Rng& rng, const std::vector<Triple>& triples) {
  auto lexical = [&](const Term& t) -> std::string {
    if (t.kind == Term::Kind::Integer) return t.value;
    if (t.is_iri()) {
      const std::string ns(rdf::kNs);
      if (coin(rng, 0.3) && t.value.starts_with(ns) && t.value.find(':', ns.size()) == std::string::npos) {
        return "sn:" + t.value.substr(ns.size());
      }
      return "<" + t.value + ">";
    }
    return rdf::serialize(t);
  };
  if (triples.empty() || coin(rng, 0.03)) return coin(rng) ? "SELECT * WHERE { }" : "SELECT * WHERE { }\nLIMIT 3";

  std::vector<std::string> vars;
  auto fresh = [&] {
    vars.push_back("v" + std::to_string(vars.size()));
    return "?" + vars.back();
  };
  auto old = [&] { return "?" + vars[uniform(rng, 0, vars.size() - 1)]; };

  const auto npat = uniform(rng, 1, 3);
  std::vector<std::string> patterns;
  for (std::uint64_t i = 0; i < npat; ++i) {
    const auto& t = triples[uniform(rng, 0, triples.size() - 1)];
    std::string s, p, o;
    if (i == 0) {
      const auto shape = uniform(rng, 0, 9);
      p = shape < 8 ? lexical(t.predicate) : fresh();
      s = (shape >= 8 || coin(rng, 0.3)) ? lexical(t.subject) : fresh();
      o = (s[0] != '?' && p[0] != '?') || !coin(rng, 0.25) ? (coin(rng, 0.05) && s[0] == '?' ? s : fresh())
                                                           : lexical(t.object);
    } else {
      const bool join_subject = coin(rng, 0.6);
      p = coin(rng, 0.9) ? lexical(t.predicate) : fresh();
      s = join_subject ? old() : (coin(rng, 0.2) ? lexical(t.subject) : fresh());
      o = !join_subject ? old() : (coin(rng, 0.2) ? lexical(t.object) : fresh());
    }
    patterns.push_back(s + " " + p + " " + o);
  }

  std::string q;
  if (coin(rng, 0.2)) q += "PREFIX ex: <urn:swarm-net:>\n";
  q += "SELECT ";
  if (coin(rng, 0.3)) q += "DISTINCT ";
  if (coin(rng, 0.3)) {
    q += "*";
  } else {
    std::vector<std::string> proj;
    for (const auto& v : vars) {
      if (coin(rng, 0.6)) proj.push_back("?" + v);
    }
    if (proj.empty()) proj.push_back(old());
    std::shuffle(proj.begin(), proj.end(), rng);
    for (const auto& v : proj) q += v + " ";
  }
  q += "\nWHERE {\n";
  for (std::size_t i = 0; i < patterns.size(); ++i) q += "  " + patterns[i] + (i + 1 < patterns.size() ? " .\n" : "\n");
  static const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
  const auto nfilt = uniform(rng, 0, 2);
  for (std::uint64_t i = 0; i < nfilt; ++i) {
    std::string rhs;
    if (coin(rng, 0.4)) rhs = old();
    else if (coin(rng, 0.5)) rhs = std::to_string(static_cast<std::int64_t>(uniform(rng, 0, 70)) - 20);
    else rhs = lexical(triples[uniform(rng, 0, triples.size() - 1)].object);
    q += "  FILTER(" + old() + " " + ops[uniform(rng, 0, 5)] + " " + rhs + ")\n";
  }
  q += "}";
  if (coin(rng, 0.2)) q += "\nLIMIT " + std::to_string(uniform(rng, 0, 5));
  return q;
}

}  // namespace testsupport
