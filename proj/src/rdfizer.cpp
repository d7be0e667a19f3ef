#include "swarmkdn/rdfizer.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <set>

namespace swarmkdn::rdfizer {
namespace {

namespace pred = rdf::pred;
namespace cls = rdf::cls;

Triple make(const std::string& s, const std::string& p, Term o) {
  return Triple{Term::iri(s), Term::iri(p), std::move(o)};
}

std::string_view kind_name(IriKind k) {
  switch (k) {
    case IriKind::Switch: return "switch";
    case IriKind::Host: return "host";
    case IriKind::Group: return "group";
    case IriKind::Link: return "link";
    case IriKind::Flow: return "flow";
    case IriKind::Report: return "report";
    case IriKind::Hop: return "hop";
  }
  return "?";
}

void sort_unique(std::vector<Triple>& ts) {
  std::sort(ts.begin(), ts.end(),
            [](const Triple& a, const Triple& b) { return rdf::serialize(a) < rdf::serialize(b); });
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
}

std::string endpoint_iri(const Endpoint& ep) {
  return ep.is_switch() ? switch_iri(ep.switch_id) : host_iri(ep.host_id);
}

void add_link(std::vector<Triple>& out, const LinkSpec& l) {
  const auto link = link_iri(l);
  out.push_back(make(link, pred::type, Term::iri(cls::Link)));
  out.push_back(make(link, pred::connects, Term::iri(endpoint_iri(l.a))));
  out.push_back(make(link, pred::connects, Term::iri(endpoint_iri(l.b))));
  out.push_back(make(link, pred::latencyUs, Term::integer(l.latency_us)));
}

}  // namespace

std::string mint_iri(IriKind kind, const std::vector<std::string>& parts) {
  if (parts.empty()) throw Error(ErrorCode::EmptyId, "no id parts");
  std::string out(rdf::kNs);
  out += kind_name(kind);
  for (const auto& p : parts) {
    if (p.empty()) throw Error(ErrorCode::EmptyId, "empty id part");
    for (char c : p) {
      if (c == ':' || c == '<' || c == '>' || c == '"' || c == ' ' || c == '\t' || c == '\n') {
        throw Error(ErrorCode::InvalidId, "id part '" + p + "' has a reserved character");
      }
    }
    out += ':';
    out += p;
  }
  return out;
}

std::string switch_iri(std::uint32_t switch_id) { return mint_iri(IriKind::Switch, {std::to_string(switch_id)}); }
std::string host_iri(std::string_view host_id) { return mint_iri(IriKind::Host, {std::string(host_id)}); }
std::string group_iri(std::string_view swarm_id) { return mint_iri(IriKind::Group, {std::string(swarm_id)}); }
std::string link_iri(const LinkSpec& link) { return mint_iri(IriKind::Link, {link.a.token(), link.b.token()}); }

std::vector<Triple> rdfize_fabric(const Topology& topo) {
  std::vector<Triple> out;
  for (const auto& s : topo.switches) {
    const auto sw = switch_iri(s.id);
    out.push_back(make(sw, pred::type, Term::iri(cls::Switch)));
    out.push_back(make(sw, pred::hasId, Term::integer(s.id)));
  }
  for (const auto& l : topo.links) add_link(out, l);
  sort_unique(out);
  return out;
}

std::vector<Triple> rdfize_topology(const Topology& topo) {
  std::vector<Triple> out = rdfize_fabric(topo);
  std::set<std::string> swarms;
  for (const auto& h : topo.hosts) {
    auto ts = rdfize_host(h);
    out.insert(out.end(), ts.begin(), ts.end());
    swarms.insert(h.swarm_id);
  }
  for (const auto& s : swarms) out.push_back(make(group_iri(s), pred::type, Term::iri(cls::SwarmGroup)));
  sort_unique(out);
  return out;
}

std::vector<Triple> rdfize_host(const HostSpec& h) {
  const auto host = host_iri(h.id);
  std::vector<Triple> out = {
      make(host, pred::type, Term::iri(cls::Host)),
      make(host, pred::hasIp, Term::string(format_ipv4(h.ip))),
      make(host, pred::hasMac, Term::string(format_mac(h.mac))),
      make(host, pred::attachedTo, Term::iri(switch_iri(h.switch_id))),
      make(host, pred::attachPort, Term::integer(h.port)),
      make(host, pred::memberOf, Term::iri(group_iri(h.swarm_id))),
      make(host, pred::capabilities, Term::integer(h.capabilities)),
      make(host, pred::cpuLoad, Term::integer(h.cpu_load_pct)),
      make(host, pred::locX, Term::integer(h.loc_x)),
      make(host, pred::locY, Term::integer(h.loc_y)),
  };
  sort_unique(out);
  return out;
}

std::string flow_iri(std::uint32_t switch_id, const TableEntry& e) {
  Bytes id = key_bytes(e.key);
  ByteWriter prio(id);
  prio.u32(e.priority);
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016" PRIx64, fnv1a64(id));
  return mint_iri(IriKind::Flow, {std::to_string(switch_id), std::string(to_string(e.table())), digest});
}

std::vector<Triple> rdfize_table_entry(std::uint32_t switch_id, const TableEntry& e) {
  const auto flow = flow_iri(switch_id, e);
  std::vector<Triple> out = {
      make(flow, pred::type, Term::iri(cls::FlowEntry)),
      make(flow, pred::onSwitch, Term::iri(switch_iri(switch_id))),
      make(flow, pred::table, Term::string(std::string(to_string(e.table())))),
  };
  if (e.table() == TableId::Acl) out.push_back(make(flow, pred::priority, Term::integer(e.priority)));
  std::visit(
      [&](const auto& a) {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, ForwardAction>) {
          out.push_back(make(flow, pred::actionKind, Term::string("forward")));
          out.push_back(make(flow, pred::actionPort, Term::integer(a.port)));
        } else if constexpr (std::is_same_v<A, DropAction>) {
          out.push_back(make(flow, pred::actionKind, Term::string("drop")));
        } else if constexpr (std::is_same_v<A, SendToCpuAction>) {
          out.push_back(make(flow, pred::actionKind, Term::string("send-to-cpu")));
        } else {
          out.push_back(make(flow, pred::actionKind, Term::string("multicast")));
          out.push_back(make(flow, pred::actionPort, Term::integer(a.group_id)));
        }
      },
      e.action);
  sort_unique(out);
  return out;
}

std::vector<Triple> rdfize_int_report_history(const IntReport& r, std::uint64_t seq, std::uint64_t clock) {
  const auto seq_s = std::to_string(seq);
  const auto report = mint_iri(IriKind::Report, {seq_s});
  std::vector<Triple> out = {
      make(report, pred::type, Term::iri(cls::IntReport)),
      make(report, pred::reportedAt, Term::integer(static_cast<std::int64_t>(clock))),
  };
  for (std::size_t i = 0; i < r.stack.hops.size(); ++i) {
    const auto& hop = r.stack.hops[i];
    const auto hop_iri = mint_iri(IriKind::Hop, {seq_s, std::to_string(i)});
    out.push_back(make(hop_iri, pred::hopIndex, Term::integer(static_cast<std::int64_t>(i))));
    out.push_back(make(hop_iri, pred::observedSwitch, Term::iri(switch_iri(hop.switch_id))));
    out.push_back(make(hop_iri, pred::hopLatencyUs, Term::integer(hop.hop_latency_us)));
  }
  sort_unique(out);
  return out;
}

ReportTriples rdfize_int_report(const IntReport& r, std::uint64_t seq, std::uint64_t clock,
                                const HostResolver& resolve_host) {
  ReportTriples out;
  out.triples = rdfize_int_report_history(r, seq, clock);
  const auto host = resolve_host(r.src_ip);
  out.unknown_source_host = !host.has_value();
  if (r.stack.node_meta && host) {
    const auto& m = *r.stack.node_meta;
    const auto subject = Term::iri(*host);
    out.node_updates = {
        {subject, Term::iri(pred::capabilities), Term::integer(m.capabilities)},
        {subject, Term::iri(pred::cpuLoad), Term::integer(m.cpu_load_pct)},
        {subject, Term::iri(pred::locX), Term::integer(m.loc_x)},
        {subject, Term::iri(pred::locY), Term::integer(m.loc_y)},
    };
  }
  return out;
}

}  // namespace swarmkdn::rdfizer
