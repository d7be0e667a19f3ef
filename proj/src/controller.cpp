#include "swarmkdn/controller.hpp"

#include <algorithm>
#include <charconv>

#include "swarmkdn/rdfizer.hpp"

namespace swarmkdn {
namespace {

namespace pred = rdf::pred;

struct Label {
  double cost = 0.0;
  std::size_t hops = 0;
  std::vector<std::uint32_t> seq;

  bool operator<(const Label& o) const {
    if (cost != o.cost) return cost < o.cost;
    if (hops != o.hops) return hops < o.hops;
    return seq < o.seq;
  }
};

std::map<std::uint32_t, std::vector<std::uint32_t>> adjacency(const Topology& topo) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> adj;
  for (const auto& s : topo.switches) adj[s.id];
  for (const auto& l : topo.links) {
    if (!l.a.is_switch() || !l.b.is_switch()) continue;
    adj[l.a.switch_id].push_back(l.b.switch_id);
    adj[l.b.switch_id].push_back(l.a.switch_id);
  }
  return adj;
}

std::string strip_prefix(const std::string& iri, std::string_view prefix) {
  return iri.compare(0, prefix.size(), prefix) == 0 ? iri.substr(prefix.size()) : iri;
}

std::int64_t as_int(const Term& t) {
  std::int64_t v = 0;
  std::from_chars(t.value.data(), t.value.data() + t.value.size(), v);
  return v;
}

const std::string kHostPrefix = std::string(rdf::kNs) + "host:";
const std::string kGroupPrefix = std::string(rdf::kNs) + "group:";

}  // namespace

std::string to_string(const DirectedLink& l) {
  return "s" + std::to_string(l.from) + "->s" + std::to_string(l.to);
}

LinkWeightTable::LinkWeightTable(const Topology& topo) {
  for (const auto& l : topo.links) {
    if (!l.a.is_switch() || !l.b.is_switch()) continue;
    const double w = l.latency_us;
    weights_[{l.a.switch_id, l.b.switch_id}] = LinkWeight{w, 0, 0};
    weights_[{l.b.switch_id, l.a.switch_id}] = LinkWeight{w, 0, 0};
  }
}

const LinkWeight& LinkWeightTable::at(const DirectedLink& l) const {
  auto it = weights_.find(l);
  if (it == weights_.end()) throw Error(ErrorCode::UnknownEntity, "no link " + to_string(l));
  return it->second;
}

void LinkWeightTable::update(const DirectedLink& l, double sample, double alpha, std::uint64_t now) {
  auto it = weights_.find(l);
  if (it == weights_.end()) throw Error(ErrorCode::UnknownEntity, "no link " + to_string(l));
  auto& w = it->second;
  w.ewma_latency_us = alpha * sample + (1.0 - alpha) * w.ewma_latency_us;
  w.last_update = now;
  ++w.sample_count;
}

void LinkWeightTable::set(const DirectedLink& l, double ewma) {
  auto it = weights_.find(l);
  if (it == weights_.end()) throw Error(ErrorCode::UnknownEntity, "no link " + to_string(l));
  it->second.ewma_latency_us = std::max(0.0, ewma);
}

std::map<std::uint32_t, std::vector<std::uint32_t>> shortest_path_tree(const Topology& topo,
                                                                         const LinkWeightTable& weights,
                                                                         std::uint32_t src) {
  if (topo.find_switch(src) == nullptr) throw Error(ErrorCode::UnknownSwitch, "switch " + std::to_string(src));
  const auto adj = adjacency(topo);
  std::map<std::uint32_t, Label> best;
  std::set<std::uint32_t> done;
  best[src] = Label{0.0, 0, {src}};
  for (;;) {
    const Label* pick = nullptr;
    std::uint32_t u = 0;
    for (const auto& [node, label] : best) {
      if (done.contains(node)) continue;
      if (pick == nullptr || label < *pick) {
        pick = &label;
        u = node;
      }
    }
    if (pick == nullptr) break;
    done.insert(u);
    const Label base = *pick;
    for (auto v : adj.at(u)) {
      if (done.contains(v)) continue;
      Label cand{base.cost + weights.ewma({u, v}), base.hops + 1, base.seq};
      cand.seq.push_back(v);
      auto it = best.find(v);
      if (it == best.end() || cand < it->second) best[v] = std::move(cand);
    }
  }
  std::map<std::uint32_t, std::vector<std::uint32_t>> out;
  for (auto& [node, label] : best) out.emplace(node, std::move(label.seq));
  return out;
}

std::uint16_t port_towards(const Topology& topo, std::uint32_t a, std::uint32_t b) {
  const auto idx = topo.find_switch_link(a, b);
  if (!idx) {
    throw Error(ErrorCode::NoPath, "no link between switches " + std::to_string(a) + " and " + std::to_string(b));
  }
  const auto& l = topo.links[*idx];
  return l.a.switch_id == a ? l.a.port : l.b.port;
}

Path shortest_path(const Topology& topo, const LinkWeightTable& weights, std::uint32_t src,
                   std::uint32_t dst, std::uint16_t final_egress_port) {
  if (topo.find_switch(dst) == nullptr) throw Error(ErrorCode::UnknownSwitch, "switch " + std::to_string(dst));
  const auto tree = shortest_path_tree(topo, weights, src);
  auto it = tree.find(dst);
  if (it == tree.end()) {
    throw Error(ErrorCode::NoPath, "switch " + std::to_string(dst) + " unreachable from " + std::to_string(src));
  }
  const auto& seq = it->second;
  Path path;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::uint16_t port = i + 1 < seq.size() ? port_towards(topo, seq[i], seq[i + 1]) : final_egress_port;
    path.push_back({seq[i], port});
  }
  return path;
}

const Route* RouteState::find(const Key& k) const {
  auto it = routes_.find(k);
  return it == routes_.end() ? nullptr : &it->second;
}

Route* RouteState::find(const Key& k) {
  auto it = routes_.find(k);
  return it == routes_.end() ? nullptr : &it->second;
}

Route& RouteState::upsert(const Key& k) { return routes_[k]; }

Controller::Controller(ControllerConfig config) : config_(config) {}

void Controller::bootstrap(const Topology& topo) {
  if (bootstrapped_ || !store_.empty()) throw Error(ErrorCode::DuplicateBootstrap, "controller already bootstrapped");
  topo.validate();
  topology_ = topo;
  for (const auto& t : rdfizer::rdfize_topology(topo)) store_.insert(t);
  weights_ = LinkWeightTable(topo);
  bootstrapped_ = true;
}

sparql::ResultTable Controller::query(std::string_view sparql_text) const {
  return sparql::evaluate(sparql::parse_query(sparql_text), store_);
}

std::optional<std::string> Controller::host_by_ip(Ipv4Address ip) const {
  const auto rows = store_.match_pattern(
      {Variable{"h"}, Term::iri(pred::hasIp), Term::string(format_ipv4(ip))});
  if (rows.empty()) return std::nullopt;
  return rows.front().subject.value;
}

std::vector<MemberInfo> Controller::resolve_swarm_members(Ipv4Address publisher_ip) const {
  if (!host_by_ip(publisher_ip)) {
    throw Error(ErrorCode::UnknownPublisher, "no host with ip " + format_ipv4(publisher_ip));
  }
  const auto result = query(
      "SELECT ?n ?ip ?sid ?port WHERE {\n"
      "  ?p sn:hasIp \"" + format_ipv4(publisher_ip) + "\" .\n"
      "  ?p sn:memberOf ?g .\n"
      "  ?n sn:memberOf ?g .\n"
      "  ?n sn:hasIp ?ip .\n"
      "  ?n sn:attachedTo ?sw .\n"
      "  ?sw sn:hasId ?sid .\n"
      "  ?n sn:attachPort ?port .\n"
      "  FILTER(?n != ?p)\n"
      "}");
  std::vector<MemberInfo> members;
  for (const auto& row : result.rows) {
    MemberInfo m;
    m.host_iri = row[0].value;
    m.ip = parse_ipv4(row[1].value);
    m.switch_id = static_cast<std::uint32_t>(as_int(row[2]));
    m.port = static_cast<std::uint16_t>(as_int(row[3]));
    members.push_back(std::move(m));
  }
  return members;
}

std::uint16_t Controller::allocate_group(std::uint32_t switch_id) {
  auto& next = next_group_[switch_id];
  if (next == 0) next = 1;
  return next++;
}

TableEntry Controller::acl_entry(const Route& route, const SwitchProgram& program) const {
  TableEntry e;
  e.key = route.match;
  e.priority = route.priority;
  if (program.deny) {
    e.action = DropAction{};
  } else if (route.multicast) {
    e.action = MulticastAction{program.group_id};
  } else {
    e.action = ForwardAction{*program.ports.begin()};
  }
  return e;
}

Controller::Desired Controller::plan(const Route& route, std::uint32_t root,
                                     const std::vector<MemberInfo>& members,
                                     std::vector<ControlAction>& log) const {
  Desired d;
  const auto tree = shortest_path_tree(topology_, weights_, root);
  for (const auto& m : members) {
    const auto host_id = strip_prefix(m.host_iri, kHostPrefix);
    auto it = tree.find(m.switch_id);
    if (it == tree.end()) {
      log.emplace_back(LogAction{"NoPath: member " + host_id + " unreachable from switch " + std::to_string(root)});
      continue;
    }
    const auto& seq = it->second;
    Path path;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto port = i + 1 < seq.size() ? port_towards(topology_, seq[i], seq[i + 1]) : m.port;
      path.push_back({seq[i], port});
      d.programs[seq[i]].ports.insert(port);
    }
    d.member_paths.emplace(host_id, std::move(path));
  }
  if (d.member_paths.empty()) {
    d.programs.clear();
    d.programs[root].deny = true;
  }
  (void)route;
  return d;
}

std::uint64_t Controller::drain_delay(const Route& route) const {
  std::uint64_t longest = 0;
  for (const auto& [host_id, path] : route.member_paths) {
    double total = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const auto* sw = topology_.find_switch(path[i].switch_id);
      total += sw ? sw->proc_latency_us : 0;
      if (i + 1 < path.size()) {
        const DirectedLink l{path[i].switch_id, path[i + 1].switch_id};
        total += topology_.links[*topology_.find_switch_link(l.from, l.to)].latency_us;
        total += weights_.contains(l) ? weights_.ewma(l) : 0.0;
      } else if (auto idx = topology_.find_host_link(host_id)) {
        total += topology_.links[*idx].latency_us;
      }
    }
    longest = std::max(longest, static_cast<std::uint64_t>(total));
  }
  return 2 * longest + 1;
}

std::vector<ControlAction> Controller::reconcile(Route& route, const Desired& desired, std::uint32_t root) {
  std::vector<ControlAction> make;
  std::vector<ControlAction> brk;
  const std::uint64_t delay = drain_delay(route);

  // Depth of each switch in the new tree; deeper switches are programmed
  // first so upstream switches never point at missing state.
  std::map<std::uint32_t, std::size_t> depth;
  depth[root] = 0;
  for (const auto& [_, path] : desired.member_paths) {
    for (std::size_t i = 0; i < path.size(); ++i) depth[path[i].switch_id] = i;
  }
  std::vector<std::uint32_t> order;
  for (const auto& [sw, _] : desired.programs) order.push_back(sw);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return depth[a] != depth[b] ? depth[a] > depth[b] : a < b;
  });

  std::map<std::uint32_t, SwitchProgram> installed;
  bool changed = false;
  for (auto sw : order) {
    SwitchProgram prog = desired.programs.at(sw);
    auto old = route.installed.find(sw);
    const bool exists = old != route.installed.end();
    if (exists && old->second.ports == prog.ports && old->second.deny == prog.deny) {
      installed[sw] = old->second;
      continue;
    }
    changed = true;
    WriteRequest req;
    req.switch_id = sw;
    if (!prog.deny && route.multicast) {
      prog.group_id = allocate_group(sw);
      req.updates.push_back({WriteOp::Insert, MulticastGroup{prog.group_id, prog.ports}});
    }
    req.updates.push_back({exists ? WriteOp::Modify : WriteOp::Insert, acl_entry(route, prog)});
    make.emplace_back(WriteAction{std::move(req), 0});
    if (exists && old->second.group_id != 0) {
      WriteRequest cleanup;
      cleanup.switch_id = sw;
      cleanup.updates.push_back({WriteOp::Delete, MulticastGroup{old->second.group_id, {}}});
      brk.emplace_back(WriteAction{std::move(cleanup), delay});
    }
    installed[sw] = prog;
  }
  for (const auto& [sw, prog] : route.installed) {
    if (desired.programs.contains(sw)) continue;
    changed = true;
    WriteRequest req;
    req.switch_id = sw;
    req.updates.push_back({WriteOp::Delete, acl_entry(route, prog)});
    if (prog.group_id != 0) req.updates.push_back({WriteOp::Delete, MulticastGroup{prog.group_id, {}}});
    brk.emplace_back(WriteAction{std::move(req), delay});
  }

  route.installed = std::move(installed);
  route.member_paths = desired.member_paths;
  if (changed) ++route.generation;
  make.insert(make.end(), std::make_move_iterator(brk.begin()), std::make_move_iterator(brk.end()));
  return make;
}

std::vector<ControlAction> Controller::handle_packet_in(const PacketIn& pi, std::uint64_t now) {
  switch (static_cast<CpuReason>(pi.reason)) {
    case CpuReason::RtpsInspect:
      return handle_rtps_packet_in(pi);
    case CpuReason::IntReport: {
      std::vector<ControlAction> actions;
      IntReport report;
      try {
        report = int_report_from_frame(pi.switch_id, pi.frame);
      } catch (const Error& e) {
        actions.emplace_back(LogAction{std::string("bad INT report: ") + e.what()});
        return actions;
      }
      std::vector<std::string> log;
      ingest_int_report(report, now, &log);
      for (auto& line : log) actions.emplace_back(LogAction{std::move(line)});
      auto more = reroute_on_congestion();
      actions.insert(actions.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      return actions;
    }
    case CpuReason::TableMiss:
      break;
  }
  return {LogAction{"table miss on switch " + std::to_string(pi.switch_id)}};
}

std::vector<ControlAction> Controller::handle_rtps_packet_in(const PacketIn& pi) {
  std::vector<ControlAction> actions;
  HeaderStack pkt;
  try {
    pkt = parse_packet(pi.frame);
  } catch (const Error& e) {
    actions.emplace_back(LogAction{std::string("unparseable packet-in: ") + e.what()});
    return actions;
  }
  if (!pkt.rtps || !pkt.ipv4) {
    actions.emplace_back(LogAction{"packet-in without RTPS header ignored"});
    return actions;
  }
  if (!pkt.udp || pkt.udp->dst_port != config_.rtps_udp_port) {
    actions.emplace_back(LogAction{"RTPS packet-in on UDP port " + std::to_string(pkt.udp ? pkt.udp->dst_port : 0) +
                                   " is outside the swarm port; ignored"});
    return actions;
  }

  const Ipv4Address publisher_ip = pkt.ipv4->src_ip;
  const auto pub = query(
      "SELECT ?p ?sid ?g WHERE { ?p sn:hasIp \"" + format_ipv4(publisher_ip) +
      "\" . ?p sn:attachedTo ?sw . ?sw sn:hasId ?sid . ?p sn:memberOf ?g }");
  if (pub.rows.empty()) {
    actions.emplace_back(LogAction{"UnknownPublisher: " + format_ipv4(publisher_ip)});
    return actions;
  }
  const auto publisher_host = strip_prefix(pub.rows[0][0].value, kHostPrefix);
  const auto root = static_cast<std::uint32_t>(as_int(pub.rows[0][1]));
  const auto swarm = strip_prefix(pub.rows[0][2].value, kGroupPrefix);
  const auto members = resolve_swarm_members(publisher_ip);

  const RouteState::Key key{publisher_host, "group:" + swarm};
  Route& route = routes_.upsert(key);
  if (route.source_host.empty()) {
    route.source_host = publisher_host;
    route.target = key.second;
    route.multicast = true;
    route.match = AclMatch{publisher_ip, 0xFFFFFFFFu, 0, 0, config_.rtps_udp_port, 0xFFFF};
    route.priority = config_.acl_priority_base;
  }
  const Desired desired = plan(route, root, members, actions);
  auto writes = reconcile(route, desired, root);
  actions.insert(actions.end(), std::make_move_iterator(writes.begin()), std::make_move_iterator(writes.end()));

  auto here = route.installed.find(pi.switch_id);
  if (here == route.installed.end() || here->second.deny) {
    if (here == route.installed.end()) {
      actions.emplace_back(LogAction{"packet-in from switch " + std::to_string(pi.switch_id) +
                                     " is off the current tree; not re-emitted"});
    }
    return actions;
  }
  // The entries written above are in place before the packet-out is
  // handled, so the pipeline does the replication.
  actions.emplace_back(PacketOut{pi.switch_id, kCpuOutPipeline, pi.frame});
  return actions;
}

std::vector<ControlAction> Controller::install_unicast_route(std::string_view src_host, std::string_view dst_host) {
  const auto* src = topology_.find_host(src_host);
  const auto* dst = topology_.find_host(dst_host);
  if (src == nullptr || dst == nullptr) {
    throw Error(ErrorCode::UnknownHost, "route endpoints " + std::string(src_host) + " -> " + std::string(dst_host));
  }
  const RouteState::Key key{src->id, "host:" + dst->id};
  Route& route = routes_.upsert(key);
  if (route.source_host.empty()) {
    route.source_host = src->id;
    route.target = key.second;
    route.multicast = false;
    route.match = AclMatch{src->ip, 0xFFFFFFFFu, dst->ip, 0xFFFFFFFFu, 0, 0};
    route.priority = config_.acl_priority_base;
  }
  std::vector<ControlAction> actions;
  const MemberInfo member{rdfizer::host_iri(dst->id), dst->ip, dst->switch_id, dst->port};
  const Desired desired = plan(route, src->switch_id, {member}, actions);
  auto writes = reconcile(route, desired, src->switch_id);
  actions.insert(actions.end(), std::make_move_iterator(writes.begin()), std::make_move_iterator(writes.end()));
  return actions;
}

std::vector<DirectedLink> Controller::ingest_int_report(const IntReport& r, std::uint64_t now,
                                                        std::vector<std::string>* log) {
  auto note = [&](std::string line) {
    if (log) log->push_back(std::move(line));
  };
  const std::uint64_t seq = report_seq_++;
  auto rdf = rdfizer::rdfize_int_report(r, seq, now, [this](Ipv4Address ip) { return host_by_ip(ip); });
  for (const auto& t : rdf.triples) store_.insert(t);
  for (const auto& u : rdf.node_updates) store_.upsert_functional(u.subject, u.predicate, u.object);
  if (rdf.unknown_source_host) note("UnknownSourceHost: report " + std::to_string(seq) + " from " + format_ipv4(r.src_ip));

  std::vector<DirectedLink> updated;
  const auto& hops = r.stack.hops;
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
    const DirectedLink link{hops[i].switch_id, hops[i + 1].switch_id};
    if (topology_.find_switch(link.from) == nullptr || topology_.find_switch(link.to) == nullptr ||
        !weights_.contains(link)) {
      note("UnknownSwitchInReport: report " + std::to_string(seq) + " hop pair " + to_string(link));
      continue;
    }
    weights_.update(link, hops[i + 1].hop_latency_us, config_.alpha, now);
    updated.push_back(link);
  }
  return updated;
}

std::vector<DirectedLink> Controller::detect_congestion() const {
  std::vector<DirectedLink> out;
  for (const auto& [link, w] : weights_.all()) {
    if (w.ewma_latency_us > config_.congestion_threshold_us) out.push_back(link);
  }
  return out;
}

Path Controller::compute_path(std::uint32_t src_switch, std::uint32_t dst_switch,
                              std::uint16_t final_egress_port) const {
  return shortest_path(topology_, weights_, src_switch, dst_switch, final_egress_port);
}

std::vector<ControlAction> Controller::reroute_on_congestion() {
  std::vector<ControlAction> actions;
  const auto congested = detect_congestion();
  if (congested.empty()) return actions;
  const std::set<DirectedLink> hot(congested.begin(), congested.end());

  for (auto& [key, route] : routes_.all()) {
    bool affected = false;
    for (const auto& [_, path] : route.member_paths) {
      for (std::size_t i = 0; i + 1 < path.size() && !affected; ++i) {
        affected = hot.contains({path[i].switch_id, path[i + 1].switch_id});
      }
    }
    if (!affected) continue;

    const auto* src = topology_.find_host(route.source_host);
    std::vector<MemberInfo> members;
    for (const auto& [host_id, _] : route.member_paths) {
      const auto* h = topology_.find_host(host_id);
      members.push_back({rdfizer::host_iri(h->id), h->ip, h->switch_id, h->port});
    }
    std::vector<ControlAction> log;
    const Desired desired = plan(route, src->switch_id, members, log);
    if (desired.member_paths.size() != members.size()) {
      actions.emplace_back(LogAction{"NoPath: route " + key.first + " -> " + key.second + " left in place"});
      continue;
    }
    if (desired.member_paths == route.member_paths) continue;
    auto writes = reconcile(route, desired, src->switch_id);
    actions.emplace_back(LogAction{"reroute " + key.first + " -> " + key.second + " generation " +
                                   std::to_string(route.generation)});
    actions.insert(actions.end(), std::make_move_iterator(writes.begin()), std::make_move_iterator(writes.end()));
  }
  return actions;
}

std::string Controller::select_node(std::uint16_t required) const {
  const auto result = query("SELECT ?h ?caps ?cpu WHERE { ?h a sn:Host . ?h sn:capabilities ?caps . ?h sn:cpuLoad ?cpu }");
  std::optional<std::pair<std::int64_t, std::string>> best;
  for (const auto& row : result.rows) {
    const auto caps = static_cast<std::uint16_t>(as_int(row[1]));
    if ((caps & required) != required) continue;
    std::pair<std::int64_t, std::string> cand{as_int(row[2]), row[0].value};
    if (!best || cand < *best) best = std::move(cand);
  }
  if (!best) throw Error(ErrorCode::NoCapableNode, "no host offers capabilities " + std::to_string(required));
  return best->second;
}

void Controller::observe_write(const WriteRequest& req, const WriteReply& reply) {
  for (std::size_t i = 0; i < req.updates.size() && i < reply.statuses.size(); ++i) {
    if (reply.statuses[i] != WriteStatus::Ok) continue;
    const auto* entry = std::get_if<TableEntry>(&req.updates[i].entity);
    if (entry == nullptr) continue;
    const auto flow = Term::iri(rdfizer::flow_iri(req.switch_id, *entry));
    if (req.updates[i].op != WriteOp::Insert) {
      for (const auto& t : store_.match_pattern({flow, Variable{"p"}, Variable{"o"}})) store_.remove(t);
    }
    if (req.updates[i].op != WriteOp::Delete) {
      for (const auto& t : rdfizer::rdfize_table_entry(req.switch_id, *entry)) store_.insert(t);
    }
  }
}

IntReport int_report_from_frame(std::uint32_t sink_switch, ByteView frame) {
  const HeaderStack pkt = parse_packet(frame);
  if (!pkt.int_stack) throw Error(ErrorCode::BadIntStack, "report frame carries no INT stack");
  return IntReport{sink_switch, pkt.ipv4->src_ip, pkt.ipv4->dst_ip, *pkt.int_stack};
}

}  // namespace swarmkdn
