#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "swarmkdn/rdf.hpp"
#include "swarmkdn/switch.hpp"
#include "swarmkdn/topology.hpp"

namespace swarmkdn::rdfizer {

using rdf::Term;
using rdf::Triple;

enum class IriKind { Switch, Host, Group, Link, Flow, Report, Hop };

/// urn:swarm-net:<kind>:<parts joined by ':'>. Parts must be non-empty
/// (EmptyId) and free of ':', '<', '>', '"' and whitespace (InvalidId), which
/// keeps the mapping injective per kind.
std::string mint_iri(IriKind kind, const std::vector<std::string>& parts);

std::string switch_iri(std::uint32_t switch_id);
std::string host_iri(std::string_view host_id);
std::string group_iri(std::string_view swarm_id);
std::string link_iri(const LinkSpec& link);

/// Switches, links (including host attachments), swarm groups and hosts,
/// sorted lexicographically.
std::vector<Triple> rdfize_topology(const Topology& topo);

/// Switches and switch/host links only; no host or group statements.
std::vector<Triple> rdfize_fabric(const Topology& topo);

std::vector<Triple> rdfize_host(const HostSpec& host);

std::string flow_iri(std::uint32_t switch_id, const TableEntry& e);
std::vector<Triple> rdfize_table_entry(std::uint32_t switch_id, const TableEntry& e);

/// A functional property replacement on an existing subject.
struct FunctionalUpdate {
  Term subject;
  Term predicate;
  Term object;
  bool operator==(const FunctionalUpdate&) const = default;
};

struct ReportTriples {
  std::vector<Triple> triples;  // append-only report history
  std::vector<FunctionalUpdate> node_updates;
  bool unknown_source_host = false;
};

/// Resolves a source IPv4 address to a host IRI, if the graph knows it.
using HostResolver = std::function<std::optional<std::string>(Ipv4Address)>;

std::vector<Triple> rdfize_int_report_history(const IntReport& r, std::uint64_t seq, std::uint64_t clock);

ReportTriples rdfize_int_report(const IntReport& r, std::uint64_t seq, std::uint64_t clock,
                                const HostResolver& resolve_host);

}  // namespace swarmkdn::rdfizer
