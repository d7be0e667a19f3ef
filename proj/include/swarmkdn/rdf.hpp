#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace swarmkdn::rdf {

inline constexpr std::string_view kNs = "urn:swarm-net:";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kXsdBoolean = "http://www.w3.org/2001/XMLSchema#boolean";

/// IRI or literal. Ordering and equality follow (kind, value).
struct Term {
  enum class Kind : std::uint8_t { Iri, String, Integer, Boolean };

  Kind kind = Kind::Iri;
  std::string value;  // IRI text or lexical form

  static Term iri(std::string v) { return {Kind::Iri, std::move(v)}; }
  static Term string(std::string v) { return {Kind::String, std::move(v)}; }
  static Term integer(std::int64_t v) { return {Kind::Integer, std::to_string(v)}; }
  static Term boolean(bool v) { return {Kind::Boolean, v ? "true" : "false"}; }

  bool is_iri() const { return kind == Kind::Iri; }
  bool is_literal() const { return kind != Kind::Iri; }

  auto operator<=>(const Term&) const = default;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
};

/// N-Triples form of a term: <iri>, "text", "5"^^<xsd:integer>, ...
std::string serialize(const Term& t);
/// One N-Triples line without the trailing newline.
std::string serialize(const Triple& t);

/// Checks the term invariants: absolute IRIs, integer literals that fit in
/// a signed 64-bit value, boolean literals true/false.
bool is_valid(const Term& t);
bool is_valid(const Triple& t);

/// Parses one N-Triples line (as produced by serialize). Throws ParseError.
Triple parse_ntriples_line(std::string_view line);
std::vector<Triple> parse_ntriples(std::string_view text);

/// Sorted, newline-terminated N-Triples document.
std::string to_ntriples(std::vector<Triple> triples);

// Closed vocabulary.
namespace sn {
std::string iri(std::string_view local);
}  // namespace sn

namespace cls {
inline const std::string Switch = sn::iri("Switch");
inline const std::string Host = sn::iri("Host");
inline const std::string Link = sn::iri("Link");
inline const std::string Port = sn::iri("Port");
inline const std::string SwarmGroup = sn::iri("SwarmGroup");
inline const std::string FlowEntry = sn::iri("FlowEntry");
inline const std::string IntReport = sn::iri("IntReport");
inline const std::string Hop = sn::iri("Hop");
}  // namespace cls

namespace pred {
inline const std::string type{kRdfType};
inline const std::string hasId = sn::iri("hasId");
inline const std::string memberOf = sn::iri("memberOf");
inline const std::string hasIp = sn::iri("hasIp");
inline const std::string hasMac = sn::iri("hasMac");
inline const std::string attachedTo = sn::iri("attachedTo");
inline const std::string attachPort = sn::iri("attachPort");
inline const std::string connects = sn::iri("connects");
inline const std::string latencyUs = sn::iri("latencyUs");
inline const std::string hopLatencyUs = sn::iri("hopLatencyUs");
inline const std::string cpuLoad = sn::iri("cpuLoad");
inline const std::string locX = sn::iri("locX");
inline const std::string locY = sn::iri("locY");
inline const std::string capabilities = sn::iri("capabilities");
inline const std::string onSwitch = sn::iri("onSwitch");
inline const std::string table = sn::iri("table");
inline const std::string priority = sn::iri("priority");
inline const std::string actionKind = sn::iri("actionKind");
inline const std::string actionPort = sn::iri("actionPort");
inline const std::string reportedAt = sn::iri("reportedAt");
inline const std::string hopIndex = sn::iri("hopIndex");
inline const std::string observedSwitch = sn::iri("observedSwitch");
}  // namespace pred

const std::set<std::string>& ontology_classes();
const std::set<std::string>& ontology_predicates();
/// Predicates that hold at most one value per subject.
const std::set<std::string>& functional_predicates();

}  // namespace swarmkdn::rdf
