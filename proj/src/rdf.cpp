#include "swarmkdn/rdf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "swarmkdn/error.hpp"

namespace swarmkdn::rdf {
namespace {

[[noreturn]] void bad(std::string_view line, const std::string& what) {
  throw Error(ErrorCode::ParseError, what + " in N-Triples line '" + std::string(line) + "'");
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct LineReader {
  std::string_view line;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  }
  bool at(char c) const { return pos < line.size() && line[pos] == c; }

  std::string iri() {
    if (!at('<')) bad(line, "expected '<'");
    auto end = line.find('>', pos);
    if (end == std::string_view::npos) bad(line, "unterminated IRI");
    std::string out(line.substr(pos + 1, end - pos - 1));
    pos = end + 1;
    return out;
  }

  Term term() {
    skip_ws();
    if (at('<')) return Term::iri(iri());
    if (!at('"')) bad(line, "expected term");
    ++pos;
    std::string lexical;
    for (;;) {
      if (pos >= line.size()) bad(line, "unterminated literal");
      char c = line[pos++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos >= line.size()) bad(line, "dangling escape");
        char e = line[pos++];
        switch (e) {
          case '"': lexical.push_back('"'); break;
          case '\\': lexical.push_back('\\'); break;
          case 'n': lexical.push_back('\n'); break;
          case 'r': lexical.push_back('\r'); break;
          case 't': lexical.push_back('\t'); break;
          default: bad(line, "unsupported escape");
        }
      } else {
        lexical.push_back(c);
      }
    }
    if (line.substr(pos, 2) == "^^") {
      pos += 2;
      const std::string dt = iri();
      if (dt == kXsdInteger) return {Term::Kind::Integer, std::move(lexical)};
      if (dt == kXsdBoolean) return {Term::Kind::Boolean, std::move(lexical)};
      if (dt == "http://www.w3.org/2001/XMLSchema#string") return Term::string(std::move(lexical));
      bad(line, "unsupported datatype <" + dt + ">");
    }
    return Term::string(std::move(lexical));
  }
};

}  // namespace

std::string sn::iri(std::string_view local) { return std::string(kNs) + std::string(local); }

std::string serialize(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Iri: return "<" + t.value + ">";
    case Term::Kind::String: return "\"" + escape(t.value) + "\"";
    case Term::Kind::Integer: return "\"" + t.value + "\"^^<" + std::string(kXsdInteger) + ">";
    case Term::Kind::Boolean: return "\"" + t.value + "\"^^<" + std::string(kXsdBoolean) + ">";
  }
  return {};
}

std::string serialize(const Triple& t) {
  return serialize(t.subject) + " " + serialize(t.predicate) + " " + serialize(t.object) + " .";
}

bool is_valid(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Iri: {
      auto colon = t.value.find(':');
      if (colon == std::string::npos || colon == 0) return false;
      if (!std::isalpha(static_cast<unsigned char>(t.value[0]))) return false;
      return std::none_of(t.value.begin(), t.value.end(),
                          [](char c) { return c == '<' || c == '>' || c == ' ' || c == '"'; });
    }
    case Term::Kind::String: return true;
    case Term::Kind::Integer: {
      std::int64_t v = 0;
      const char* b = t.value.data();
      const char* e = b + t.value.size();
      auto [p, ec] = std::from_chars(b, e, v);
      return ec == std::errc{} && p == e && !t.value.empty() && t.value == std::to_string(v);
    }
    case Term::Kind::Boolean: return t.value == "true" || t.value == "false";
  }
  return false;
}

bool is_valid(const Triple& t) {
  return t.subject.is_iri() && t.predicate.is_iri() && is_valid(t.subject) && is_valid(t.predicate) &&
         is_valid(t.object);
}

Triple parse_ntriples_line(std::string_view line) {
  LineReader r{line};
  Triple t;
  t.subject = r.term();
  t.predicate = r.term();
  t.object = r.term();
  r.skip_ws();
  if (!r.at('.')) bad(line, "expected '.'");
  ++r.pos;
  r.skip_ws();
  if (r.pos != line.size()) bad(line, "trailing characters");
  if (!is_valid(t)) bad(line, "invalid triple");
  return t;
}

std::vector<Triple> parse_ntriples(std::string_view text) {
  std::vector<Triple> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') out.push_back(parse_ntriples_line(line));
    start = end + 1;
  }
  return out;
}

std::string to_ntriples(std::vector<Triple> triples) {
  std::vector<std::string> lines;
  lines.reserve(triples.size());
  for (const auto& t : triples) lines.push_back(serialize(t));
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

const std::set<std::string>& ontology_classes() {
  static const std::set<std::string> kClasses = {cls::Switch,     cls::Host,      cls::Link,
                                                 cls::Port,       cls::SwarmGroup, cls::FlowEntry,
                                                 cls::IntReport,  cls::Hop};
  return kClasses;
}

const std::set<std::string>& ontology_predicates() {
  static const std::set<std::string> kPredicates = {
      pred::type,        pred::hasId,      pred::memberOf,   pred::hasIp,     pred::hasMac,
      pred::attachedTo,  pred::attachPort, pred::connects,   pred::latencyUs, pred::hopLatencyUs,
      pred::cpuLoad,     pred::locX,       pred::locY,       pred::capabilities, pred::onSwitch,
      pred::table,       pred::priority,   pred::actionKind, pred::actionPort, pred::reportedAt,
      pred::hopIndex,    pred::observedSwitch};
  return kPredicates;
}

const std::set<std::string>& functional_predicates() {
  static const std::set<std::string> kFunctional = {pred::cpuLoad, pred::locX, pred::locY,
                                                    pred::capabilities, pred::hasIp};
  return kFunctional;
}

}  // namespace swarmkdn::rdf
