#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "swarmkdn/rdf.hpp"

namespace swarmkdn {

using rdf::Term;
using rdf::Triple;

struct Variable {
  std::string name;  // without the leading '?'
  auto operator<=>(const Variable&) const = default;
};

using PatternTerm = std::variant<Term, Variable>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
  bool operator==(const TriplePattern&) const = default;
};

enum class IndexKind { Spo, Pos, Osp };

/// In-memory RDF graph with SPO, POS and OSP indexes over interned term ids.
/// Readers may run concurrently; a single writer mutates through
/// insert/remove/upsert_functional.
class TripleStore {
 public:
  using TermId = std::uint32_t;
  using IdTriple = std::array<TermId, 3>;  // subject, predicate, object

  TripleStore();

  /// True iff the triple was not present.
  bool insert(const Triple& t);
  /// True iff the triple was present.
  bool remove(const Triple& t);
  bool contains(const Triple& t) const;

  /// Replaces every (s, p, *) with (s, p, o). Throws NotFunctional unless p is
  /// declared functional. Returns the previous object, if any.
  std::optional<Term> upsert_functional(const Term& s, const Term& p, const Term& o);

  std::vector<Triple> match_pattern(const TriplePattern& p) const;

  /// Index used for a pattern: S bound -> SPO, else P bound -> POS, else O
  /// bound -> OSP, else a full SPO scan.
  static IndexKind choose_index(bool s_bound, bool p_bound, bool o_bound);

  /// Id-level matching used by the query engine. nullopt means unbound.
  void match_ids(std::optional<TermId> s, std::optional<TermId> p, std::optional<TermId> o,
                 std::vector<IdTriple>& out) const;
  std::optional<TermId> lookup(const Term& t) const;
  const Term& term(TermId id) const { return terms_[id]; }

  std::size_t size() const { return spo_.size(); }
  bool empty() const { return spo_.empty(); }
  std::vector<Triple> triples() const;

  /// Recomputes the triple set from each index and compares them.
  bool indexes_coherent() const;

  std::string export_ntriples() const;
  /// Inserts every triple from an N-Triples document. Throws ParseError.
  std::size_t import_ntriples(std::string_view text);

  void set_functional_predicates(std::set<std::string> iris) { functional_ = std::move(iris); }
  bool is_functional(const Term& p) const { return p.is_iri() && functional_.contains(p.value); }

  bool operator==(const TripleStore& other) const;

 private:
  TermId intern(const Term& t);
  Triple to_triple(const IdTriple& ids) const;

  std::vector<Term> terms_;
  std::map<Term, TermId> ids_;
  std::set<IdTriple> spo_;
  std::set<IdTriple> pos_;  // stored as (p, o, s)
  std::set<IdTriple> osp_;  // stored as (o, s, p)
  std::set<std::string> functional_;
};

}  // namespace swarmkdn
