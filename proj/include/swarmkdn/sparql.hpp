#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmkdn/store.hpp"

namespace swarmkdn::sparql {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);

struct Comparison {
  Variable lhs;
  CompareOp op = CompareOp::Eq;
  PatternTerm rhs;
  bool operator==(const Comparison&) const = default;
};

/// Conjunctive SELECT query: BGP, FILTER comparisons, DISTINCT, LIMIT.
struct SelectQuery {
  std::map<std::string, std::string> prefixes;
  bool distinct = false;
  bool select_all = false;
  std::vector<Variable> variables;  // projection (all pattern variables for SELECT *)
  std::vector<TriplePattern> patterns;
  std::vector<Comparison> filters;
  std::optional<std::uint32_t> limit;
};

struct ResultTable {
  std::vector<std::string> header;  // variable names without '?'
  std::vector<std::vector<Term>> rows;
  bool operator==(const ResultTable&) const = default;
};

/// Prefixes available without a PREFIX line: sn, rdf, xsd and one per IRI
/// kind (switch, host, group, link, flow, report, hop).
const std::map<std::string, std::string>& builtin_prefixes();

/// Throws SyntaxError (codes SyntaxError, UnknownPrefix, UnboundVariable)
/// carrying line and column.
SelectQuery parse_query(std::string_view text);

/// Comparison rule: numeric when both terms are integers, lexicographic on
/// the N-Triples serialization when both have the same kind, false when the
/// kinds differ.
bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs);

/// Iterative index join in pattern order, then filters, projection,
/// DISTINCT, sorting by serialized terms and LIMIT.
ResultTable evaluate(const SelectQuery& q, const TripleStore& store);

/// Aligned text table and RFC 4180 CSV renderings.
std::string format_table(const ResultTable& t);
std::string format_csv(const ResultTable& t);

/// Short cell text: IRIs and literal lexical forms without N-Triples syntax.
std::string display(const Term& t);

}  // namespace swarmkdn::sparql
