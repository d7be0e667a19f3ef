#include "swarmkdn/sparql.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <set>

#include "swarmkdn/error.hpp"

namespace swarmkdn::sparql {
namespace {

enum class Tok {
  Iri,       // <...>
  PName,     // prefix:local (text holds both parts)
  Var,       // ?name
  String,    // "..."
  Integer,   // 42, -7
  Word,      // bare identifier: keywords, a, true, false
  LBrace,
  RBrace,
  LParen,
  RParen,
  Dot,
  Star,
  Op,        // = != < <= > >=
  Caret2,    // ^^
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (c == '<') {
        // '<' opens an IRI unless it is a comparison operator.
        const auto close = src_.find_first_of(">\n ", pos_ + 1);
        if (close != std::string_view::npos && src_[close] == '>' && close > pos_ + 1 &&
            src_[pos_ + 1] != '=') {
          t.kind = Tok::Iri;
          t.text = std::string(src_.substr(pos_ + 1, close - pos_ - 1));
          advance(close + 1 - pos_);
        } else {
          t.kind = Tok::Op;
          t.text = (peek(1) == '=') ? "<=" : "<";
          advance(t.text.size());
        }
      } else if (c == '>') {
        t.kind = Tok::Op;
        t.text = (peek(1) == '=') ? ">=" : ">";
        advance(t.text.size());
      } else if (c == '=') {
        t.kind = Tok::Op;
        t.text = "=";
        advance(1);
      } else if (c == '!') {
        if (peek(1) != '=') fail(t, "expected '!='");
        t.kind = Tok::Op;
        t.text = "!=";
        advance(2);
      } else if (c == '?' || c == '$') {
        advance(1);
        t.kind = Tok::Var;
        t.text = take_name();
        if (t.text.empty()) fail(t, "empty variable name");
      } else if (c == '"') {
        t.kind = Tok::String;
        t.text = take_string(t);
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        t.kind = Tok::Integer;
        std::size_t n = 1;
        while (std::isdigit(static_cast<unsigned char>(peek(n)))) ++n;
        t.text = std::string(src_.substr(pos_, n));
        advance(n);
      } else if (c == '^' && peek(1) == '^') {
        t.kind = Tok::Caret2;
        advance(2);
      } else if (c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == '*') {
        t.kind = c == '{' ? Tok::LBrace
                 : c == '}' ? Tok::RBrace
                 : c == '(' ? Tok::LParen
                 : c == ')' ? Tok::RParen
                 : c == '.' ? Tok::Dot
                            : Tok::Star;
        advance(1);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == ':') {
        std::string word = take_name();
        if (peek(0) == ':') {
          advance(1);
          t.kind = Tok::PName;
          t.text = word + ":" + take_local();
        } else {
          t.kind = Tok::Word;
          t.text = word;
        }
      } else {
        fail(t, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& what) {
    throw SyntaxError(ErrorCode::SyntaxError, at.line, at.column, what);
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string take_name() {
    std::size_t n = 0;
    while (std::isalnum(static_cast<unsigned char>(peek(n))) || peek(n) == '_' || peek(n) == '-') ++n;
    std::string out(src_.substr(pos_, n));
    advance(n);
    return out;
  }

  // Local names may contain '.', but not as their final character.
  std::string take_local() {
    std::size_t n = 0;
    for (;;) {
      const char c = peek(n);
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':') {
        ++n;
      } else if (c == '.' && (std::isalnum(static_cast<unsigned char>(peek(n + 1))) || peek(n + 1) == '_')) {
        ++n;
      } else {
        break;
      }
    }
    std::string out(src_.substr(pos_, n));
    advance(n);
    return out;
  }

  std::string take_string(const Token& at) {
    advance(1);
    std::string out;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail(at, "unterminated string");
      const char c = src_[pos_];
      advance(1);
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= src_.size()) fail(at, "dangling escape");
        const char e = src_[pos_];
        advance(1);
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default: fail(at, "unsupported escape");
        }
      } else {
        out.push_back(c);
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool keyword_is(const Token& t, std::string_view kw) {
  if (t.kind != Tok::Word || t.text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
  }
  return true;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SelectQuery run() {
    SelectQuery q;
    q.prefixes = builtin_prefixes();
    while (keyword_is(cur(), "PREFIX")) {
      next();
      const Token& name = cur();
      if (name.kind != Tok::PName || name.text.back() != ':') fail(name, "expected 'prefix:' after PREFIX");
      next();
      const Token& iri = cur();
      if (iri.kind != Tok::Iri) fail(iri, "expected <iri> in PREFIX");
      q.prefixes[name.text.substr(0, name.text.size() - 1)] = iri.text;
      next();
    }
    prefixes_ = &q.prefixes;

    if (!keyword_is(cur(), "SELECT")) fail(cur(), "expected SELECT");
    next();
    if (keyword_is(cur(), "DISTINCT")) {
      q.distinct = true;
      next();
    }
    std::vector<Token> projected;
    if (cur().kind == Tok::Star) {
      q.select_all = true;
      next();
    } else {
      while (cur().kind == Tok::Var) {
        projected.push_back(cur());
        next();
      }
      if (projected.empty()) fail(cur(), "expected '*' or variables after SELECT");
    }

    if (keyword_is(cur(), "WHERE")) next();
    expect(Tok::LBrace, "'{'");
    std::vector<Token> filter_vars;
    bool need_separator = false;
    while (cur().kind != Tok::RBrace) {
      if (cur().kind == Tok::End) fail(cur(), "unterminated group pattern");
      if (cur().kind == Tok::Dot) {
        need_separator = false;
        next();
        continue;
      }
      if (keyword_is(cur(), "FILTER")) {
        next();
        q.filters.push_back(parse_filter(filter_vars));
        need_separator = false;
        continue;
      }
      if (need_separator) fail(cur(), "expected '.' between triple patterns");
      TriplePattern tp;
      tp.subject = parse_term(false);
      tp.predicate = parse_term(true);
      tp.object = parse_term(false);
      q.patterns.push_back(std::move(tp));
      need_separator = true;
    }
    next();

    if (keyword_is(cur(), "LIMIT")) {
      next();
      if (cur().kind != Tok::Integer || cur().text[0] == '-' || cur().text[0] == '+') {
        fail(cur(), "expected a non-negative integer after LIMIT");
      }
      std::uint32_t n = 0;
      auto [p, ec] = std::from_chars(cur().text.data(), cur().text.data() + cur().text.size(), n);
      if (ec != std::errc{}) fail(cur(), "LIMIT out of range");
      q.limit = n;
      next();
    }
    if (cur().kind != Tok::End) fail(cur(), "unexpected trailing input");

    // Projection and filter variables must be bound by some pattern.
    std::vector<std::string> pattern_vars;
    for (const auto& tp : q.patterns) {
      for (const auto* part : {&tp.subject, &tp.predicate, &tp.object}) {
        if (const auto* v = std::get_if<Variable>(part)) {
          if (std::find(pattern_vars.begin(), pattern_vars.end(), v->name) == pattern_vars.end()) {
            pattern_vars.push_back(v->name);
          }
        }
      }
    }
    auto check_bound = [&](const Token& t) {
      if (std::find(pattern_vars.begin(), pattern_vars.end(), t.text) == pattern_vars.end()) {
        throw SyntaxError(ErrorCode::UnboundVariable, t.line, t.column,
                          "variable ?" + t.text + " does not appear in any triple pattern");
      }
    };
    for (const auto& t : projected) check_bound(t);
    for (const auto& t : filter_vars) check_bound(t);

    if (q.select_all) {
      for (const auto& name : pattern_vars) q.variables.push_back(Variable{name});
    } else {
      for (const auto& t : projected) q.variables.push_back(Variable{t.text});
    }
    return q;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  void next() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  [[noreturn]] void fail(const Token& t, const std::string& what) {
    throw SyntaxError(ErrorCode::SyntaxError, t.line, t.column, what);
  }
  void expect(Tok kind, const char* what) {
    if (cur().kind != kind) fail(cur(), std::string("expected ") + what);
    next();
  }

  std::string expand(const Token& t) {
    const auto colon = t.text.find(':');
    const auto prefix = t.text.substr(0, colon);
    auto it = prefixes_->find(prefix);
    if (it == prefixes_->end()) {
      throw SyntaxError(ErrorCode::UnknownPrefix, t.line, t.column, "undeclared prefix '" + prefix + ":'");
    }
    return it->second + t.text.substr(colon + 1);
  }

  PatternTerm parse_term(bool predicate_position) {
    const Token t = cur();
    next();
    switch (t.kind) {
      case Tok::Var: return Variable{t.text};
      case Tok::Iri: return check_iri(t, t.text);
      case Tok::PName: return check_iri(t, expand(t));
      case Tok::Integer: return integer(t);
      case Tok::String: {
        if (cur().kind != Tok::Caret2) return Term::string(t.text);
        next();
        const Token dt = cur();
        next();
        std::string dt_iri;
        if (dt.kind == Tok::Iri) {
          dt_iri = dt.text;
        } else if (dt.kind == Tok::PName) {
          dt_iri = expand(dt);
        } else {
          fail(dt, "expected datatype IRI after ^^");
        }
        Term lit{Term::Kind::String, t.text};
        if (dt_iri == rdf::kXsdInteger) {
          lit.kind = Term::Kind::Integer;
        } else if (dt_iri == rdf::kXsdBoolean) {
          lit.kind = Term::Kind::Boolean;
        } else if (dt_iri != "http://www.w3.org/2001/XMLSchema#string") {
          fail(dt, "unsupported datatype");
        }
        if (!rdf::is_valid(lit)) fail(t, "invalid lexical form for datatype");
        return lit;
      }
      case Tok::Word:
        if (predicate_position && t.text == "a") return Term::iri(std::string(rdf::kRdfType));
        if (t.text == "true" || t.text == "false") return Term::boolean(t.text == "true");
        fail(t, "unexpected word '" + t.text + "'");
      default:
        fail(t, "expected a term");
    }
  }

  Term check_iri(const Token& t, std::string iri) {
    Term term = Term::iri(std::move(iri));
    if (!rdf::is_valid(term)) fail(t, "IRI must be absolute");
    return term;
  }

  Term integer(const Token& t) {
    std::int64_t v = 0;
    const char* b = t.text.data() + (t.text[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, t.text.data() + t.text.size(), v);
    if (ec != std::errc{}) fail(t, "integer out of range");
    return Term::integer(v);
  }

  Comparison parse_filter(std::vector<Token>& filter_vars) {
    expect(Tok::LParen, "'(' after FILTER");
    Comparison c;
    if (cur().kind != Tok::Var) fail(cur(), "FILTER must start with a variable");
    filter_vars.push_back(cur());
    c.lhs = Variable{cur().text};
    next();
    if (cur().kind != Tok::Op) fail(cur(), "expected comparison operator");
    const auto& op = cur().text;
    c.op = op == "=" ? CompareOp::Eq
           : op == "!=" ? CompareOp::Ne
           : op == "<" ? CompareOp::Lt
           : op == "<=" ? CompareOp::Le
           : op == ">" ? CompareOp::Gt
                       : CompareOp::Ge;
    next();
    if (cur().kind == Tok::Var) filter_vars.push_back(cur());
    c.rhs = parse_term(false);
    expect(Tok::RParen, "')' closing FILTER");
    return c;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const std::map<std::string, std::string>* prefixes_ = nullptr;
};

bool holds(int cmp, CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return cmp == 0;
    case CompareOp::Ne: return cmp != 0;
    case CompareOp::Lt: return cmp < 0;
    case CompareOp::Le: return cmp <= 0;
    case CompareOp::Gt: return cmp > 0;
    case CompareOp::Ge: return cmp >= 0;
  }
  return false;
}

constexpr TripleStore::TermId kUnbound = std::numeric_limits<TripleStore::TermId>::max();

}  // namespace

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

const std::map<std::string, std::string>& builtin_prefixes() {
  static const std::map<std::string, std::string> kPrefixes = {
      {"sn", std::string(rdf::kNs)},
      {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
      {"xsd", "http://www.w3.org/2001/XMLSchema#"},
      {"switch", std::string(rdf::kNs) + "switch:"},
      {"host", std::string(rdf::kNs) + "host:"},
      {"group", std::string(rdf::kNs) + "group:"},
      {"link", std::string(rdf::kNs) + "link:"},
      {"flow", std::string(rdf::kNs) + "flow:"},
      {"report", std::string(rdf::kNs) + "report:"},
      {"hop", std::string(rdf::kNs) + "hop:"},
  };
  return kPrefixes;
}

SelectQuery parse_query(std::string_view text) { return Parser(Lexer(text).run()).run(); }

bool compare_terms(const Term& lhs, CompareOp op, const Term& rhs) {
  if (lhs.kind != rhs.kind) return false;
  if (lhs.kind == Term::Kind::Integer) {
    const auto a = std::stoll(lhs.value);
    const auto b = std::stoll(rhs.value);
    return holds(a < b ? -1 : (a > b ? 1 : 0), op);
  }
  return holds(rdf::serialize(lhs).compare(rdf::serialize(rhs)), op);
}

ResultTable evaluate(const SelectQuery& q, const TripleStore& store) {
  // Slot per distinct variable, in order of first appearance in the BGP.
  std::map<std::string, std::size_t> slot;
  for (const auto& tp : q.patterns) {
    for (const auto* part : {&tp.subject, &tp.predicate, &tp.object}) {
      if (const auto* v = std::get_if<Variable>(part)) slot.try_emplace(v->name, slot.size());
    }
  }

  using Row = std::vector<TripleStore::TermId>;
  std::vector<Row> rows{Row(slot.size(), kUnbound)};
  std::vector<TripleStore::IdTriple> hits;
  for (const auto& tp : q.patterns) {
    const PatternTerm* parts[3] = {&tp.subject, &tp.predicate, &tp.object};
    std::optional<TripleStore::TermId> constants[3];
    std::optional<std::size_t> slots[3];
    bool impossible = false;
    for (int i = 0; i < 3; ++i) {
      if (const auto* t = std::get_if<Term>(parts[i])) {
        constants[i] = store.lookup(*t);
        if (!constants[i]) impossible = true;
      } else {
        slots[i] = slot.at(std::get<Variable>(*parts[i]).name);
      }
    }
    if (impossible) {
      rows.clear();
      break;
    }
    std::vector<Row> next;
    for (const auto& row : rows) {
      std::optional<TripleStore::TermId> bound[3];
      for (int i = 0; i < 3; ++i) {
        if (constants[i]) {
          bound[i] = constants[i];
        } else if (row[*slots[i]] != kUnbound) {
          bound[i] = row[*slots[i]];
        }
      }
      hits.clear();
      store.match_ids(bound[0], bound[1], bound[2], hits);
      for (const auto& hit : hits) {
        Row extended = row;
        bool consistent = true;
        for (int i = 0; i < 3 && consistent; ++i) {
          if (!slots[i]) continue;
          auto& cell = extended[*slots[i]];
          if (cell == kUnbound) {
            cell = hit[i];
          } else if (cell != hit[i]) {
            consistent = false;  // repeated variable inside one pattern
          }
        }
        if (consistent) next.push_back(std::move(extended));
      }
    }
    rows = std::move(next);
    if (rows.empty()) break;
  }

  ResultTable out;
  for (const auto& v : q.variables) out.header.push_back(v.name);

  std::vector<std::pair<std::vector<std::string>, std::vector<Term>>> keyed;
  for (const auto& row : rows) {
    bool keep = true;
    for (const auto& f : q.filters) {
      const Term& lhs = store.term(row[slot.at(f.lhs.name)]);
      const Term& rhs = std::holds_alternative<Variable>(f.rhs)
                            ? store.term(row[slot.at(std::get<Variable>(f.rhs).name)])
                            : std::get<Term>(f.rhs);
      if (!compare_terms(lhs, f.op, rhs)) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    std::vector<Term> projected;
    std::vector<std::string> key;
    for (const auto& v : q.variables) {
      projected.push_back(store.term(row[slot.at(v.name)]));
      key.push_back(rdf::serialize(projected.back()));
    }
    keyed.emplace_back(std::move(key), std::move(projected));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (q.distinct) {
    keyed.erase(std::unique(keyed.begin(), keyed.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                keyed.end());
  }
  if (q.limit && keyed.size() > *q.limit) keyed.resize(*q.limit);
  out.rows.reserve(keyed.size());
  for (auto& [_, r] : keyed) out.rows.push_back(std::move(r));
  return out;
}

std::string display(const Term& t) { return t.value; }

std::string format_table(const ResultTable& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size() + 1;
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display(row[c]).size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      out += cells[c];
      if (c + 1 < cells.size()) out.append(width[c] - cells[c].size(), ' ');
    }
    return out + "\n";
  };
  std::vector<std::string> head;
  for (const auto& h : t.header) head.push_back("?" + h);
  std::string out = line(head);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  out += line(rule);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& term : row) cells.push_back(display(term));
    out += line(cells);
  }
  out += "(" + std::to_string(t.rows.size()) + (t.rows.size() == 1 ? " row)\n" : " rows)\n");
  return out;
}

std::string format_csv(const ResultTable& t) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c) out += ',';
    out += field(t.header[c]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += field(display(row[c]));
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace swarmkdn::sparql
