#include "swarmkdn/store.hpp"

#include <algorithm>
#include <limits>

#include "swarmkdn/error.hpp"

namespace swarmkdn {
namespace {

constexpr TripleStore::TermId kMaxId = std::numeric_limits<TripleStore::TermId>::max();

TripleStore::IdTriple to_pos(const TripleStore::IdTriple& t) { return {t[1], t[2], t[0]}; }
TripleStore::IdTriple to_osp(const TripleStore::IdTriple& t) { return {t[2], t[0], t[1]}; }
TripleStore::IdTriple from_pos(const TripleStore::IdTriple& t) { return {t[2], t[0], t[1]}; }
TripleStore::IdTriple from_osp(const TripleStore::IdTriple& t) { return {t[1], t[2], t[0]}; }

// Scans the index range sharing the bound prefix (a, then b) and filters on
// the remaining bound component.
template <typename Decode>
void scan(const std::set<TripleStore::IdTriple>& index, std::optional<TripleStore::TermId> a,
          std::optional<TripleStore::TermId> b, std::optional<TripleStore::TermId> c, Decode decode,
          std::vector<TripleStore::IdTriple>& out) {
  TripleStore::IdTriple lo{0, 0, 0};
  TripleStore::IdTriple hi{kMaxId, kMaxId, kMaxId};
  if (a) {
    lo[0] = hi[0] = *a;
    if (b) lo[1] = hi[1] = *b;
  }
  for (auto it = index.lower_bound(lo); it != index.end() && !(hi < *it); ++it) {
    const auto& k = *it;
    if (b && k[1] != *b) continue;
    if (c && k[2] != *c) continue;
    out.push_back(decode(k));
  }
}

}  // namespace

TripleStore::TripleStore() : functional_(rdf::functional_predicates()) {}

TripleStore::TermId TripleStore::intern(const Term& t) {
  auto it = ids_.find(t);
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<TermId>(terms_.size());
  terms_.push_back(t);
  ids_.emplace(t, id);
  return id;
}

std::optional<TripleStore::TermId> TripleStore::lookup(const Term& t) const {
  auto it = ids_.find(t);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Triple TripleStore::to_triple(const IdTriple& ids) const {
  return Triple{terms_[ids[0]], terms_[ids[1]], terms_[ids[2]]};
}

bool TripleStore::insert(const Triple& t) {
  const IdTriple ids{intern(t.subject), intern(t.predicate), intern(t.object)};
  if (!spo_.insert(ids).second) return false;
  pos_.insert(to_pos(ids));
  osp_.insert(to_osp(ids));
  return true;
}

bool TripleStore::remove(const Triple& t) {
  const auto s = lookup(t.subject);
  const auto p = lookup(t.predicate);
  const auto o = lookup(t.object);
  if (!s || !p || !o) return false;
  const IdTriple ids{*s, *p, *o};
  if (spo_.erase(ids) == 0) return false;
  pos_.erase(to_pos(ids));
  osp_.erase(to_osp(ids));
  return true;
}

bool TripleStore::contains(const Triple& t) const {
  const auto s = lookup(t.subject);
  const auto p = lookup(t.predicate);
  const auto o = lookup(t.object);
  return s && p && o && spo_.contains({*s, *p, *o});
}

std::optional<Term> TripleStore::upsert_functional(const Term& s, const Term& p, const Term& o) {
  if (!is_functional(p)) throw Error(ErrorCode::NotFunctional, "predicate " + rdf::serialize(p));
  std::optional<Term> old;
  std::vector<IdTriple> existing;
  const auto sid = lookup(s);
  const auto pid = lookup(p);
  if (sid && pid) match_ids(sid, pid, std::nullopt, existing);
  for (const auto& ids : existing) {
    Triple t = to_triple(ids);
    if (!old) old = t.object;
    remove(t);
  }
  insert(Triple{s, p, o});
  return old;
}

IndexKind TripleStore::choose_index(bool s_bound, bool p_bound, bool o_bound) {
  if (s_bound) return IndexKind::Spo;
  if (p_bound) return IndexKind::Pos;
  if (o_bound) return IndexKind::Osp;
  return IndexKind::Spo;
}

void TripleStore::match_ids(std::optional<TermId> s, std::optional<TermId> p, std::optional<TermId> o,
                            std::vector<IdTriple>& out) const {
  switch (choose_index(s.has_value(), p.has_value(), o.has_value())) {
    case IndexKind::Spo:
      scan(spo_, s, p, o, [](const IdTriple& k) { return k; }, out);
      break;
    case IndexKind::Pos:
      scan(pos_, p, o, s, from_pos, out);
      break;
    case IndexKind::Osp:
      scan(osp_, o, s, p, from_osp, out);
      break;
  }
}

std::vector<Triple> TripleStore::match_pattern(const TriplePattern& pattern) const {
  std::optional<TermId> ids[3];
  const PatternTerm* parts[3] = {&pattern.subject, &pattern.predicate, &pattern.object};
  for (int i = 0; i < 3; ++i) {
    if (const auto* t = std::get_if<Term>(parts[i])) {
      ids[i] = lookup(*t);
      if (!ids[i]) return {};
    }
  }
  std::vector<IdTriple> hits;
  match_ids(ids[0], ids[1], ids[2], hits);
  std::vector<Triple> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(to_triple(h));
  return out;
}

std::vector<Triple> TripleStore::triples() const {
  std::vector<Triple> out;
  out.reserve(spo_.size());
  for (const auto& ids : spo_) out.push_back(to_triple(ids));
  std::sort(out.begin(), out.end());
  return out;
}

bool TripleStore::indexes_coherent() const {
  if (pos_.size() != spo_.size() || osp_.size() != spo_.size()) return false;
  for (const auto& k : pos_) {
    if (!spo_.contains(from_pos(k))) return false;
  }
  for (const auto& k : osp_) {
    if (!spo_.contains(from_osp(k))) return false;
  }
  return true;
}

std::string TripleStore::export_ntriples() const { return rdf::to_ntriples(triples()); }

std::size_t TripleStore::import_ntriples(std::string_view text) {
  std::size_t added = 0;
  for (const auto& t : rdf::parse_ntriples(text)) added += insert(t) ? 1 : 0;
  return added;
}

bool TripleStore::operator==(const TripleStore& other) const {
  return size() == other.size() && triples() == other.triples();
}

}  // namespace swarmkdn
