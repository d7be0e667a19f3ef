#include "doctest.h"
#include "support.hpp"

#include "swarmkdn/rdfizer.hpp"

using namespace swarmkdn;
using testsupport::Rng;
using testsupport::thrown_code;
namespace sn = rdf::pred;

namespace {

Triple tr(const std::string& s, const std::string& p, Term o) { return {Term::iri(s), Term::iri(p), std::move(o)}; }

std::vector<Triple> scan(const std::vector<Triple>& all, const TriplePattern& p) {
  auto ok = [](const PatternTerm& pt, const Term& v) {
    const auto* t = std::get_if<Term>(&pt);
    return !t || *t == v;
  };
  std::vector<Triple> out;
  for (const auto& t : all) {
    if (ok(p.subject, t.subject) && ok(p.predicate, t.predicate) && ok(p.object, t.object)) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TripleStore with_functional() {
  TripleStore s;
  s.set_functional_predicates(rdf::functional_predicates());
  return s;
}

}  // namespace

TEST_CASE("insert and remove") {
  TripleStore s;
  const auto t = tr("urn:swarm-net:host:h1", sn::hasIp, Term::string("10.0.0.1"));
  CHECK(s.empty());
  CHECK(s.insert(t));
  CHECK(s.size() == 1);
  CHECK_FALSE(s.insert(t));
  CHECK(s.size() == 1);
  CHECK(s.contains(t));

  const TripleStore before = s;
  const auto u = tr("urn:swarm-net:host:h2", sn::hasIp, Term::string("10.0.0.2"));
  CHECK(s.insert(u));
  CHECK(s.remove(u));
  CHECK(s == before);
  CHECK_FALSE(s.remove(u));
  CHECK(s.remove(t));
  CHECK_FALSE(s.contains(t));
  CHECK(s.empty());
  CHECK(s.indexes_coherent());
}

TEST_CASE("upsert_functional") {
  auto s = with_functional();
  const auto h = Term::iri("urn:swarm-net:host:h1");
  const auto cpu = Term::iri(sn::cpuLoad);
  CHECK_FALSE(s.upsert_functional(h, cpu, Term::integer(40)).has_value());
  CHECK(s.contains({h, cpu, Term::integer(40)}));
  CHECK(s.upsert_functional(h, cpu, Term::integer(55)) == Term::integer(40));
  CHECK(s.contains({h, cpu, Term::integer(55)}));
  CHECK_FALSE(s.contains({h, cpu, Term::integer(40)}));
  CHECK(s.size() == 1);
  CHECK(thrown_code([&] { s.upsert_functional(h, Term::iri(sn::memberOf), Term::iri("urn:swarm-net:group:a")); }) ==
        ErrorCode::NotFunctional);
  // A value that was inserted twice by plain insert collapses to one.
  s.insert({h, Term::iri(sn::locX), Term::integer(1)});
  s.insert({h, Term::iri(sn::locX), Term::integer(2)});
  s.upsert_functional(h, Term::iri(sn::locX), Term::integer(3));
  CHECK(s.match_pattern({h, Term::iri(sn::locX), Variable{"o"}}).size() == 1);
}

TEST_CASE("10k random inserts agree with a reference set") {
  Rng rng(99);
  const auto triples = testsupport::random_store_triples(rng, 10000);
  TripleStore s;
  std::set<Triple> ref;
  for (const auto& t : triples) CHECK(s.insert(t) == ref.insert(t).second);
  CHECK(s.size() == ref.size());
  CHECK(s.indexes_coherent());
  const auto all = s.triples();
  CHECK(std::vector<Triple>(ref.begin(), ref.end()) == all);
}

TEST_CASE("indexes stay coherent under random operation sequences") {
  Rng rng(7);
  for (int round = 0; round < 40; ++round) {
    const auto pool = testsupport::random_store_triples(rng, 60);
    auto s = with_functional();
    std::set<Triple> ref;
    for (int op = 0; op < 300; ++op) {
      const auto& t = pool[testsupport::uniform(rng, 0, pool.size() - 1)];
      const auto kind = testsupport::uniform(rng, 0, 2);
      if (kind == 0) {
        CHECK(s.insert(t) == ref.insert(t).second);
      } else if (kind == 1) {
        CHECK(s.remove(t) == (ref.erase(t) == 1));
      } else if (s.is_functional(t.predicate)) {
        s.upsert_functional(t.subject, t.predicate, t.object);
        std::erase_if(ref, [&](const Triple& r) { return r.subject == t.subject && r.predicate == t.predicate; });
        ref.insert(t);
      }
    }
    CHECK(s.indexes_coherent());
    CHECK(s.triples() == std::vector<Triple>(ref.begin(), ref.end()));
  }
}

TEST_CASE("match_pattern against a linear scan") {
  const auto topo = load_topology(testsupport::data_path("triangle.json"));
  TripleStore s;
  for (const auto& t : rdfizer::rdfize_topology(topo)) s.insert(t);
  const auto red = s.match_pattern({Variable{"s"}, Term::iri(sn::memberOf), Term::iri(rdfizer::group_iri("red"))});
  CHECK(red.size() == 2);
  const auto one = tr(rdfizer::host_iri("h3"), sn::memberOf, Term::iri(rdfizer::group_iri("blue")));
  CHECK(s.match_pattern({one.subject, one.predicate, one.object}) == std::vector<Triple>{one});
  CHECK(s.match_pattern({Variable{"s"}, Term::iri(sn::memberOf), Term::iri(rdfizer::group_iri("green"))}).empty());
  CHECK(s.match_pattern({Term::iri("urn:swarm-net:nothing"), Variable{"p"}, Variable{"o"}}).empty());

  Rng rng(3);
  const auto triples = testsupport::random_store_triples(rng, 800);
  TripleStore big;
  for (const auto& t : triples) big.insert(t);
  const auto all = big.triples();
  for (int i = 0; i < 500; ++i) {
    const auto& src = triples[testsupport::uniform(rng, 0, triples.size() - 1)];
    TriplePattern p{Variable{"s"}, Variable{"p"}, Variable{"o"}};
    if (testsupport::coin(rng)) p.subject = src.subject;
    if (testsupport::coin(rng)) p.predicate = src.predicate;
    if (testsupport::coin(rng)) p.object = src.object;
    auto got = big.match_pattern(p);
    std::sort(got.begin(), got.end());
    CHECK(got == scan(all, p));
  }
}

TEST_CASE("index choice by bound positions") {
  CHECK(TripleStore::choose_index(true, false, false) == IndexKind::Spo);
  CHECK(TripleStore::choose_index(true, true, true) == IndexKind::Spo);
  CHECK(TripleStore::choose_index(true, false, true) == IndexKind::Spo);
  CHECK(TripleStore::choose_index(false, true, false) == IndexKind::Pos);
  CHECK(TripleStore::choose_index(false, true, true) == IndexKind::Pos);
  CHECK(TripleStore::choose_index(false, false, true) == IndexKind::Osp);
  CHECK(TripleStore::choose_index(false, false, false) == IndexKind::Spo);
}

TEST_CASE("N-Triples export and import") {
  TripleStore empty;
  CHECK(empty.export_ntriples().empty());

  const auto topo = load_topology(testsupport::data_path("triangle.json"));
  TripleStore s;
  for (const auto& t : rdfizer::rdfize_topology(topo)) s.insert(t);
  const auto doc = s.export_ntriples();
  CHECK(doc == rdf::to_ntriples(rdfizer::rdfize_topology(topo)));

  TripleStore back;
  CHECK(back.import_ntriples(doc) == s.size());
  CHECK(back == s);
  CHECK(back.export_ntriples() == doc);

  Rng rng(12);
  TripleStore r;
  for (const auto& t : testsupport::random_store_triples(rng, 2000)) r.insert(t);
  TripleStore r2;
  r2.import_ntriples(r.export_ntriples());
  CHECK(r2 == r);
  CHECK(r2.export_ntriples() == r.export_ntriples());

  TripleStore bad;
  CHECK(thrown_code([&] { bad.import_ntriples("<urn:a> <urn:b> .\n"); }) == ErrorCode::ParseError);
}
