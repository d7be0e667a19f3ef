#include "swarmkdn/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "swarmkdn/log.hpp"
#include "swarmkdn/sparql.hpp"

namespace swarmkdn {
namespace {

class LineParser {
 public:
  LineParser(std::string_view source, std::size_t line, const Topology& topo)
      : source_(source), line_(line), topo_(topo) {}

  [[noreturn]] void fail(ErrorCode code, const std::string& msg) const {
    throw Error(code, std::string(source_) + ":" + std::to_string(line_) + ": " + msg);
  }

  void load_args(const std::vector<std::string>& tokens, std::initializer_list<std::string_view> allowed) {
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorCode::ParseError, "expected key=value, got '" + tokens[i] + "'");
      auto key = tokens[i].substr(0, eq);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(ErrorCode::ParseError, "unknown argument '" + key + "'");
      }
      if (!args_.emplace(key, tokens[i].substr(eq + 1)).second) {
        fail(ErrorCode::ParseError, "duplicate argument '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return args_.contains(key); }

  const std::string& text(const std::string& key) const {
    auto it = args_.find(key);
    if (it == args_.end()) fail(ErrorCode::ParseError, "missing argument '" + key + "'");
    return it->second;
  }

  std::uint64_t number(const std::string& key, std::uint64_t max = UINT64_MAX) const {
    const auto& v = text(key);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) {
      fail(ErrorCode::ParseError, "argument '" + key + "' is not a number: '" + v + "'");
    }
    if (out > max) fail(ErrorCode::ParseError, "argument '" + key + "' out of range");
    return out;
  }

  std::uint64_t number_or(const std::string& key, std::uint64_t fallback, std::uint64_t max = UINT64_MAX) const {
    return has(key) ? number(key, max) : fallback;
  }

  bool flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = text(key);
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    fail(ErrorCode::ParseError, "argument '" + key + "' must be 0/1/true/false");
  }

  std::string host(const std::string& key) const {
    const auto& id = text(key);
    if (topo_.find_host(id) == nullptr) fail(ErrorCode::UnknownEntity, "unknown host '" + id + "'");
    return id;
  }

  Ipv4Address address(const std::string& key) const {
    const auto& v = text(key);
    if (const auto* h = topo_.find_host(v)) return h->ip;
    try {
      return parse_ipv4(v);
    } catch (const Error&) {
      fail(ErrorCode::UnknownEntity, "'" + v + "' is neither a host nor an IPv4 address");
    }
  }

  std::uint32_t switch_id(const std::string& key) const {
    const auto id = static_cast<std::uint32_t>(number(key, UINT32_MAX));
    if (topo_.find_switch(id) == nullptr) fail(ErrorCode::UnknownEntity, "unknown switch " + std::to_string(id));
    return id;
  }

  std::size_t link(const std::string& a_key, const std::string& b_key) const {
    Endpoint a;
    Endpoint b;
    try {
      a = parse_endpoint(text(a_key));
      b = parse_endpoint(text(b_key));
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, e.what());
    }
    for (std::size_t i = 0; i < topo_.links.size(); ++i) {
      const auto& l = topo_.links[i];
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return i;
    }
    fail(ErrorCode::UnknownEntity, "no link " + text(a_key) + " <-> " + text(b_key));
  }

 private:
  std::string_view source_;
  std::size_t line_;
  const Topology& topo_;
  std::map<std::string, std::string> args_;
};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string join(const std::set<std::string>& items) {
  std::string s = "{";
  bool first = true;
  for (const auto& i : items) {
    if (!first) s += ',';
    s += i;
    first = false;
  }
  return s + "}";
}

Bytes as_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

}  // namespace

bool RunResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed(); });
}

Scenario parse_scenario(std::string_view text, const Topology& topo, std::string_view source) {
  Scenario sc;
  sc.source = std::string(source);
  std::uint64_t last_time = 0;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;
    const auto tokens = split_ws(raw);
    const auto& cmd = tokens[0];
    LineParser p(source, line_no, topo);

    auto advance = [&](std::uint64_t t) {
      if (t < last_time) {
        p.fail(ErrorCode::ParseError, "time " + std::to_string(t) + " is before " + std::to_string(last_time));
      }
      last_time = t;
    };

    Directive d;
    d.line = line_no;
    if (cmd == "inject") {
      p.load_args(tokens, {"host", "dst", "port", "rtps", "int", "payload", "at"});
      InjectDirective x;
      x.host = p.host("host");
      x.dst_ip = p.address("dst");
      x.port = static_cast<std::uint16_t>(p.number_or("port", 7400, 0xFFFF));
      x.rtps = p.flag_or("rtps", true);
      x.int_enabled = p.flag_or("int", true);
      x.payload = p.has("payload") ? p.text("payload") : "";
      x.at = p.number("at");
      advance(x.at);
      d.body = x;
    } else if (cmd == "inject_random") {
      p.load_args(tokens, {"count", "from", "to", "port", "rtps", "int"});
      InjectRandomDirective x;
      x.count = static_cast<std::uint32_t>(p.number("count", 1'000'000));
      x.from = p.number("from");
      x.to = p.number("to");
      if (x.to < x.from) p.fail(ErrorCode::ParseError, "'to' is before 'from'");
      x.port = static_cast<std::uint16_t>(p.number_or("port", 7400, 0xFFFF));
      x.rtps = p.flag_or("rtps", true);
      x.int_enabled = p.flag_or("int", true);
      advance(x.from);
      advance(x.to);
      d.body = x;
    } else if (cmd == "set_cpu") {
      p.load_args(tokens, {"host", "pct", "at"});
      SetCpuDirective x;
      x.host = p.host("host");
      x.pct = static_cast<std::uint8_t>(p.number("pct", 100));
      x.at = p.number("at");
      advance(x.at);
      d.body = x;
    } else if (cmd == "set_link_latency") {
      p.load_args(tokens, {"a", "b", "us", "at"});
      SetLinkLatencyDirective x;
      x.link_index = p.link("a", "b");
      x.latency_us = static_cast<std::uint32_t>(p.number("us", UINT32_MAX));
      x.at = p.number("at");
      advance(x.at);
      d.body = x;
    } else if (cmd == "set_proc_latency") {
      p.load_args(tokens, {"switch", "us", "at"});
      SetProcLatencyDirective x;
      x.switch_id = p.switch_id("switch");
      x.latency_us = static_cast<std::uint32_t>(p.number("us", UINT32_MAX));
      if (x.latency_us == 0) p.fail(ErrorCode::ParseError, "proc latency must be positive");
      x.at = p.number("at");
      advance(x.at);
      d.body = x;
    } else if (cmd == "route") {
      p.load_args(tokens, {"src", "dst", "at"});
      RouteDirective x;
      x.src = p.host("src");
      x.dst = p.host("dst");
      x.at = p.number("at");
      advance(x.at);
      d.body = x;
    } else if (cmd == "run_until") {
      p.load_args(tokens, {"t"});
      RunUntilDirective x{p.number("t")};
      advance(x.t);
      d.body = x;
    } else if (cmd == "query") {
      QueryDirective x;
      x.text = raw.substr(raw.find("query", first) + 5);
      x.text.erase(0, x.text.find_first_not_of(" \t"));
      try {
        (void)sparql::parse_query(x.text);
      } catch (const SyntaxError& e) {
        p.fail(ErrorCode::ParseError, std::string("query: ") + e.what());
      } catch (const Error& e) {
        p.fail(ErrorCode::ParseError, std::string("query: ") + e.what());
      }
      d.body = x;
    } else if (cmd == "expect_delivery") {
      p.load_args(tokens, {"hosts"});
      ExpectDeliveryDirective x;
      std::string list = p.text("hosts");
      std::istringstream items(list);
      std::string id;
      while (std::getline(items, id, ',')) {
        if (id.empty()) continue;
        if (topo.find_host(id) == nullptr) p.fail(ErrorCode::UnknownEntity, "unknown host '" + id + "'");
        x.hosts.insert(id);
      }
      d.body = x;
    } else if (cmd == "export") {
      p.load_args(tokens, {"path"});
      d.body = ExportDirective{p.text("path")};
    } else {
      p.fail(ErrorCode::ParseError, "unknown directive '" + cmd + "'");
    }
    sc.directives.push_back(std::move(d));
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, const Topology& topo) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), topo, path.string());
}

RunResult run_scenario(Runtime& rt, const Scenario& scenario, const RunOptions& options) {
  RunResult result;
  std::mt19937_64 rng(options.seed);
  std::ostringstream queries;
  std::ostringstream exports;
  std::size_t delivery_mark = 0;
  Network& net = rt.network();
  const Topology& topo = net.topology();

  for (const auto& d : scenario.directives) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, InjectDirective>) {
            rt.run_before(x.at);
            net.inject_from_host(x.host, x.dst_ip, x.port, x.rtps, x.int_enabled, as_bytes(x.payload));
          } else if constexpr (std::is_same_v<T, InjectRandomDirective>) {
            struct Shot {
              std::uint64_t at;
              std::size_t src;
              std::size_t dst;
            };
            const std::size_t n = topo.hosts.size();
            std::vector<Shot> shots;
            for (std::uint32_t i = 0; i < x.count; ++i) {
              Shot s{};
              s.at = x.from + rng() % (x.to - x.from + 1);
              s.src = rng() % n;
              s.dst = n > 1 ? (s.src + 1 + rng() % (n - 1)) % n : s.src;
              shots.push_back(s);
            }
            std::stable_sort(shots.begin(), shots.end(), [](const Shot& a, const Shot& b) { return a.at < b.at; });
            for (std::size_t i = 0; i < shots.size(); ++i) {
              rt.run_before(shots[i].at);
              net.inject_from_host(topo.hosts[shots[i].src].id, topo.hosts[shots[i].dst].ip, x.port, x.rtps,
                                   x.int_enabled, as_bytes("r" + std::to_string(i)));
            }
          } else if constexpr (std::is_same_v<T, SetCpuDirective>) {
            rt.run_before(x.at);
            net.set_cpu_load(x.host, x.pct);
          } else if constexpr (std::is_same_v<T, SetLinkLatencyDirective>) {
            rt.run_before(x.at);
            net.set_link_latency(x.link_index, x.latency_us);
          } else if constexpr (std::is_same_v<T, SetProcLatencyDirective>) {
            rt.run_before(x.at);
            net.set_proc_latency(x.switch_id, x.latency_us);
          } else if constexpr (std::is_same_v<T, RouteDirective>) {
            rt.run_before(x.at);
            rt.apply(rt.controller().install_unicast_route(x.src, x.dst));
          } else if constexpr (std::is_same_v<T, RunUntilDirective>) {
            rt.run_until(x.t);
          } else if constexpr (std::is_same_v<T, QueryDirective>) {
            const auto table = rt.controller().query(x.text);
            queries << "query line=" << d.line << " t=" << rt.now() << "\n" << sparql::format_table(table);
          } else if constexpr (std::is_same_v<T, ExpectDeliveryDirective>) {
            AssertionResult a;
            a.line = d.line;
            a.expected = x.hosts;
            const auto& all = rt.deliveries();
            for (std::size_t i = delivery_mark; i < all.size(); ++i) a.actual.insert(all[i].host_id);
            delivery_mark = all.size();
            if (!a.passed()) log::warn("expect_delivery failed at line " + std::to_string(d.line));
            result.assertions.push_back(std::move(a));
          } else if constexpr (std::is_same_v<T, ExportDirective>) {
            const auto path = x.path.is_absolute() ? x.path : options.base_dir / x.path;
            std::ofstream out(path, std::ios::binary);
            const auto text = rt.controller().store().export_ntriples();
            if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + path.string());
            exports << "export line=" << d.line << " t=" << rt.now()
                    << " triples=" << rt.controller().store().size() << "\n";
          }
        },
        d.body);
  }
  rt.run_to_idle();

  std::ostringstream r;
  r << "swarmkdn-report 1\n";
  r << "seed=" << options.seed << "\n";
  r << "directives=" << scenario.directives.size() << "\n";
  r << "end_time=" << rt.now() << "\n";
  r << "== trace\n";
  for (const auto& line : rt.trace()) r << line << "\n";
  r << "== queries\n" << queries.str();
  r << "== exports\n" << exports.str();
  r << "== deliveries\n";
  std::map<std::string, std::size_t> per_host;
  for (const auto& h : topo.hosts) per_host[h.id] = 0;
  for (const auto& dl : rt.deliveries()) ++per_host[dl.host_id];
  for (const auto& [host, count] : per_host) r << host << " " << count << "\n";
  r << "== weights\n";
  for (const auto& [link, w] : rt.controller().weights().all()) {
    r << to_string(link) << " ewma=" << fixed3(w.ewma_latency_us) << " samples=" << w.sample_count << "\n";
  }
  r << "== routes\n";
  for (const auto& [key, route] : rt.controller().routes().all()) {
    r << key.first << " -> " << key.second << " generation=" << route.generation << " switches=";
    bool first = true;
    for (const auto& [sw, prog] : route.installed) {
      if (!first) r << ',';
      r << sw;
      first = false;
    }
    r << "\n";
  }
  r << "== assertions\n";
  std::size_t failed = 0;
  for (const auto& a : result.assertions) {
    if (!a.passed()) ++failed;
    r << "expect_delivery line=" << a.line << " " << (a.passed() ? "PASS" : "FAIL")
      << " expected=" << join(a.expected) << " actual=" << join(a.actual) << "\n";
  }
  const auto& c = rt.counters();
  r << "== summary\n";
  r << "deliveries=" << c.deliveries << "\n";
  r << "packet_ins=" << c.packet_ins << "\n";
  r << "int_reports=" << c.int_reports << "\n";
  r << "writes=" << c.writes_issued << "\n";
  r << "update_failures=" << c.updates_failed << "\n";
  r << "packet_outs=" << c.packet_outs << "\n";
  r << "drops=" << c.drops << "\n";
  r << "triples=" << rt.controller().store().size() << "\n";
  r << "assertions=" << result.assertions.size() << "\n";
  r << "assertions_failed=" << failed << "\n";
  r << "result=" << (failed == 0 ? "pass" : "fail") << "\n";
  result.report = r.str();
  return result;
}

RunResult run_scenario(const Topology& topo, const Scenario& scenario, const RunOptions& options) {
  Runtime rt(topo, options.controller);
  return run_scenario(rt, scenario, options);
}

}  // namespace swarmkdn
