#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "swarmkdn/runtime.hpp"

namespace swarmkdn {

// One line each in a scenario file:
//
//   inject host=h1 dst=h2|10.0.0.2 [port=7400] [rtps=1] [int=1] [payload=x] at=T
//   inject_random count=N from=T0 to=T1 [port=7400] [rtps=1] [int=1]
//   set_cpu host=h1 pct=40 at=T
//   set_link_latency a=s1:2 b=s2:1 us=500 at=T
//   set_proc_latency switch=2 us=1000 at=T
//   route src=h1 dst=h4 at=T
//   run_until t=T
//   query <SPARQL text to end of line>
//   expect_delivery hosts=h2,h3
//   export path=out.nt
//
// '#' starts a comment line. Times never decrease.

struct InjectDirective {
  std::string host;
  Ipv4Address dst_ip = 0;
  std::uint16_t port = 7400;
  bool rtps = true;
  bool int_enabled = true;
  std::string payload;
  std::uint64_t at = 0;
};

struct InjectRandomDirective {
  std::uint32_t count = 0;
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::uint16_t port = 7400;
  bool rtps = true;
  bool int_enabled = true;
};

struct SetCpuDirective {
  std::string host;
  std::uint8_t pct = 0;
  std::uint64_t at = 0;
};

struct SetLinkLatencyDirective {
  std::size_t link_index = 0;
  std::uint32_t latency_us = 0;
  std::uint64_t at = 0;
};

struct SetProcLatencyDirective {
  std::uint32_t switch_id = 0;
  std::uint32_t latency_us = 0;
  std::uint64_t at = 0;
};

struct RouteDirective {
  std::string src;
  std::string dst;
  std::uint64_t at = 0;
};

struct RunUntilDirective {
  std::uint64_t t = 0;
};

struct QueryDirective {
  std::string text;
};

struct ExpectDeliveryDirective {
  std::set<std::string> hosts;
};

struct ExportDirective {
  std::filesystem::path path;
};

using DirectiveBody =
    std::variant<InjectDirective, InjectRandomDirective, SetCpuDirective, SetLinkLatencyDirective,
                 SetProcLatencyDirective, RouteDirective, RunUntilDirective, QueryDirective,
                 ExpectDeliveryDirective, ExportDirective>;

struct Directive {
  std::size_t line = 0;
  DirectiveBody body;
};

struct Scenario {
  std::string source = "<scenario>";
  std::vector<Directive> directives;
};

/// Throws Error(ParseError) or Error(UnknownEntity) with "source:line: ...".
Scenario parse_scenario(std::string_view text, const Topology& topo, std::string_view source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path, const Topology& topo);

struct RunOptions {
  std::uint64_t seed = 0;
  ControllerConfig controller;
  /// Relative export paths resolve against this directory.
  std::filesystem::path base_dir = ".";
};

struct AssertionResult {
  std::size_t line = 0;
  std::set<std::string> expected;
  std::set<std::string> actual;
  bool passed() const { return expected == actual; }
};

struct RunResult {
  std::string report;
  std::vector<AssertionResult> assertions;
  bool passed() const;
};

/// Executes the scenario against an already bootstrapped runtime and
/// renders the report. The runtime is left in its final state.
RunResult run_scenario(Runtime& rt, const Scenario& scenario, const RunOptions& options = {});

/// Convenience wrapper that builds the runtime itself.
RunResult run_scenario(const Topology& topo, const Scenario& scenario, const RunOptions& options = {});

}  // namespace swarmkdn
