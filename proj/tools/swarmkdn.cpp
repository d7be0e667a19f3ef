// swarmkdn: run scenarios, query the knowledge graph, export it.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "swarmkdn/error.hpp"
#include "swarmkdn/log.hpp"
#include "swarmkdn/scenario.hpp"
#include "swarmkdn/sparql.hpp"

namespace {

using namespace swarmkdn;

constexpr int kExitPass = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + path);
}

RunOptions options_for(const std::string& scenario_path, std::uint64_t seed) {
  RunOptions o;
  o.seed = seed;
  o.base_dir = std::filesystem::path(scenario_path).parent_path();
  if (o.base_dir.empty()) o.base_dir = ".";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-defined swarm network simulator"};
  app.require_subcommand(1);

  std::string topology_path;
  std::string scenario_path;
  std::string report_path;
  std::string state_path;
  std::string sparql_text;
  std::string out_path;
  std::uint64_t seed = 0;
  bool csv = false;

  auto* run = app.add_subcommand("run", "Execute a scenario and print its report");
  run->add_option("--topology", topology_path, "Topology JSON")->required();
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Seed for randomized directives");
  run->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* query = app.add_subcommand("query", "Evaluate a SPARQL query against the graph");
  query->add_option("--topology", topology_path, "Topology JSON")->required();
  auto* q_scenario = query->add_option("--scenario", scenario_path, "Run this scenario first");
  query->add_option("--state", state_path, "Query an exported N-Triples graph instead")->excludes(q_scenario);
  query->add_option("--seed", seed, "Seed for the scenario");
  query->add_option("--sparql", sparql_text, "Query text")->required();
  query->add_flag("--csv", csv, "Emit CSV instead of an aligned table");

  auto* exp = app.add_subcommand("export", "Run a scenario and export the graph as N-Triples");
  exp->add_option("--topology", topology_path, "Topology JSON")->required();
  exp->add_option("--scenario", scenario_path, "Scenario file")->required();
  exp->add_option("--seed", seed, "Seed for the scenario");
  exp->add_option("--out", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const Topology topo = load_topology(topology_path);

    if (*run) {
      const Scenario sc = load_scenario(scenario_path, topo);
      const RunResult result = run_scenario(topo, sc, options_for(scenario_path, seed));
      if (report_path.empty()) {
        std::cout << result.report;
      } else {
        write_file(report_path, result.report);
      }
      return result.passed() ? kExitPass : kExitAssertion;
    }

    if (*query) {
      const auto parsed = sparql::parse_query(sparql_text);
      sparql::ResultTable table;
      if (!state_path.empty()) {
        TripleStore store;
        store.import_ntriples(read_file(state_path));
        table = sparql::evaluate(parsed, store);
      } else {
        Runtime rt(topo);
        if (!scenario_path.empty()) {
          const Scenario sc = load_scenario(scenario_path, topo);
          run_scenario(rt, sc, options_for(scenario_path, seed));
        }
        table = sparql::evaluate(parsed, rt.controller().store());
      }
      std::cout << (csv ? sparql::format_csv(table) : sparql::format_table(table));
      return kExitPass;
    }

    const Scenario sc = load_scenario(scenario_path, topo);
    Runtime rt(topo);
    run_scenario(rt, sc, options_for(scenario_path, seed));
    write_file(out_path, rt.controller().store().export_ntriples());
    return kExitPass;
  } catch (const Error& e) {
    // what() already leads with the code name.
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
}
