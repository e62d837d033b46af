// mcf: command-line driver for the multi-commodity flow solvers.
//
//   mcf solve [flags] <instance>      instance: file.mcf, net_net.tntp, or gen:...
//   mcf bench <manifest.json> --out <dir>
//   mcf generate --nodes 20 --edges 60 ... -o file.mcf
//   mcf export-lp --formulation edge-lp <instance> -o model.lp
//
// Exit codes: 0 optimal, 3 timeout, 4 infeasible, 2 usage or input error, 1 other.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcf/mcf.hpp"

namespace {

constexpr int kExitOptimal = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitInfeasible = 4;

int exit_code(mcf::SolveStatus s) {
  switch (s) {
    case mcf::SolveStatus::Optimal: return kExitOptimal;
    case mcf::SolveStatus::Timeout: return kExitTimeout;
    case mcf::SolveStatus::Infeasible: return kExitInfeasible;
  }
  return kExitError;
}

struct SolveArgs {
  std::string instance;
  std::string formulation = "tree";
  double tol = 1e-4;
  double timeout = 7200.0;
  std::string strategy = "auto";
  std::string pricing = "full";
  std::string heuristic = "global";
  std::optional<double> coefficient;
  std::uint64_t seed = 0;
  std::string flows_file;
  std::string json_file;
  std::string csv_file;
  int threads = 1;
  std::size_t column_threshold = 0;
  double epsilon = -1.0;
  bool quiet = false;
};

mcf::SolverConfig make_config(const SolveArgs& a) {
  mcf::SolverConfig c;
  c.formulation = *mcf::parse_formulation(a.formulation);
  c.strategy = *mcf::parse_strategy(a.strategy);
  c.pricing = *mcf::parse_pricing(a.pricing);
  c.heuristic = *mcf::parse_heuristic(a.heuristic);
  c.rel_tol = a.tol;
  c.timeout_seconds = a.timeout;
  c.seed = a.seed;
  c.threads = a.threads;
  c.column_threshold = a.column_threshold;
  c.filter_epsilon = a.epsilon;
  return c;
}

void print_summary(std::ostream& out, const mcf::Instance& inst, const mcf::SolveReport& rep) {
  out << "instance     " << inst.name() << " (|V|=" << inst.network().node_count()
      << " |E|=" << inst.network().edge_count() << " |K|=" << inst.commodity_count() << " |S|=" << inst.source_count()
      << ")\n";
  out << "formulation  " << mcf::to_string(rep.formulation);
  if (rep.formulation == mcf::Formulation::Tree || rep.formulation == mcf::Formulation::Path) {
    out << " (strategy " << mcf::to_string(rep.strategy) << ", slack " << mcf::to_string(rep.slack) << ")";
  }
  out << "\nstatus       " << mcf::to_string(rep.status) << "\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.10g", rep.objective);
  out << "objective    " << buf << "\n";
  if (rep.lower_bound) {
    std::snprintf(buf, sizeof buf, "%.10g", *rep.lower_bound);
    out << "lower bound  " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.3e", rep.gap);
    out << "gap          " << buf << "\n";
  }
  out << "iterations   " << rep.iterations.size() << "\n";
  out << "columns      " << rep.peak_columns << "\n";
  out << "rows         " << rep.demand_rows << " demand, " << rep.final_active_rows << " capacity\n";
  std::snprintf(buf, sizeof buf, "%.3f", rep.wall_seconds);
  out << "time         " << buf << " s\n";
  if (!rep.infeasible_commodities.empty()) {
    out << "infeasible   commodities";
    for (int k : rep.infeasible_commodities) out << ' ' << k + 1;
    out << "\n";
  }
  if (!rep.message.empty()) out << "note         " << rep.message << "\n";
}

void append_csv(const std::string& path, const mcf::RunRecord& rec) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw mcf::InputError("cannot write " + path);
  if (fresh) out << mcf::kRunCsvHeader << '\n';
  out << mcf::to_csv_row(rec) << '\n';
}

int run_solve(const SolveArgs& a) {
  const mcf::Instance inst = mcf::load_instance(a.instance, a.coefficient);
  const mcf::SolverConfig config = make_config(a);
  const mcf::SolveReport rep = mcf::solve(inst, config);
  const mcf::RunRecord rec = mcf::make_record(inst, rep);
  if (!a.quiet) print_summary(std::cout, inst, rep);
  if (!a.json_file.empty()) {
    const std::string text = mcf::to_json(rec).dump(2);
    if (a.json_file == "-") {
      std::cout << text << '\n';
    } else {
      std::ofstream out(a.json_file);
      if (!out) throw mcf::InputError("cannot write " + a.json_file);
      out << text << '\n';
    }
  }
  if (!a.csv_file.empty()) append_csv(a.csv_file, rec);
  if (!a.flows_file.empty() && rep.status == mcf::SolveStatus::Optimal) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto paths = mcf::decompose_all(inst, rep.source_flows);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream out(a.flows_file);
    if (!out) throw mcf::InputError("cannot write " + a.flows_file);
    mcf::write_flow_dump(out, inst, paths);
    if (!a.quiet) std::cout << "decompose    " << secs << " s (not included in wall)\n";
  }
  return exit_code(rep.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-cost multi-commodity flow solver"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("instance", sa.instance, "Instance file (.mcf, *_net.tntp) or gen: spec")->required();
  solve->add_option("--formulation", sa.formulation, "Formulation")
      ->check(CLI::IsMember({"tree", "path", "source-lp", "edge-lp"}));
  solve->add_option("--tol", sa.tol, "Relative gap tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--timeout", sa.timeout, "Time limit in seconds")->check(CLI::PositiveNumber);
  solve->add_option("--strategy", sa.strategy, "Master/pricing balancing")
      ->check(CLI::IsMember({"auto", "master-easy", "pricing-easy"}));
  solve->add_option("--pricing", sa.pricing, "Pricing shortest-path variant")
      ->check(CLI::IsMember({"full", "bounded", "astar"}));
  solve->add_option("--heuristic", sa.heuristic, "A* heuristic scope")->check(CLI::IsMember({"global", "per-source"}));
  solve->add_option("--coefficient", sa.coefficient, "TNTP demand coefficient")->check(CLI::PositiveNumber);
  solve->add_option("--seed", sa.seed, "Random seed");
  solve->add_option("--decompose-flows", sa.flows_file, "Write per-commodity path flows to this file");
  solve->add_option("--json", sa.json_file, "Write the run record as JSON (- for stdout)");
  solve->add_option("--csv", sa.csv_file, "Append the run record to this CSV file");
  solve->add_option("--threads", sa.threads, "Pricing threads")->check(CLI::Range(1, 1024));
  solve->add_option("--column-threshold", sa.column_threshold, "Columns per pricing_easy round (0 = max(|S|, 100))");
  solve->add_option("--epsilon", sa.epsilon, "master_easy filter threshold (negative = max(|S|/100, 1))");
  solve->add_flag("-q,--quiet", sa.quiet, "No summary on stdout");

  std::string manifest, out_dir = "bench-out";
  auto* bench = app.add_subcommand("bench", "Run a benchmark manifest");
  bench->add_option("manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("-o,--out", out_dir, "Output directory");

  mcf::GeneratorParams gp;
  std::string cap = "loose", gen_out;
  auto* gen = app.add_subcommand("generate", "Write a random instance in native format");
  gen->add_option("--nodes", gp.nodes)->check(CLI::Range(2, 1 << 30));
  gen->add_option("--edges", gp.edges)->check(CLI::Range(1, 1 << 30));
  gen->add_option("--commodities", gp.commodities);
  gen->add_option("--sources", gp.sources);
  gen->add_option("--seed", gp.seed);
  gen->add_option("--capacity", cap)->check(CLI::IsMember({"loose", "tight", "mixed"}));
  gen->add_option("--tight-fraction", gp.tight_fraction)->check(CLI::Range(0.0, 1.0));
  gen->add_option("-o,--output", gen_out, "Output file (stdout if omitted)");

  std::string lp_instance, lp_form = "edge-lp", lp_out;
  std::optional<double> lp_coef;
  auto* exp = app.add_subcommand("export-lp", "Write a direct LP in LP format");
  exp->add_option("instance", lp_instance)->required();
  exp->add_option("--formulation", lp_form)->check(CLI::IsMember({"edge-lp", "source-lp"}));
  exp->add_option("--coefficient", lp_coef)->check(CLI::PositiveNumber);
  exp->add_option("-o,--output", lp_out, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*bench) {
      std::ifstream in(manifest);
      const auto j = nlohmann::json::parse(in);
      const auto m = mcf::parse_manifest(j, std::filesystem::path(manifest).parent_path());
      const auto res = mcf::run_bench(m, out_dir);
      std::cout << res.runs.size() << " runs written to " << out_dir;
      if (!res.skipped.empty()) std::cout << " (" << res.skipped.size() << " instances skipped)";
      std::cout << '\n';
      return kExitOptimal;
    }
    if (*gen) {
      gp.capacity = cap == "tight" ? mcf::CapacityMode::Tight
                    : cap == "mixed" ? mcf::CapacityMode::Mixed
                                     : mcf::CapacityMode::Loose;
      const mcf::Instance inst = mcf::generate_random(gp);
      if (gen_out.empty()) {
        mcf::write_native(std::cout, inst);
      } else {
        std::ofstream out(gen_out);
        if (!out) throw mcf::InputError("cannot write " + gen_out);
        mcf::write_native(out, inst);
      }
      return kExitOptimal;
    }
    if (*exp) {
      const mcf::Instance inst = mcf::load_instance(lp_instance, lp_coef);
      const auto d = lp_form == "edge-lp" ? mcf::build_edge_lp(inst, true) : mcf::build_source_lp(inst, true);
      if (lp_out.empty()) {
        mcf::write_lp_format(std::cout, d.lp);
      } else {
        std::ofstream out(lp_out);
        if (!out) throw mcf::InputError("cannot write " + lp_out);
        mcf::write_lp_format(out, d.lp);
      }
      return kExitOptimal;
    }
  } catch (const mcf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mcf::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mcf::GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: manifest: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
