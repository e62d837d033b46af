// Solves a small instance with every formulation and prints the path flows.
//
//   quickstart [instance.mcf]

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mcf/mcf.hpp"

int main(int argc, char** argv) {
  const std::string file = argc > 1 ? argv[1] : MCF_SAMPLE_DIR "/bottleneck.mcf";
  std::ifstream in(file);
  if (!in) {
    std::cerr << "cannot open " << file << '\n';
    return 1;
  }
  const mcf::Instance inst = mcf::parse_native(in, file);

  for (auto f : {mcf::Formulation::Tree, mcf::Formulation::Path, mcf::Formulation::SourceLp,
                 mcf::Formulation::EdgeLp}) {
    mcf::SolverConfig cfg;
    cfg.formulation = f;
    cfg.rel_tol = 1e-9;
    const mcf::SolveReport rep = mcf::solve(inst, cfg);
    std::printf("%-10s %-10s objective %.6f  iterations %zu  columns %zu\n", mcf::to_string(f),
                mcf::to_string(rep.status), rep.objective, rep.iterations.size(), rep.peak_columns);
    if (f == mcf::Formulation::Tree && rep.status == mcf::SolveStatus::Optimal) {
      const auto paths = mcf::decompose_all(inst, rep.source_flows);
      mcf::write_flow_dump(std::cout, inst, paths);
    }
  }
  return 0;
}
