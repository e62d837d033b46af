#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mcf/instance.hpp"

namespace testing_mcf {

// a=0, b=1, c=2; edges a->b (1), b->c (1), a->c (3); k0 = (a, c, 2), k1 = (a, b, 1).
inline constexpr mcf::NodeId A = 0, B = 1, C = 2;
inline constexpr mcf::EdgeId AB = 0, BC = 1, AC = 2;

inline mcf::Instance triangle(double cap_bc = 10.0) {
  mcf::Network net(3, {{A, B, 1, 10}, {B, C, 1, cap_bc}, {A, C, 3, 10}});
  return mcf::Instance("triangle", net, {{A, C, 2}, {A, B, 1}});
}

// a=0 -> b=1 -> c=2 with unit costs.
inline mcf::Network line() { return mcf::Network(3, {{0, 1, 1, 10}, {1, 2, 1, 10}}); }

/// Random instance in the ranges of the acceptance oracle suite.
inline mcf::GeneratorParams small_params(std::uint64_t seed) {
  mcf::GeneratorParams p;
  p.nodes = static_cast<mcf::NodeId>(4 + seed % 12);
  p.edges = std::min<mcf::EdgeId>(60, p.nodes * static_cast<mcf::EdgeId>(2 + seed % 3));
  p.sources = 1 + seed % std::min<std::uint64_t>(5, static_cast<std::uint64_t>(p.nodes - 1));
  p.commodities = std::min<std::size_t>(p.sources + seed % 15, p.sources * static_cast<std::size_t>(p.nodes - 1));
  p.seed = seed;
  p.capacity = seed % 3 == 0 ? mcf::CapacityMode::Loose : seed % 3 == 1 ? mcf::CapacityMode::Tight : mcf::CapacityMode::Mixed;
  return p;
}

}  // namespace testing_mcf
