#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"
#include "mcf/instance.hpp"
#include "mcf/io.hpp"
#include "oracles.hpp"

using namespace mcf;

TEST(GroupBySource, TwoSinksOneSource) {
  const std::vector<Commodity> ks{{0, 2, 2}, {0, 1, 1}};
  const auto g = group_by_source(ks);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].source, 0);
  ASSERT_EQ(g[0].sink_demands.size(), 2u);
  EXPECT_EQ(g[0].sink_demands[0].sink, 1);
  EXPECT_EQ(g[0].sink_demands[0].demand, 1.0);
  EXPECT_EQ(g[0].sink_demands[1].sink, 2);
  EXPECT_EQ(g[0].sink_demands[1].demand, 2.0);
  EXPECT_EQ(g[0].total_demand, 3.0);
}

TEST(GroupBySource, Singleton) {
  const std::vector<Commodity> ks{{0, 2, 2}};
  const auto g = group_by_source(ks);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].sink_demands.size(), 1u);
}

TEST(GroupBySource, DuplicatePairsMerge) {
  const std::vector<Commodity> ks{{0, 2, 1}, {0, 2, 2}};
  const auto g = group_by_source(ks);
  ASSERT_EQ(g.size(), 1u);
  ASSERT_EQ(g[0].sink_demands.size(), 1u);
  EXPECT_EQ(g[0].sink_demands[0].demand, 3.0);

  const Instance inst("dup", testing_mcf::triangle().network(), ks);
  EXPECT_EQ(inst.commodity_count(), 1u);
  EXPECT_EQ(inst.commodity(0).demand, 3.0);
  EXPECT_EQ(inst.notes().merged_duplicates, 1u);
}

TEST(Instance, RejectsBadCommodities) {
  const Network net = testing_mcf::triangle().network();
  EXPECT_THROW(Instance("x", net, {{0, 0, 1}}), InputError);
  EXPECT_THROW(Instance("x", net, {{0, 1, 0}}), InputError);
  EXPECT_THROW(Instance("x", net, {{0, 7, 1}}), InputError);
}

TEST(Instance, GroupOfIsConsistent) {
  const Instance inst = generate_random(30, 90, 60, 7, 4);
  for (std::size_t k = 0; k < inst.commodity_count(); ++k) {
    const SourceGroup& g = inst.group(inst.group_of(static_cast<int>(k)));
    EXPECT_EQ(g.source, inst.commodity(static_cast<int>(k)).source);
    EXPECT_NE(std::find(g.members.begin(), g.members.end(), static_cast<int>(k)), g.members.end());
  }
}

TEST(Generator, SourceCountEchoed) {
  const Instance inst = generate_random(10, 30, 20, 3, 7);
  EXPECT_EQ(inst.source_count(), 3u);
  EXPECT_EQ(inst.commodity_count(), 20u);
  EXPECT_EQ(inst.network().edge_count(), 30);
}

TEST(Generator, MinimalCase) {
  const Instance inst = generate_random(2, 1, 1, 1, 0);
  EXPECT_EQ(inst.network().edge_count(), 1);
  EXPECT_EQ(inst.commodity_count(), 1u);
  const Commodity& c = inst.commodity(0);
  EXPECT_EQ(inst.network().edge(0).tail, c.source);
  EXPECT_EQ(inst.network().edge(0).head, c.sink);
}

TEST(Generator, SameSeedSameBytes) {
  for (auto cap : {CapacityMode::Loose, CapacityMode::Tight, CapacityMode::Mixed}) {
    GeneratorParams p;
    p.nodes = 25;
    p.edges = 80;
    p.commodities = 40;
    p.sources = 10;
    p.seed = 99;
    p.capacity = cap;
    EXPECT_EQ(write_native(generate_random(p)), write_native(generate_random(p)));
  }
}

TEST(Generator, UnsatisfiableParametersFail) {
  EXPECT_THROW(generate_random(3, 3, 10, 1, 0), GenerationError);
  EXPECT_THROW(generate_random(5, 2, 1, 1, 0), GenerationError);
  EXPECT_THROW(generate_random(5, 10, 2, 3, 0), GenerationError);
}

TEST(Generator, AggregationConservesDemandAndSinksAreReachable) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Instance inst = generate_random(testing_mcf::small_params(seed));
    double by_group = 0.0;
    for (const SourceGroup& g : inst.groups()) by_group += g.total_demand;
    EXPECT_NEAR(by_group, inst.total_demand(), 1e-9);
    const auto& net = inst.network();
    for (const Commodity& c : inst.commodities()) {
      const auto d = oracle::bellman_ford(net, net.costs(), c.source);
      EXPECT_LT(d[static_cast<std::size_t>(c.sink)], oracle::kInf);
    }
  }
}
