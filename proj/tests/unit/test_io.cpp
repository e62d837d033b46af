#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mcf/io.hpp"

using namespace mcf;

namespace {

const char* kTriangle =
    "# a=1 b=2 c=3\n"
    "p mcf 3 3 2\n"
    "a 1 2 1 10\n"
    "a 2 3 1 10\n"
    "a 1 3 3 10\n"
    "d 1 3 2\n"
    "d 1 2 1\n";

std::string parse_error_of(const std::string& text) {
  try {
    parse_native(text, "t");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

const char* kToyNet =
    "<NUMBER OF ZONES> 3\n"
    "<NUMBER OF NODES> 3\n"
    "<FIRST THRU NODE> 1\n"
    "<NUMBER OF LINKS> 3\n"
    "<END OF METADATA>\n"
    "~ init term capacity length fft b power speed toll type ;\n"
    "\t1\t2\t100\t1\t1.5\t0.15\t4\t0\t0\t1\t;\n"
    "\t2\t3\t100\t1\t2\t0.15\t4\t0\t0\t1\t;\n"
    "\t1\t3\t50\t1\t6\t0.15\t4\t0\t0\t1\t;\n";

const char* kToyTrips =
    "<NUMBER OF ZONES> 3\n"
    "<TOTAL OD FLOW> 7\n"
    "<END OF METADATA>\n"
    "\n"
    "Origin  1\n"
    "    1 :      0.0;     2 :      3.0;     3 :      4.0;\n"
    "Origin  2\n"
    "    3 :      0.0;\n";

}  // namespace

TEST(NativeFormat, TriangleCounts) {
  const Instance inst = parse_native(std::string(kTriangle), "triangle");
  EXPECT_EQ(inst.network().node_count(), 3);
  EXPECT_EQ(inst.network().edge_count(), 3);
  EXPECT_EQ(inst.commodity_count(), 2u);
  EXPECT_EQ(inst.source_count(), 1u);
  EXPECT_EQ(inst.commodity(0).source, 0);
  EXPECT_EQ(inst.commodity(0).sink, 2);
  EXPECT_EQ(inst.commodity(0).demand, 2.0);
}

TEST(NativeFormat, RoundTrip) {
  const Instance a = parse_native(std::string(kTriangle), "triangle");
  const Instance b = parse_native(write_native(a), "triangle");
  EXPECT_TRUE(a == b);
  EXPECT_EQ(write_native(a), write_native(b));

  const Instance g = generate_random(20, 60, 30, 5, 1);
  const Instance h = parse_native(write_native(g), g.name());
  EXPECT_TRUE(g == h);
}

TEST(NativeFormat, NoCommodities) {
  EXPECT_NE(parse_error_of("p mcf 3 1 0\na 1 2 1 1\n").find("no commodities"), std::string::npos);
}

TEST(NativeFormat, DanglingNodeNamed) {
  const std::string msg = parse_error_of("p mcf 3 1 1\na 1 99 1 1\nd 1 2 1\n");
  EXPECT_NE(msg.find("99"), std::string::npos);
  EXPECT_NE(msg.find("t:2:"), std::string::npos);
}

TEST(NativeFormat, MalformedInputsCarryLocation) {
  EXPECT_NE(parse_error_of("q mcf 3 1 1\n").find("t:1:1"), std::string::npos);
  EXPECT_NE(parse_error_of("p mcf 3 1 1\na 1 2 -1 1\nd 1 2 1\n").find("negative cost"), std::string::npos);
  EXPECT_NE(parse_error_of("p mcf 3 1 1\na 1 2 1 -1\nd 1 2 1\n").find("negative capacity"), std::string::npos);
  EXPECT_NE(parse_error_of("p mcf 3 1 1\na 1 2 1 1\nd 1 2 -1\n").find("negative demand"), std::string::npos);
  EXPECT_NE(parse_error_of("p mcf 3 1 1\na 1 2 x 1\nd 1 2 1\n").find("t:2:7"), std::string::npos);
  EXPECT_NE(parse_error_of("p mcf 3 2 1\na 1 2 1 1\nd 1 2 1\n").find("declares 2 edges"), std::string::npos);
}

TEST(Tntp, IdentityCoefficientAndZeroDemandDropped) {
  std::istringstream net(kToyNet), trips(kToyTrips);
  const Instance inst = parse_tntp(net, trips, 1.0, "toy");
  EXPECT_EQ(inst.network().node_count(), 3);
  EXPECT_EQ(inst.network().edge_count(), 3);
  ASSERT_EQ(inst.commodity_count(), 2u);
  EXPECT_EQ(inst.commodity(0).sink, 1);
  EXPECT_EQ(inst.commodity(0).demand, 3.0);
  EXPECT_EQ(inst.commodity(1).demand, 4.0);
  EXPECT_EQ(inst.network().edge(0).cost, 1.5);
  EXPECT_EQ(inst.network().edge(2).capacity, 50.0);
  EXPECT_EQ(inst.notes().dropped_zero_demand, 2u);
}

TEST(Tntp, CoefficientDividesDemands) {
  std::istringstream net(kToyNet), trips(kToyTrips);
  const Instance inst = parse_tntp(net, trips, 2.0, "toy");
  EXPECT_EQ(inst.commodity(0).demand, 1.5);
  EXPECT_EQ(inst.commodity(1).demand, 2.0);
}

TEST(Tntp, Errors) {
  {
    std::istringstream net(std::string(kToyNet) + "\t1\t2\t100\n"), trips(kToyTrips);
    EXPECT_THROW(parse_tntp(net, trips, 1.0), ParseError);
  }
  {
    std::istringstream net(kToyNet), trips("Origin 1\n 9 : 1.0;\n");
    EXPECT_THROW(parse_tntp(net, trips, 1.0), ParseError);
  }
  {
    std::istringstream net(kToyNet), trips("Origin 1\n 2 : abc;\n");
    EXPECT_THROW(parse_tntp(net, trips, 1.0), ParseError);
  }
  {
    std::istringstream net(kToyNet), trips(kToyTrips);
    EXPECT_THROW(parse_tntp(net, trips, 0.0), InputError);
  }
}

TEST(Tntp, KnownCoefficients) {
  EXPECT_EQ(tntp_coefficient("Winnipeg"), 2000.0);
  EXPECT_FALSE(tntp_coefficient("Nowhere").has_value());
}
