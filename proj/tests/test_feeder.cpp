#include "doctest.h"

#include <set>

#include "evcoord/errors.hpp"
#include "evcoord/feeder.hpp"
#include "evcoord/rng.hpp"
#include "test_util.hpp"

using namespace evcoord;

TEST_SUITE("feeder") {

TEST_CASE("three-bus chain admittance matches hand assembly") {
  // Chain 1-2-3, base impedance 1.6 ohm. z12 = 0.1+0.1j pu, z23 = 0.2+0.2j pu.
  std::vector<Bus> buses{{1, 0, 0, true}, {2, 1.0, 0.2, false}, {3, 1.0, 0.2, false}};
  std::vector<Line> lines{{1, 2, 0.16, 0.16}, {2, 3, 0.32, 0.32}};
  FeederModel model(std::move(buses), std::move(lines), 400.0, 100e3);

  // y12 = 1/(0.1+0.1j) = 5-5j, y23 = 1/(0.2+0.2j) = 2.5-2.5j.
  const std::complex<double> y12(5.0, -5.0);
  const std::complex<double> y23(2.5, -2.5);
  const Eigen::MatrixXcd& y = model.admittance();
  CHECK(std::abs(y(0, 0) - y12) < 1e-12);
  CHECK(std::abs(y(0, 1) + y12) < 1e-12);
  CHECK(std::abs(y(0, 2)) == 0.0);
  CHECK(std::abs(y(1, 1) - (y12 + y23)) < 1e-12);
  CHECK(std::abs(y(1, 2) + y23) < 1e-12);
  CHECK(std::abs(y(2, 2) - y23) < 1e-12);
}

TEST_CASE("admittance is symmetric with zero row sums") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(32));
    const FeederModel model = evtest::random_radial_feeder(rng, n);
    const Eigen::MatrixXcd& y = model.admittance();
    CHECK((y - y.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXcd row_sums = y.rowwise().sum();
    CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("model validation rejects malformed networks") {
  const auto mk_buses = [] {
    return std::vector<Bus>{{1, 0, 0, true}, {2, 1, 0.2, false}, {3, 1, 0.2, false}};
  };

  SUBCASE("duplicate line") {
    std::vector<Line> lines{{1, 2, 0.1, 0.1}, {2, 1, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(mk_buses(), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("disconnected graph") {
    // A 4-cycle among buses 2..5 has n-1 edges yet leaves the slack isolated.
    std::vector<Bus> buses{{1, 0, 0, true}, {2, 1, 0.2, false}, {3, 1, 0.2, false},
                           {4, 1, 0.2, false}, {5, 1, 0.2, false}};
    std::vector<Line> lines{{2, 3, 0.1, 0.1}, {3, 4, 0.1, 0.1}, {4, 5, 0.1, 0.1},
                            {5, 2, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(std::move(buses), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("self loop") {
    std::vector<Line> lines{{1, 2, 0.1, 0.1}, {3, 3, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(mk_buses(), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("wrong line count for a radial network") {
    std::vector<Line> lines{{1, 2, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(mk_buses(), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("no slack") {
    std::vector<Bus> buses{{1, 0, 0, false}, {2, 1, 0.2, false}};
    std::vector<Line> lines{{1, 2, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(std::move(buses), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("two slacks") {
    std::vector<Bus> buses{{1, 0, 0, true}, {2, 1, 0.2, true}};
    std::vector<Line> lines{{1, 2, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(std::move(buses), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("non-positive impedance") {
    std::vector<Bus> buses{{1, 0, 0, true}, {2, 1, 0.2, false}};
    std::vector<Line> lines{{1, 2, 0.0, 0.1}};
    CHECK_THROWS_AS(FeederModel(std::move(buses), std::move(lines), 400.0, 100e3), ModelError);
  }
  SUBCASE("negative load") {
    std::vector<Bus> buses{{1, 0, 0, true}, {2, -1, 0.2, false}};
    std::vector<Line> lines{{1, 2, 0.1, 0.1}};
    CHECK_THROWS_AS(FeederModel(std::move(buses), std::move(lines), 400.0, 100e3), ModelError);
  }
}

TEST_CASE("feeder file round-trips byte for byte") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const FeederModel model = evtest::random_radial_feeder(rng, 3 + static_cast<int>(rng.below(30)));
    const std::string once = serialize_feeder(model);
    const FeederModel reparsed = parse_feeder(once, "roundtrip");
    const std::string twice = serialize_feeder(reparsed);
    CHECK(once == twice);
  }
}

TEST_CASE("parser reports file and line for malformed input") {
  const std::string text =
      "[base]\n400,100000\n[buses]\n1,0,0,1\n2,oops,0.2,0\n[lines]\n1,2,0.1,0.1\n";
  try {
    parse_feeder(text, "bad.fdr");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.fdr:5") != std::string::npos);
  }
}

TEST_CASE("parser rejects data before a section and unknown sections") {
  CHECK_THROWS_AS(parse_feeder("400,100000\n", "x"), ConfigError);
  CHECK_THROWS_AS(parse_feeder("[base]\n400,100000\n[bogus]\n", "x"), ConfigError);
  CHECK_THROWS_AS(parse_feeder("[buses]\n1,0,0,1\n", "x"), ConfigError);  // no [base]
}

TEST_CASE("tree structure exposes parents and depths from the slack") {
  std::vector<Bus> buses{{1, 0, 0, true}, {2, 1, 0.2, false}, {3, 1, 0.2, false},
                         {4, 1, 0.2, false}};
  std::vector<Line> lines{{1, 2, 0.1, 0.1}, {2, 3, 0.1, 0.1}, {2, 4, 0.1, 0.1}};
  FeederModel model(std::move(buses), std::move(lines), 400.0, 100e3);
  CHECK(model.parent_index()[model.index_of(1)] == -1);
  CHECK(model.parent_index()[model.index_of(3)] == model.index_of(2));
  CHECK(model.depth_of_index(model.index_of(4)) == 2);
  CHECK(model.load_bus_ids() == std::vector<int>{2, 3, 4});
}

}  // TEST_SUITE
