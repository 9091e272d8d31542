//
// Project semforge - Copyright 2026 The semforge Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <sstream>

#include <catch_amalgamated.hpp>

#include "semforge/dataset.hpp"
#include "semforge/error.hpp"
#include "support.hpp"

using namespace semforge;
using Catch::Matchers::WithinAbs;

TEST_CASE("reads an indexed CSV", "[dataset]") {
  std::istringstream is(",a,b\n0,1,2\n1,3,5\n2,-1,0.5\n");
  const Dataset d = Dataset::read_csv(is);
  CHECK(d.names() == std::vector<std::string> { "a", "b" });
  REQUIRE(d.n() == 3);
  CHECK(d.rows()(2, 1) == 0.5);
  CHECK(d.column("a")[1] == 3);
}

TEST_CASE("unbiased covariance by hand", "[dataset]") {
  // a = 1, 3, -1 (mean 1); b = 2, 5, 0.5 (mean 2.5).
  // var(a) = (0 + 4 + 4) / 2 = 4
  // var(b) = (0.25 + 6.25 + 4) / 2 = 5.25
  // cov(a, b) = (0 * -0.5 + 2 * 2.5 + -2 * -2) / 2 = 4.5
  std::istringstream is(",a,b\n0,1,2\n1,3,5\n2,-1,0.5\n");
  const Dataset d = Dataset::read_csv(is);
  const Eigen::MatrixXd s = d.covariance({ "b", "a" });
  CHECK_THAT(s(0, 0), WithinAbs(5.25, 1e-14));
  CHECK_THAT(s(1, 1), WithinAbs(4.0, 1e-14));
  CHECK_THAT(s(0, 1), WithinAbs(4.5, 1e-14));
  CHECK(s(0, 1) == s(1, 0));
}

TEST_CASE("rejects malformed input", "[dataset]") {
  auto read = [](const char *text) {
    std::istringstream is(text);
    return Dataset::read_csv(is);
  };
  CHECK_THROWS_AS(read(""), DataError);
  CHECK_THROWS_AS(read(",a,b\n0,1\n"), DataError);
  CHECK_THROWS_AS(read(",a,b\n0,1,x\n"), DataError);
  CHECK_THROWS_AS(read(",a,b\n0,1,nan\n"), DataError);
  CHECK_THROWS_AS(read(",a,a\n0,1,2\n"), DataError);
}

TEST_CASE("missing column", "[dataset]") {
  const Dataset d = testing::random_dataset({ "a" }, 10, 1);
  CHECK_FALSE(d.has_column("b"));
  CHECK_THROWS_AS(d.column("b"), DataError);
}

TEST_CASE("write then read reproduces values exactly", "[dataset][property]") {
  const Dataset d = testing::random_dataset({ "u", "v", "w" }, 50, 7);
  std::ostringstream os;
  d.write_csv(os);
  std::istringstream is(os.str());
  const Dataset back = Dataset::read_csv(is);
  CHECK(back.names() == d.names());
  CHECK(back.rows() == d.rows());

  std::ostringstream again;
  back.write_csv(again);
  CHECK(again.str() == os.str());
}
