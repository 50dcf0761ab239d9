// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <string>

#include "gcomp/problems.hpp"

using namespace gcomp;

namespace {

std::string data_path(const std::string& name) {
  const char* dir = std::getenv("GCOMP_DATA");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

std::vector<Vec> probe_points(int dim, int count, Rng& rng) {
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    Vec x(dim);
    for (auto& e : x) e = rng.normal();
    pts.push_back(std::move(x));
  }
  return pts;
}

void check_smoothness_and_convexity(const Objective& obj, Rng& rng) {
  for (int t = 0; t < 100; ++t) {
    Vec x(obj.dim), y(obj.dim);
    for (auto& e : x) e = rng.normal();
    for (auto& e : y) e = rng.normal();
    const Vec gx = obj.grad(x), gy = obj.grad(y);
    const double lhs = std::sqrt(dist_sq(gx, gy));
    const double rhs = obj.L * std::sqrt(dist_sq(x, y));
    CHECK(lhs <= rhs * (1 + 1e-9));

    Vec diff = y;
    axpy(-1.0, x, diff);
    const double quad = obj.value(x) + dot(gx, diff) + 0.5 * obj.mu * nrm2_sq(diff);
    CHECK(obj.value(y) >= quad - 1e-9 * std::max(1.0, std::fabs(quad)));
  }
}

}  // namespace

TEST_CASE("generated quadratic invariants") {
  Rng rng(31);
  auto obj = gen_quadratic(30, 1.0, 10.0, rng);
  CHECK(obj.dim == 30);
  CHECK(obj.L <= 20.0 * (1 + 1e-6));
  CHECK(obj.mu >= 2.0 * (1 - 1e-6));
  CHECK(obj.L / obj.mu <= 10.0 + 1e-6);

  SUBCASE("gradient vanishes at the minimizer") {
    CHECK(nrm2(obj.grad(*obj.xstar)) <= 1e-8);
  }
  SUBCASE("finite differences confirm the gradient") {
    Rng pr(32);
    CHECK(gradient_check(obj, probe_points(30, 10, pr)) <= 1e-6);
  }
  SUBCASE("sampled smoothness and strong convexity") {
    Rng pr(33);
    check_smoothness_and_convexity(obj, pr);
  }
  SUBCASE("value at the minimizer is minimal along random rays") {
    Rng pr(34);
    for (int t = 0; t < 20; ++t) {
      Vec x = *obj.xstar;
      for (auto& e : x) e += 0.1 * pr.normal();
      CHECK(obj.value(x) >= *obj.fstar - 1e-12);
    }
  }
}

TEST_CASE("one-dimensional quadratic closed form") {
  // f(x) = c x^2 - y x with c the single diagonal entry: xstar = y / (2c).
  Rng rng(35);
  auto obj = gen_quadratic(1, 3.0, 3.0000001, rng);
  CHECK(obj.dim == 1);
  const double c = obj.L / 2.0;
  const Vec g0 = obj.grad(Vec{0.0});
  const double y = -g0[0];
  CHECK((*obj.xstar)[0] == doctest::Approx(y / (2.0 * c)).epsilon(1e-6));
}

TEST_CASE("divergence example instance") {
  const auto dobj = example1();
  REQUIRE(dobj.n() == 3);
  REQUIRE(dobj.dim() == 3);

  SUBCASE("node gradients at the all-ones point") {
    const Vec x0 = {1.0, 1.0, 1.0};
    const Vec g1 = dobj.nodes[0].grad(x0);
    CHECK(g1[0] == doctest::Approx(-5.5));
    CHECK(g1[1] == doctest::Approx(4.5));
    CHECK(g1[2] == doctest::Approx(4.5));
    const Vec g2 = dobj.nodes[1].grad(x0);
    CHECK(g2[0] == doctest::Approx(4.5));
    CHECK(g2[1] == doctest::Approx(-5.5));
  }
  SUBCASE("aggregate gradient is the node mean") {
    Rng rng(36);
    for (int t = 0; t < 20; ++t) {
      Vec x(3);
      for (auto& e : x) e = rng.normal();
      Vec mean = zeros(3);
      for (const auto& f : dobj.nodes) axpy(1.0 / 3.0, f.grad(x), mean);
      CHECK(std::sqrt(dist_sq(mean, dobj.aggregate.grad(x))) <= 1e-12);
    }
  }
  SUBCASE("minimizer at the origin, D = 0") {
    CHECK(nrm2(dobj.aggregate.grad(zeros(3))) == 0.0);
    CHECK(dobj.D == 0.0);
    // strong convexity of the aggregate: eigenvalues (2/3){1,25,25} + 1/2
    CHECK(dobj.aggregate.mu == doctest::Approx(7.0 / 6.0));
    CHECK(dobj.aggregate.L == doctest::Approx(103.0 / 6.0));
    Rng pr(37);
    check_smoothness_and_convexity(dobj.aggregate, pr);
  }
}

TEST_CASE("counterexample family") {
  SUBCASE("coefficients satisfy the construction identities") {
    for (auto [d, d1] : std::vector<std::pair<int, int>>{{3, 1}, {4, 1}, {7, 3}, {10, 2}}) {
      const auto [b, c] = counterexample_coefficients(d, d1);
      const int d2 = d - d1;
      CHECK(-b * d1 + c * d2 == doctest::Approx(1.0));
      CHECK(b > c + 1.0);
    }
  }
  SUBCASE("d=3, d1=1 recovers a 3-node structure") {
    const auto dobj = counterexample_general(3, 1);
    CHECK(dobj.n() == 3);
    CHECK(dobj.dim() == 3);
    CHECK(dobj.D == 0.0);
    CHECK(nrm2(dobj.aggregate.grad(zeros(3))) == 0.0);
  }
  SUBCASE("subset enumeration count") {
    CHECK(counterexample_general(6, 2).n() == 15);
  }
  SUBCASE("guards") {
    CHECK_THROWS(counterexample_general(2, 1));
    CHECK_THROWS(counterexample_general(6, 3));  // d1 >= ceil(d/2)
  }
}

TEST_CASE("least squares from CSV") {
  const auto data = load_regression_csv(data_path("toy_linreg.csv"),
                                        RegKind::LeastSquares, false, false, 0.1);
  auto obj = make_objective(data);
  CHECK(obj.dim == 4);
  CHECK(obj.mu == doctest::Approx(0.1));

  SUBCASE("gradient check") {
    Rng pr(38);
    CHECK(gradient_check(obj, probe_points(4, 10, pr)) <= 1e-6);
  }
  SUBCASE("minimizer is stationary") {
    CHECK(nrm2(obj.grad(*obj.xstar)) <= 1e-8);
  }
  SUBCASE("smoothness and strong convexity samples") {
    Rng pr(39);
    check_smoothness_and_convexity(obj, pr);
  }
  SUBCASE("single closed-form row") {
    // one row a = (1, 0), y = 1, mu0 = 0.1:
    // f(x) = (x1 - 1)^2 / 2 + 0.05 |x|^2, minimized at x1 = 1 / 1.1, x2 = 0.
    RegressionData tiny;
    tiny.kind = RegKind::LeastSquares;
    tiny.mu0 = 0.1;
    tiny.features = {{1.0, 0.0}, {1.0, 0.0}};  // duplicated to satisfy m >= d
    tiny.labels = {1.0, 1.0};
    const auto small = make_objective(tiny);
    CHECK((*small.xstar)[0] == doctest::Approx(1.0 / 1.1));
    CHECK((*small.xstar)[1] == doctest::Approx(0.0));
  }
}

TEST_CASE("logistic regression from CSV") {
  const auto data = load_regression_csv(data_path("toy_logistic.csv"),
                                        RegKind::Logistic, true, true, 1e-3);
  auto obj = make_objective(data);
  CHECK(obj.dim == 3);

  SUBCASE("labels were remapped to +-1") {
    for (double l : data.labels) CHECK((l == 1.0 || l == -1.0));
  }
  SUBCASE("normalization zeroes feature means") {
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0.0, var = 0.0;
      for (const auto& r : data.features) mean += r[j];
      mean /= data.features.size();
      for (const auto& r : data.features) var += (r[j] - mean) * (r[j] - mean);
      var /= data.features.size();
      CHECK(std::fabs(mean) <= 1e-12);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("gradient check and stationarity") {
    Rng pr(40);
    CHECK(gradient_check(obj, probe_points(3, 10, pr)) <= 1e-6);
    CHECK(nrm2(obj.grad(*obj.xstar)) <= 1e-8);
  }
  SUBCASE("smoothness holds on samples") {
    Rng pr(41);
    check_smoothness_and_convexity(obj, pr);
  }
}

TEST_CASE("partition splits rows round-robin and keeps the mean-gradient identity") {
  const auto data = load_regression_csv(data_path("toy_linreg.csv"),
                                        RegKind::LeastSquares, false, false, 0.1);
  const auto dobj = partition(data, 4);
  REQUIRE(dobj.n() == 4);
  Rng rng(42);
  for (int t = 0; t < 10; ++t) {
    Vec x(dobj.dim());
    for (auto& e : x) e = rng.normal();
    Vec mean = zeros(dobj.dim());
    for (const auto& f : dobj.nodes) axpy(0.25, f.grad(x), mean);
    CHECK(std::sqrt(dist_sq(mean, dobj.aggregate.grad(x))) <= 1e-12);
  }
  CHECK(nrm2(dobj.aggregate.grad(*dobj.aggregate.xstar)) <= 1e-8);
  CHECK(dobj.D >= 0.0);
  // heterogeneous shards: the gradients at the optimum do not all vanish
  CHECK(dobj.D > 1e-8);
}

TEST_CASE("CSV error paths") {
  CHECK_THROWS(load_regression_csv(data_path("missing.csv"), RegKind::LeastSquares,
                                   false, false));
  // non-numeric cell
  const std::string bad = data_path("../tests/test_problems.cpp");
  CHECK_THROWS(load_regression_csv(bad, RegKind::LeastSquares, false, false));
}

TEST_CASE("replicate builds a zero-D distributed objective") {
  Rng rng(43);
  const auto obj = gen_quadratic(5, 1.0, 2.0, rng);
  const auto dobj = replicate(obj, 4);
  CHECK(dobj.n() == 4);
  CHECK(dobj.D == 0.0);
  CHECK(dobj.node_L == obj.L);
}
