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

#include "gcomp/cgd.hpp"

using namespace gcomp;

namespace {

CgdConfig basic_config(long iters, const Vec& x0) {
  CgdConfig cfg;
  cfg.rule = StepRule::OneOverL;
  cfg.iterations = iters;
  cfg.class_params = ClassParams::b3(1.0);
  cfg.x0 = x0;
  return cfg;
}

}  // namespace

TEST_CASE("identity compressor recovers plain gradient descent") {
  Rng prng(51);
  const auto obj = gen_quadratic(20, 1.0, 10.0, prng);
  CompressorSpec id;
  id.kind = Kind::Identity;

  Vec x0 = *obj.xstar;
  for (auto& e : x0) e += 0.5;
  Rng rng(52);
  const auto trace = run_cgd(obj, id, basic_config(300, x0), rng);

  REQUIRE(trace.rows.size() == 301);
  CHECK_FALSE(trace.diverged);
  const double rate = 1.0 - obj.mu / obj.L;
  const double e0 = trace.rows[0].f_gap;
  double bound = e0;
  for (const auto& r : trace.rows) {
    CHECK(r.f_gap <= bound * (1 + 1e-12) + 1e-12);
    bound *= rate;
  }
  // delta_k of the identity is exactly 1 on gradient steps
  CHECK(trace.rows[5].delta_k == doctest::Approx(1.0));
}

TEST_CASE("top-k trajectory obeys the per-iteration product bound") {
  Rng prng(53);
  const auto obj = gen_quadratic(40, 1.0, 100.0, prng);
  CompressorSpec topk;
  topk.kind = Kind::TopK;
  topk.k = 4;

  Vec x0 = *obj.xstar;
  for (auto& e : x0) e += 0.3;
  Rng rng(54);
  const auto trace = run_cgd(obj, topk, basic_config(2000, x0), rng);
  CHECK_FALSE(trace.diverged);
  for (const auto& r : trace.rows) {
    CHECK(r.f_gap <= r.theory_bound + 1e-10);
  }
  // theory bound is non-increasing for a contractive deterministic operator
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    CHECK(trace.rows[i].theory_bound <= trace.rows[i - 1].theory_bound * (1 + 1e-12));
  }
  // and f decreases monotonically (eta <= 1/L with a contractive compressor)
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    CHECK(trace.rows[i].f_gap <= trace.rows[i - 1].f_gap * (1 + 1e-12) + 1e-15);
  }
}

TEST_CASE("adaptive product bound is dominated by the fixed class rate") {
  // delta_i <= d/k pointwise for top-k, so the running product sits below
  // (1 - mu/(L d/k))^k
  Rng prng(66);
  const auto obj = gen_quadratic(30, 1.0, 20.0, prng);
  CompressorSpec topk;
  topk.kind = Kind::TopK;
  topk.k = 6;
  Vec x0 = *obj.xstar;
  for (auto& e : x0) e += 0.4;
  Rng rng(67);
  const auto trace = run_cgd(obj, topk, basic_config(800, x0), rng);
  const double rate = 1.0 - obj.mu / (obj.L * 30.0 / 6.0);
  const double e0 = trace.rows.front().f_gap;
  double fixed = e0;
  for (const auto& r : trace.rows) {
    CHECK(r.theory_bound <= fixed * (1 + 1e-12));
    fixed *= rate;
  }
}

TEST_CASE("zero-gradient start is a fixed point") {
  Rng prng(55);
  const auto obj = gen_quadratic(8, 1.0, 5.0, prng);
  CompressorSpec topk;
  topk.kind = Kind::TopK;
  topk.k = 2;
  Rng rng(56);
  const auto trace = run_cgd(obj, topk, basic_config(50, *obj.xstar), rng);
  for (const auto& r : trace.rows) {
    CHECK(r.f_gap <= 1e-12);
  }
}

TEST_CASE("rate_bound per class") {
  SUBCASE("B3(1) at mu = L contracts to zero after one step") {
    CHECK(rate_bound(ClassParams::b3(1.0), 2.0, 2.0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("B1(k/d, 1) equals B3(d/k) (same complexity)") {
    const double b1 = rate_bound(ClassParams::b1(0.25, 1.0), 10.0, 1.0, 7);
    const double b3 = rate_bound(ClassParams::b3(4.0), 10.0, 1.0, 7);
    CHECK(b1 == doctest::Approx(b3));
  }
  SUBCASE("B3(9/8) at mu/L = 0.1, K = 100") {
    const double expect = std::pow(1.0 - 0.1 * 8.0 / 9.0, 100.0);
    CHECK(rate_bound(ClassParams::b3(9.0 / 8.0), 10.0, 1.0, 100) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("B2 uses gamma/beta") {
    const double expect = std::pow(1.0 - 0.5 * 0.2, 3.0);
    CHECK(rate_bound(ClassParams::b2(1.0, 2.0), 5.0, 1.0, 3) ==
          doctest::Approx(expect));
  }
  SUBCASE("inconsistent parameters are rejected") {
    CHECK_THROWS(rate_bound(ClassParams::b3(2.0), 1.0, 2.0, 1));  // mu > L
  }
}

TEST_CASE("stepsize rules") {
  Rng prng(57);
  const auto obj = gen_quadratic(10, 1.0, 4.0, prng);
  CompressorSpec topk;
  topk.kind = Kind::TopK;
  topk.k = 5;

  SUBCASE("1/(beta L) from B1 params") {
    CgdConfig cfg;
    cfg.rule = StepRule::OneOverBetaL;
    cfg.iterations = 3;
    cfg.class_params = ClassParams::b1(0.5, 2.0);
    Rng rng(58);
    const auto trace = run_cgd(obj, topk, cfg, rng);
    CHECK(trace.eta == doctest::Approx(1.0 / (2.0 * obj.L)));
  }
  SUBCASE("rule/class mismatches throw") {
    CgdConfig cfg;
    cfg.rule = StepRule::OneOverBetaL;
    cfg.iterations = 1;
    cfg.class_params = ClassParams::b3(2.0);
    Rng rng(59);
    CHECK_THROWS(run_cgd(obj, topk, cfg, rng));
    cfg.rule = StepRule::OneOverL;
    cfg.class_params = ClassParams::b1(0.5, 2.0);
    CHECK_THROWS(run_cgd(obj, topk, cfg, rng));
  }
  SUBCASE("manual eta must be positive") {
    CgdConfig cfg;
    cfg.rule = StepRule::Manual;
    cfg.eta_manual = 0.0;
    cfg.iterations = 1;
    Rng rng(60);
    CHECK_THROWS(run_cgd(obj, topk, cfg, rng));
  }
}

TEST_CASE("divergence is flagged and truncates the trace") {
  Rng prng(61);
  const auto obj = gen_quadratic(6, 1.0, 2.0, prng);
  CompressorSpec id;
  id.kind = Kind::Identity;
  CgdConfig cfg;
  cfg.rule = StepRule::Manual;
  cfg.eta_manual = 10.0 / obj.mu;  // way beyond stability
  cfg.iterations = 5000;
  Vec x0 = *obj.xstar;
  x0[0] += 1.0;
  cfg.x0 = x0;
  Rng rng(62);
  const auto trace = run_cgd(obj, id, cfg, rng);
  CHECK(trace.diverged);
  CHECK(trace.rows.size() < 5001);
}

TEST_CASE("seed determinism of stochastic runs") {
  Rng prng(63);
  const auto obj = gen_quadratic(12, 1.0, 10.0, prng);
  CompressorSpec rk;
  rk.kind = Kind::RandK;
  rk.k = 3;
  rk.scale = 3.0 / 12.0;  // contractive scaling
  Vec x0 = *obj.xstar;
  for (auto& e : x0) e += 1.0;

  Rng r1(99), r2(99);
  const auto t1 = run_cgd(obj, rk, basic_config(200, x0), r1);
  const auto t2 = run_cgd(obj, rk, basic_config(200, x0), r2);
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].f_gap == t2.rows[i].f_gap);  // bitwise equality
    CHECK(t1.rows[i].bits_cum == t2.rows[i].bits_cum);
  }
}

TEST_CASE("scaled rand-k also satisfies the product bound pathwise") {
  Rng prng(64);
  const auto obj = gen_quadratic(30, 1.0, 10.0, prng);
  CompressorSpec rk;
  rk.kind = Kind::RandK;
  rk.k = 3;
  rk.scale = 0.1;  // k/d
  Vec x0 = *obj.xstar;
  for (auto& e : x0) e += 0.5;
  Rng rng(65);
  const auto trace = run_cgd(obj, rk, basic_config(1500, x0), rng);
  CHECK_FALSE(trace.diverged);
  for (const auto& r : trace.rows) {
    CHECK(r.f_gap <= r.theory_bound + 1e-10);
  }
}
