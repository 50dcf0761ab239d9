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

#ifndef GCOMP_DISTRIBUTED_HPP
#define GCOMP_DISTRIBUTED_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gcomp/classes.hpp"
#include "gcomp/compressors.hpp"
#include "gcomp/problems.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

// Stochastic gradient noise g_i = grad f_i(x) + xi with
// E|xi|^2 = B |grad f_i(x)|^2 + C, met with equality by isotropic Gaussian
// noise of per-coordinate variance (B |g|^2 + C) / d.
struct NoiseModel {
  double B = 0.0;
  double C = 0.0;

  bool exact() const { return B == 0.0 && C == 0.0; }
};

Vec sample_noise(const Vec& grad, const NoiseModel& nm, Rng& rng);

// The three stepsize / iterate-weight regimes of the error-feedback method:
//   kind 1: eta_k = 4 / (mu (kappa + k)), w_k = kappa + k,
//           kappa = 56 (2 delta + B) L / mu
//   kind 2: eta_k = eta <= 1 / (14 (2 delta + B) L), w_k = (1 - mu eta/2)^-(k+1)
//   kind 3: same constant eta, w_k = 1
enum class ScheduleKind {
  DecreasingLinearWeights = 1,
  ConstantExpWeights = 2,
  ConstantUniformWeights = 3,
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::ConstantUniformWeights;
  double delta = 1.0;
  double B = 0.0;
  double L = 1.0;
  double mu = 1.0;
  double kappa = 0.0;      // kind 1
  double eta_const = 0.0;  // kinds 2-3

  static Schedule kind1(double delta, double B, double L, double mu);
  // eta = 0 picks the cap 1 / (14 (2 delta + B) L).
  static Schedule kind2(double delta, double B, double L, double mu, double eta = 0.0);
  static Schedule kind3(double delta, double B, double L, double mu, double eta = 0.0);

  double eta(long k) const;
  // w_{k} / w_{k+1}, used by the overflow-free ergodic accumulator.
  double weight_ratio(long k) const;
  double weight(long k) const;  // may overflow for kind 2 at huge k; the
                                // accumulator never relies on it
  double stepsize_cap() const { return 1.0 / (14.0 * (2.0 * delta + B) * L); }
};

struct DistRecord {
  long k = 0;
  double f_gap_iterate = 0.0;
  double f_gap_ergodic = 0.0;
  double max_error_norm = 0.0;
  std::uint64_t bits_cum = 0;
  double eta_k = 0.0;
  double w_k = 0.0;
};

struct DistTrace {
  std::vector<DistRecord> rows;
  bool diverged = false;
  Vec x_final;
  Vec xbar_final;
  // Worst per-step violation of the virtual-iterate identity
  // x~^{k+1} = x~^k - (eta_k / n) sum_i g_i^k (always tracked).
  double ef_identity_max_err = 0.0;
  // Iterates, kept when Options::keep_iterates is set.
  std::vector<Vec> iterates;
  std::string note;  // e.g. records an automatic unbiased->B3 scaling

  long first_ergodic_below(double target) const;
};

struct DistOptions {
  Vec x0;                 // empty = all-ones (the divergence examples' t*ones at t=1)
  bool keep_iterates = false;
  long record_every = 1;  // thin long traces; rows always include k = 0 and K
  double divergence_factor = 1e15;  // flag when |x| exceeds this times |x0|
};

// Naive distributed compressed GD: x <- x - eta (1/n) sum_i C_i(grad f_i(x)).
// Divergence is a recorded outcome, not an error.
DistTrace run_dcgd_naive(const DistributedObjective& dobj, const CompressorSpec& spec,
                         double eta, long K, Rng& rng, const DistOptions& opts = {});

// Error-feedback method: per node, m = e_i + eta_k g_i, send C(m), keep
// e_i <- m - C(m); server applies the average of the messages; the output is
// the weight-w_k ergodic average of the iterates. Unbiased compressors are
// scaled by lambda = 1/zeta into B3(zeta) automatically (noted in the trace).
DistTrace run_ef_sgd(const DistributedObjective& dobj, const CompressorSpec& spec,
                     const Schedule& sched, const NoiseModel& nm, long K, Rng& rng,
                     const DistOptions& opts = {});

// The rate expression of the matching schedule with unit hidden constants:
//   kind 1: A1 / K^2 + A2 / K
//   kind 2: A3 exp(-K / A4) + A2 / K
//   kind 3: A3 / K + A5 / sqrt(K)
// A1 = L^2 (2 delta + B)^2 r0 / mu, A2 = (C (1 + 1/n) + D (2B/n + 3 delta)) / mu,
// A3 = L (2 delta + B) r0, A4 = 28 L (2 delta + B) / mu,
// A5 = sqrt(C (1 + 1/n) + D (2B/n + 3 delta)) * sqrt(r0), with r0 = |x0 - x*|^2.
double theorem_bound(ScheduleKind kind, double delta, double B, double C, double D,
                     double L, double mu, int n, double r0, long K);

}  // namespace gcomp

#endif
