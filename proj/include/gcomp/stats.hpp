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

#ifndef GCOMP_STATS_HPP
#define GCOMP_STATS_HPP

#include <string>
#include <vector>

#include "gcomp/compressors.hpp"
#include "gcomp/rng.hpp"
#include "gcomp/vec.hpp"

namespace gcomp {

// Expected-savings machinery comparing greedy (top-k) against rescaled random
// sparsification under i.i.d. coordinate models. Conventions:
//   omega_rnd^k(x) = (1 - k/d) |x|^2   (variance of (k/d) C_rnd, exact in S)
//   omega_top^k(x) = sum of the d-k smallest coordinate squares
//   s = |x|^2 - omega (the preserved energy)

struct UniformRatios {
  double variance_ratio;     // E omega_top / E omega_rnd = (1-k/(d+1))(1-k/(d+2))
  double saving_ratio_top1;  // E s^1_top / E s^1_rnd = 3d / (d+2)
};
UniformRatios uniform_ratio_closed_form(int d, int k);

// E s^1_top / E s^1_rnd for standard exponential coordinates:
// (1/2) sum 1/i^2 + (1/2) (sum 1/i)^2 over i = 1..d.
double exponential_saving_ratio(int d);

enum class OrderMode {
  Signed,    // order statistics of the raw coordinates
  Absolute,  // order statistics of |x_i| (what top-k selection sees)
};

// E[x_(i)^2] of the i-th order statistic (ascending, 1-based) of d draws from
// N(mu0, sigma^2), by adaptive quadrature over the order-statistic density.
// Absolute tolerance ~1e-6.
double gaussian_order_stat_second_moment(int d, int i, double mu0, double sigma,
                                         OrderMode mode);

// Sum of the top k second moments: the expected saving of Top-k.
double gaussian_topk_saving(int d, int k, double mu0, double sigma, OrderMode mode);

enum class CoordDist { Uniform01, StdExponential, Gaussian };

struct SavingsReport {
  CoordDist dist = CoordDist::Gaussian;
  double mu0 = 0.0, sigma = 1.0;
  int d = 0, k = 0;
  double s_rnd = 0.0, s_top = 0.0;
  double omega_rnd = 0.0, omega_top = 0.0;
  double e_norm_sq = 0.0;  // E |x|^2 under the same sampling
  long n_mc = 0;
  double std_err_omega_top = 0.0;
};

// Monte Carlo over vectors; per-vector omegas are exact (expectation over the
// sparsifier randomness is closed-form for both operators).
SavingsReport empirical_savings(CoordDist dist, double mu0, double sigma, int d,
                                int k, long n_mc, Rng& rng);

// Savings of an arbitrary operator: per sampled vector, omega(x) estimated by
// inner Monte Carlo over the operator randomness, s(x) = |x|^2 - omega(x).
SavingsReport operator_savings(const CompressorSpec& spec, CoordDist dist,
                               double mu0, double sigma, int d, long n_vectors,
                               int inner_mc, Rng& rng);

struct CurveRow {
  std::string op;
  double bits_per_coord = 0.0;
  double normalized_variance = 0.0;  // E |C(x)-x|^2 / |x|^2, averaged
  double implied_delta = 0.0;        // 1 / (1 - nv); inf when nv >= 1
};

// Normalized variance (and implied contraction delta) against bits per
// coordinate for each operator on Gaussian vectors. Rand-k is evaluated in
// its (k/d)-rescaled form with the subset expectation taken in closed form,
// so its normalized variance is exactly 1 - k/d.
std::vector<CurveRow> variance_bits_curve(const std::vector<CompressorSpec>& specs,
                                          int d, int n_vectors, int inner_mc,
                                          Rng& rng);

}  // namespace gcomp

#endif
