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

#include "gcomp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcomp {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// t^2 times the density of the i-th (ascending) order statistic out of d.
struct OrderStatIntegrand {
  int d, i;
  double mu, sigma;
  OrderMode mode;
  double log_comb;  // lgamma(d+1) - lgamma(i) - lgamma(d-i+1)

  double operator()(double t) const {
    double cdf, sf, pdf;
    if (mode == OrderMode::Signed) {
      const double z = (t - mu) / sigma;
      cdf = norm_cdf(z);
      sf = norm_sf(z);
      pdf = norm_pdf(z) / sigma;
    } else {
      if (t < 0.0) return 0.0;
      const double zp = (t - mu) / sigma, zm = (t + mu) / sigma;
      cdf = norm_cdf(zp) - norm_cdf(-zm);
      sf = norm_sf(zp) + norm_sf(zm);
      pdf = (norm_pdf(zp) + norm_pdf(zm)) / sigma;
    }
    double log_term = log_comb;
    if (i > 1) {
      if (cdf <= 0.0) return 0.0;
      log_term += (i - 1) * std::log(cdf);
    }
    if (d - i > 0) {
      if (sf <= 0.0) return 0.0;
      log_term += (d - i) * std::log(sf);
    }
    const double density = std::exp(log_term) * pdf;
    return t * t * density;
  }
};

struct AdaptiveSimpson {
  const OrderStatIntegrand& f;
  int max_depth_hits = 0;

  double recurse(double a, double fa, double b, double fb, double m, double fm,
                 double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
      ++max_depth_hits;
      return left + right + delta / 15.0;
    }
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return recurse(a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           recurse(m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
  }

  double integrate(double a, double b, double tol) {
    // Pre-split so the sharply peaked densities at large d are seen.
    const int panels = 64;
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double pa = a + p * h, pb = pa + h, pm = 0.5 * (pa + pb);
      const double fa = f(pa), fb = f(pb), fm = f(pm);
      const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
      total += recurse(pa, fa, pb, fb, pm, fm, whole, tol / panels, 48);
    }
    return total;
  }
};

double sample_coord(CoordDist dist, double mu0, double sigma, Rng& rng) {
  switch (dist) {
    case CoordDist::Uniform01:
      return rng.uniform();
    case CoordDist::StdExponential:
      return -std::log1p(-rng.uniform());
    case CoordDist::Gaussian:
      return mu0 + sigma * rng.normal();
  }
  return 0.0;
}

// Sum of the d-k smallest squared magnitudes (what top-k discards).
double tail_energy(Vec& squares, int k) {
  const int d = static_cast<int>(squares.size());
  if (k >= d) return 0.0;
  std::nth_element(squares.begin(), squares.begin() + (d - k), squares.end());
  double s = 0.0;
  for (int i = 0; i < d - k; ++i) s += squares[i];
  return s;
}

}  // namespace

UniformRatios uniform_ratio_closed_form(int d, int k) {
  if (k < 1 || k > d) throw std::invalid_argument("need 1 <= k <= d");
  UniformRatios r;
  const double dd = d;
  r.variance_ratio = (1.0 - k / (dd + 1.0)) * (1.0 - k / (dd + 2.0));
  r.saving_ratio_top1 = 3.0 * dd / (dd + 2.0);
  return r;
}

double exponential_saving_ratio(int d) {
  if (d < 1) throw std::invalid_argument("need d >= 1");
  double h1 = 0.0, h2 = 0.0;
  for (int i = 1; i <= d; ++i) {
    h1 += 1.0 / i;
    h2 += 1.0 / (static_cast<double>(i) * i);
  }
  return 0.5 * h2 + 0.5 * h1 * h1;
}

double gaussian_order_stat_second_moment(int d, int i, double mu0, double sigma,
                                         OrderMode mode) {
  if (i < 1 || i > d) throw std::invalid_argument("need 1 <= i <= d");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  OrderStatIntegrand f{d, i, mu0, sigma, mode,
                       std::lgamma(d + 1.0) - std::lgamma(static_cast<double>(i)) -
                           std::lgamma(d - i + 1.0)};
  double lo, hi;
  if (mode == OrderMode::Signed) {
    lo = mu0 - 12.0 * sigma;
    hi = mu0 + 12.0 * sigma;
  } else {
    lo = 0.0;
    hi = std::fabs(mu0) + 12.0 * sigma;
  }
  AdaptiveSimpson simpson{f};
  const double val = simpson.integrate(lo, hi, 1e-8);
  if (simpson.max_depth_hits > 0) {
    throw std::runtime_error("order-statistic quadrature did not converge");
  }
  return val;
}

double gaussian_topk_saving(int d, int k, double mu0, double sigma, OrderMode mode) {
  if (k < 1 || k > d) throw std::invalid_argument("need 1 <= k <= d");
  double s = 0.0;
  for (int i = d - k + 1; i <= d; ++i) {
    s += gaussian_order_stat_second_moment(d, i, mu0, sigma, mode);
  }
  return s;
}

SavingsReport empirical_savings(CoordDist dist, double mu0, double sigma, int d,
                                int k, long n_mc, Rng& rng) {
  if (k < 1 || k > d) throw std::invalid_argument("need 1 <= k <= d");
  if (n_mc < 1) throw std::invalid_argument("need n_mc >= 1");
  SavingsReport rep;
  rep.dist = dist;
  rep.mu0 = mu0;
  rep.sigma = sigma;
  rep.d = d;
  rep.k = k;
  rep.n_mc = n_mc;

  double sum_norm = 0.0, sum_otop = 0.0, sum_otop_sq = 0.0;
  Vec squares(d);
  for (long it = 0; it < n_mc; ++it) {
    double norm_sq = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = sample_coord(dist, mu0, sigma, rng);
      squares[j] = v * v;
      norm_sq += v * v;
    }
    const double otop = tail_energy(squares, k);
    sum_norm += norm_sq;
    sum_otop += otop;
    sum_otop_sq += otop * otop;
  }
  rep.e_norm_sq = sum_norm / n_mc;
  rep.omega_top = sum_otop / n_mc;
  rep.omega_rnd = (1.0 - static_cast<double>(k) / d) * rep.e_norm_sq;
  rep.s_top = rep.e_norm_sq - rep.omega_top;
  rep.s_rnd = rep.e_norm_sq - rep.omega_rnd;
  const double var = std::max(0.0, sum_otop_sq / n_mc - rep.omega_top * rep.omega_top);
  rep.std_err_omega_top = std::sqrt(var / n_mc);
  return rep;
}

SavingsReport operator_savings(const CompressorSpec& spec, CoordDist dist,
                               double mu0, double sigma, int d, long n_vectors,
                               int inner_mc, Rng& rng) {
  spec.validate(d);
  SavingsReport rep;
  rep.dist = dist;
  rep.mu0 = mu0;
  rep.sigma = sigma;
  rep.d = d;
  rep.k = spec.k;
  rep.n_mc = n_vectors;
  const int inner = spec.deterministic() ? 1 : std::max(1, inner_mc);

  double sum_norm = 0.0, sum_omega = 0.0, sum_omega_sq = 0.0;
  for (long it = 0; it < n_vectors; ++it) {
    Vec x(d);
    for (auto& e : x) e = sample_coord(dist, mu0, sigma, rng);
    const double norm_sq = nrm2_sq(x);
    double omega = 0.0;
    for (int r = 0; r < inner; ++r) {
      const CompressedMessage msg = compress(spec, x, rng);
      omega += dist_sq(msg.decoded, x);
    }
    omega /= inner;
    sum_norm += norm_sq;
    sum_omega += omega;
    sum_omega_sq += omega * omega;
  }
  rep.e_norm_sq = sum_norm / n_vectors;
  rep.omega_top = sum_omega / n_vectors;
  rep.s_top = rep.e_norm_sq - rep.omega_top;
  rep.omega_rnd = 0.0;
  rep.s_rnd = 0.0;
  const double var =
      std::max(0.0, sum_omega_sq / n_vectors - rep.omega_top * rep.omega_top);
  rep.std_err_omega_top = std::sqrt(var / n_vectors);
  return rep;
}

std::vector<CurveRow> variance_bits_curve(const std::vector<CompressorSpec>& specs,
                                          int d, int n_vectors, int inner_mc,
                                          Rng& rng) {
  std::vector<CurveRow> rows;
  std::uint64_t stream = 0;
  for (const auto& spec : specs) {
    spec.validate(d);
    CurveRow row;
    row.op = spec.name();
    if (spec.kind == Kind::RandK) {
      // (k/d)-rescaled form; the expectation over the subset is exact.
      row.normalized_variance = 1.0 - static_cast<double>(spec.k) / d;
      row.bits_per_coord =
          static_cast<double>(bit_cost_model(spec, d, spec.k)) / d;
    } else {
      Rng op_rng = rng.substream(stream++);
      const int inner = spec.deterministic() ? 1 : std::max(1, inner_mc);
      double nv_sum = 0.0;
      double bits_sum = 0.0;
      long bit_draws = 0;
      for (int v = 0; v < n_vectors; ++v) {
        Vec x(d);
        for (auto& e : x) e = op_rng.normal();
        const double norm_sq = nrm2_sq(x);
        double omega = 0.0;
        for (int r = 0; r < inner; ++r) {
          const CompressedMessage msg = compress(spec, x, op_rng);
          omega += dist_sq(msg.decoded, x);
          bits_sum += static_cast<double>(msg.bit_cost);
          ++bit_draws;
        }
        nv_sum += omega / inner / norm_sq;
      }
      row.normalized_variance = nv_sum / n_vectors;
      row.bits_per_coord = bits_sum / bit_draws / d;
    }
    row.implied_delta = row.normalized_variance < 1.0
                            ? 1.0 / (1.0 - row.normalized_variance)
                            : std::numeric_limits<double>::infinity();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gcomp
