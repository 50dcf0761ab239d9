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

#include "gcomp/distributed.hpp"

#include <cmath>
#include <stdexcept>

namespace gcomp {

Vec sample_noise(const Vec& grad, const NoiseModel& nm, Rng& rng) {
  if (nm.B < 0.0 || nm.C < 0.0) throw std::invalid_argument("noise B, C must be >= 0");
  Vec xi = zeros(grad.size());
  if (nm.exact()) return xi;
  const double var = (nm.B * nrm2_sq(grad) + nm.C) / grad.size();
  const double sd = std::sqrt(var);
  for (auto& e : xi) e = sd * rng.normal();
  return xi;
}

// ---- schedules -----------------------------------------------------------

Schedule Schedule::kind1(double delta, double B, double L, double mu) {
  Schedule s;
  s.kind = ScheduleKind::DecreasingLinearWeights;
  s.delta = delta;
  s.B = B;
  s.L = L;
  s.mu = mu;
  s.kappa = 56.0 * (2.0 * delta + B) * L / mu;
  return s;
}

Schedule Schedule::kind2(double delta, double B, double L, double mu, double eta) {
  Schedule s;
  s.kind = ScheduleKind::ConstantExpWeights;
  s.delta = delta;
  s.B = B;
  s.L = L;
  s.mu = mu;
  s.eta_const = eta > 0.0 ? eta : s.stepsize_cap();
  if (s.eta_const > s.stepsize_cap() * (1.0 + 1e-12)) {
    throw std::invalid_argument("constant stepsize exceeds 1/(14(2delta+B)L)");
  }
  return s;
}

Schedule Schedule::kind3(double delta, double B, double L, double mu, double eta) {
  Schedule s = kind2(delta, B, L, mu, eta);
  s.kind = ScheduleKind::ConstantUniformWeights;
  return s;
}

double Schedule::eta(long k) const {
  if (kind == ScheduleKind::DecreasingLinearWeights) {
    return 4.0 / (mu * (kappa + static_cast<double>(k)));
  }
  return eta_const;
}

double Schedule::weight_ratio(long k) const {
  switch (kind) {
    case ScheduleKind::DecreasingLinearWeights:
      return (kappa + static_cast<double>(k)) / (kappa + static_cast<double>(k) + 1.0);
    case ScheduleKind::ConstantExpWeights:
      return 1.0 - mu * eta_const / 2.0;
    case ScheduleKind::ConstantUniformWeights:
      return 1.0;
  }
  return 1.0;
}

double Schedule::weight(long k) const {
  switch (kind) {
    case ScheduleKind::DecreasingLinearWeights:
      return kappa + static_cast<double>(k);
    case ScheduleKind::ConstantExpWeights:
      return std::pow(1.0 - mu * eta_const / 2.0, -static_cast<double>(k + 1));
    case ScheduleKind::ConstantUniformWeights:
      return 1.0;
  }
  return 1.0;
}

// ---- traces ----------------------------------------------------------------

long DistTrace::first_ergodic_below(double target) const {
  for (const auto& r : rows) {
    if (r.f_gap_ergodic <= target) return r.k;
  }
  return -1;
}

namespace {

// Ergodic average maintained in normalized form: u_k = W_{k-1} / w_k obeys
// u_{k+1} = (w_k / w_{k+1}) (u_k + 1), and the update of the running average
// uses the ratio w_k / W_k = 1 / (u_k + 1). No weight is ever materialized,
// so geometric kind-2 weights cannot overflow.
struct ErgodicAverage {
  Vec xbar;
  double u = 0.0;
  bool started = false;

  void add(const Vec& x, double ratio_prev_over_cur) {
    if (!started) {
      xbar = x;
      u = 0.0;
      started = true;
      return;
    }
    u = ratio_prev_over_cur * (u + 1.0);
    const double r = 1.0 / (u + 1.0);
    for (std::size_t i = 0; i < xbar.size(); ++i) xbar[i] += (x[i] - xbar[i]) * r;
  }
};

}  // namespace

DistTrace run_dcgd_naive(const DistributedObjective& dobj, const CompressorSpec& spec,
                         double eta, long K, Rng& rng, const DistOptions& opts) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!dobj.aggregate.fstar) {
    throw std::invalid_argument("aggregate objective needs a known optimal value");
  }
  spec.validate(dobj.dim());
  const int n = dobj.n();
  const int d = dobj.dim();
  const double fstar = *dobj.aggregate.fstar;

  DistTrace trace;
  Vec x = opts.x0.empty() ? Vec(d, 1.0) : opts.x0;
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("x0 dimension mismatch");
  const double x0_norm = std::max(nrm2(x), 1e-300);

  std::vector<Rng> node_rngs;
  node_rngs.reserve(n);
  for (int i = 0; i < n; ++i) node_rngs.push_back(rng.substream(i));

  std::uint64_t bits = 0;
  for (long k = 0; k <= K; ++k) {
    DistRecord rec;
    rec.k = k;
    rec.f_gap_iterate = dobj.aggregate.value(x) - fstar;
    rec.f_gap_ergodic = rec.f_gap_iterate;  // no averaging in the naive scheme
    rec.bits_cum = bits;
    rec.eta_k = eta;
    rec.w_k = 1.0;
    const bool last = k == K;
    if (k % opts.record_every == 0 || last) trace.rows.push_back(rec);
    if (opts.keep_iterates) trace.iterates.push_back(x);

    if (!all_finite(x) || nrm2(x) > opts.divergence_factor * x0_norm) {
      trace.diverged = true;
      break;
    }
    if (last) break;

    Vec step = zeros(d);
    for (int i = 0; i < n; ++i) {
      const Vec g = dobj.nodes[i].grad(x);
      const CompressedMessage msg = compress(spec, g, node_rngs[i]);
      bits += msg.bit_cost;
      axpy(1.0, msg.decoded, step);
    }
    axpy(-eta / n, step, x);
  }
  trace.x_final = x;
  trace.xbar_final = x;
  return trace;
}

DistTrace run_ef_sgd(const DistributedObjective& dobj, const CompressorSpec& spec,
                     const Schedule& sched, const NoiseModel& nm, long K, Rng& rng,
                     const DistOptions& opts) {
  if (!dobj.aggregate.fstar) {
    throw std::invalid_argument("aggregate objective needs a known optimal value");
  }
  spec.validate(dobj.dim());
  const int n = dobj.n();
  const int d = dobj.dim();
  const double fstar = *dobj.aggregate.fstar;

  // The method wants a contractive operator. Unbiased compressors enter
  // through the 1/zeta scaling; biased ones are used as-is.
  CompressorSpec eff = spec;
  DistTrace trace;
  const B3Conversion conv = b3_conversion(spec, d);
  if (conv.scaled) {
    eff.scale = spec.scale * conv.lambda;
    trace.note = spec.name() + " scaled by 1/zeta = " + std::to_string(conv.lambda) +
                 " into B3(" + std::to_string(conv.delta) + ")";
  }

  Vec x = opts.x0.empty() ? Vec(d, 1.0) : opts.x0;
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("x0 dimension mismatch");

  std::vector<Vec> err(n, zeros(d));
  std::vector<Rng> node_rngs;
  node_rngs.reserve(n);
  for (int i = 0; i < n; ++i) node_rngs.push_back(rng.substream(i));

  ErgodicAverage avg;
  std::uint64_t bits = 0;
  const double x0_norm = std::max(nrm2(x), 1e-300);

  // Virtual iterate for the identity check.
  Vec xtilde = x;

  for (long k = 0; k <= K; ++k) {
    avg.add(x, k == 0 ? 1.0 : sched.weight_ratio(k - 1));

    DistRecord rec;
    rec.k = k;
    rec.f_gap_iterate = dobj.aggregate.value(x) - fstar;
    rec.f_gap_ergodic = dobj.aggregate.value(avg.xbar) - fstar;
    double max_err = 0.0;
    for (const auto& e : err) max_err = std::max(max_err, nrm2(e));
    rec.max_error_norm = max_err;
    rec.bits_cum = bits;
    rec.eta_k = sched.eta(k);
    rec.w_k = sched.weight(k);
    const bool last = k == K;
    if (k % opts.record_every == 0 || last) trace.rows.push_back(rec);
    if (opts.keep_iterates) trace.iterates.push_back(x);

    if (!all_finite(x) || nrm2(x) > opts.divergence_factor * x0_norm) {
      trace.diverged = true;
      break;
    }
    if (last) break;

    const double eta_k = sched.eta(k);
    Vec sum_msgs = zeros(d);
    Vec sum_grads = zeros(d);
    for (int i = 0; i < n; ++i) {
      Vec g = dobj.nodes[i].grad(x);
      if (!nm.exact()) {
        const Vec xi = sample_noise(g, nm, node_rngs[i]);
        axpy(1.0, xi, g);
      }
      axpy(1.0, g, sum_grads);
      Vec m = err[i];
      axpy(eta_k, g, m);
      if (nrm1(m) == 0.0 && spec.kind == Kind::AdaptiveRandomSparse) {
        err[i] = std::move(m);  // nothing to send; the carried error is zero
        continue;
      }
      const CompressedMessage msg = compress(eff, m, node_rngs[i]);
      bits += msg.bit_cost;
      axpy(-1.0, msg.decoded, m);
      err[i] = std::move(m);
      axpy(1.0, msg.decoded, sum_msgs);
    }
    axpy(-1.0 / n, sum_msgs, x);

    // x~ <- x~ - (eta_k / n) sum g_i must match x - (1/n) sum e_i exactly.
    axpy(-eta_k / n, sum_grads, xtilde);
    Vec recon = x;
    for (const auto& e : err) axpy(-1.0 / n, e, recon);
    const double viol = std::sqrt(dist_sq(recon, xtilde)) /
                        std::max(1.0, std::sqrt(nrm2_sq(xtilde)));
    trace.ef_identity_max_err = std::max(trace.ef_identity_max_err, viol);
  }
  trace.x_final = x;
  trace.xbar_final = avg.xbar;
  return trace;
}

double theorem_bound(ScheduleKind kind, double delta, double B, double C, double D,
                     double L, double mu, int n, double r0, long K) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  const double two_delta_b = 2.0 * delta + B;
  const double a1 = L * L * two_delta_b * two_delta_b * r0 / mu;
  const double a2 = (C * (1.0 + 1.0 / n) + D * (2.0 * B / n + 3.0 * delta)) / mu;
  const double a3 = L * two_delta_b * r0;
  const double a4 = 28.0 * L * two_delta_b / mu;
  const double a5 =
      std::sqrt(C * (1.0 + 1.0 / n) + D * (2.0 * B / n + 3.0 * delta)) * std::sqrt(r0);
  const double k = static_cast<double>(K);
  switch (kind) {
    case ScheduleKind::DecreasingLinearWeights:
      return a1 / (k * k) + a2 / k;
    case ScheduleKind::ConstantExpWeights:
      return a3 * std::exp(-k / a4) + a2 / k;
    case ScheduleKind::ConstantUniformWeights:
      return a3 / k + a5 / std::sqrt(k);
  }
  throw std::logic_error("unreachable schedule kind");
}

}  // namespace gcomp
