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

#include "gcomp/cgd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcomp {

namespace {

double pick_eta(const CgdConfig& cfg, double L) {
  switch (cfg.rule) {
    case StepRule::Manual:
      if (!(cfg.eta_manual > 0.0)) throw std::invalid_argument("manual eta must be > 0");
      return cfg.eta_manual;
    case StepRule::OneOverL:
      if (cfg.class_params.tag != ClassTag::B3 && cfg.class_params.tag != ClassTag::U) {
        throw std::invalid_argument("1/L stepsize expects B3 class parameters");
      }
      return 1.0 / L;
    case StepRule::OneOverBetaL:
      if (cfg.class_params.tag != ClassTag::B1 && cfg.class_params.tag != ClassTag::B2) {
        throw std::invalid_argument("1/(beta L) stepsize expects B1 or B2 parameters");
      }
      return 1.0 / (cfg.class_params.beta * L);
  }
  throw std::logic_error("unreachable step rule");
}

}  // namespace

long CgdTrace::first_below(double target) const {
  for (const auto& r : rows) {
    if (r.f_gap <= target) return r.k;
  }
  return -1;
}

CgdTrace run_cgd(const Objective& obj, const CompressorSpec& spec,
                 const CgdConfig& cfg, Rng& rng) {
  if (cfg.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!obj.fstar.has_value()) {
    throw std::invalid_argument("objective needs a known optimal value for the trace");
  }
  spec.validate(obj.dim);

  CgdTrace trace;
  trace.eta = pick_eta(cfg, obj.L);
  trace.rows.reserve(cfg.iterations + 1);

  Vec x = cfg.x0.empty() ? zeros(obj.dim) : cfg.x0;
  if (static_cast<int>(x.size()) != obj.dim) {
    throw std::invalid_argument("x0 dimension mismatch");
  }

  const double fstar = *obj.fstar;
  double bound = obj.value(x) - fstar;
  std::uint64_t bits = 0;

  for (long k = 0; k <= cfg.iterations; ++k) {
    const double f_gap = obj.value(x) - fstar;
    const Vec g = obj.grad(x);
    const double gg = nrm2_sq(g);

    CgdRecord rec;
    rec.k = k;
    rec.f_gap = f_gap;
    rec.grad_norm = std::sqrt(gg);
    rec.theory_bound = bound;
    rec.bits_cum = bits;
    rec.delta_k = std::numeric_limits<double>::quiet_NaN();

    if (!std::isfinite(f_gap) || !all_finite(x)) {
      trace.diverged = true;
      trace.rows.push_back(rec);
      break;
    }
    if (k == cfg.iterations) {
      trace.rows.push_back(rec);
      break;
    }

    double delta_k;
    double factor;
    if (gg == 0.0) {
      // Fixed point: every operator maps 0 to 0 (adaptive sparsification is
      // undefined there, so skip the call).
      delta_k = 1.0;
      factor = 1.0 - trace.eta * obj.mu;
      rec.delta_k = delta_k;
      trace.rows.push_back(rec);
      bound *= factor;
      continue;
    }

    const CompressedMessage msg = compress(spec, g, rng);
    bits += msg.bit_cost;

    // Realized contraction at this step; the ratio can exceed 1 for
    // aggressive operators, in which case delta_k is negative and the
    // per-step factor exceeds 1.
    const double ratio = dist_sq(msg.decoded, g) / gg;
    if (ratio == 1.0) {
      delta_k = std::numeric_limits<double>::infinity();
      factor = 1.0;
    } else {
      delta_k = 1.0 / (1.0 - ratio);
      factor = 1.0 - trace.eta * obj.mu / delta_k;
    }
    rec.delta_k = delta_k;
    trace.rows.push_back(rec);
    bound *= factor;

    axpy(-trace.eta, msg.decoded, x);
  }
  return trace;
}

double rate_bound(const ClassParams& params, double L, double mu, long K) {
  if (!(mu > 0.0) || !(L >= mu)) throw std::invalid_argument("need 0 < mu <= L");
  params.validate();
  double factor = 0.0;
  switch (params.tag) {
    case ClassTag::B1:
      factor = 1.0 - params.alpha / (params.beta * params.beta) * mu / L;
      break;
    case ClassTag::B2:
      factor = 1.0 - params.gamma / params.beta * mu / L;
      break;
    case ClassTag::B3:
      factor = 1.0 - mu / (L * params.delta);
      break;
    case ClassTag::U:
      throw std::invalid_argument("rate_bound is defined for the biased classes");
  }
  if (factor < 0.0 || factor >= 1.0) {
    throw std::invalid_argument("contraction factor outside [0, 1): inconsistent parameters");
  }
  return std::pow(factor, static_cast<double>(K));
}

}  // namespace gcomp
