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

#include "gcomp/classes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gcomp {

namespace {

constexpr double kDetTol = 1e-12;

// Running mean/variance (Welford).
struct Acc {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  double var() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double std_err() const { return n > 0 ? std::sqrt(var() / n) : 0.0; }
};

// Monte Carlo moments of C on one fixed vector, all normalized by |x|^2.
struct VectorMoments {
  Acc m2_ratio;    // |C(x)|^2 / |x|^2
  Acc dot_ratio;   // <C(x), x> / |x|^2
  Acc dist_ratio;  // |C(x) - x|^2 / |x|^2
  std::vector<Acc> component_dev;  // C(x)_i - x_i, only filled for U claims
  double diff_sup = 0.0;           // max over draws of |C(x) - x|_inf
};

VectorMoments probe_vector(const OperatorUnderTest& op, const Vec& x, int n_mc,
                           bool track_components, Rng& rng) {
  VectorMoments vm;
  const double xx = nrm2_sq(x);
  const int n = op.deterministic ? 1 : n_mc;
  if (track_components) vm.component_dev.resize(x.size());
  for (int i = 0; i < n; ++i) {
    const Vec c = op.apply(x, rng);
    vm.m2_ratio.add(nrm2_sq(c) / xx);
    vm.dot_ratio.add(dot(c, x) / xx);
    vm.dist_ratio.add(dist_sq(c, x) / xx);
    if (track_components) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        vm.component_dev[j].add(c[j] - x[j]);
        vm.diff_sup = std::max(vm.diff_sup, std::fabs(c[j] - x[j]));
      }
    }
  }
  return vm;
}

double stochastic_tol(const Acc& a, bool deterministic) {
  if (deterministic) return kDetTol;
  return std::max(4.0 * a.std_err(), kDetTol);
}

std::vector<Vec> fixtures(int dim) {
  std::vector<Vec> out;
  out.push_back(Vec(dim, 1.0));  // all-equal: extremal for the sparsifiers
  Vec onehot = zeros(dim);
  onehot[0] = 1.0;
  out.push_back(onehot);
  Vec geo(dim), alt(dim);
  for (int i = 0; i < dim; ++i) {
    geo[i] = std::ldexp(1.0, -(i % 64));  // geometric decay, on the dyadic grid
    alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  }
  out.push_back(geo);
  out.push_back(alt);
  return out;
}

std::vector<Vec> plan_vectors_impl(const SamplerPlan::Block& block, bool adversarial,
                                   Rng& rng) {
  std::vector<Vec> out;
  for (int v = 0; v < block.n_gaussian; ++v) {
    Vec x(block.dim);
    do {
      for (auto& e : x) e = rng.normal();
    } while (nrm2_sq(x) == 0.0);
    out.push_back(std::move(x));
  }
  if (adversarial) {
    for (auto& f : fixtures(block.dim)) out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

// ---- ClassParams ----------------------------------------------------------

ClassParams ClassParams::b1(double alpha, double beta) {
  ClassParams p;
  p.tag = ClassTag::B1;
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

ClassParams ClassParams::b2(double gamma, double beta) {
  ClassParams p;
  p.tag = ClassTag::B2;
  p.gamma = gamma;
  p.beta = beta;
  return p;
}

ClassParams ClassParams::b3(double delta) {
  ClassParams p;
  p.tag = ClassTag::B3;
  p.delta = delta;
  return p;
}

ClassParams ClassParams::u(double zeta) {
  ClassParams p;
  p.tag = ClassTag::U;
  p.zeta = zeta;
  return p;
}

void ClassParams::validate() const {
  switch (tag) {
    case ClassTag::B1:
      if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("B1 parameters must be positive");
      if (beta * beta < alpha * (1.0 - 1e-12))
        throw std::invalid_argument("B1 requires beta^2 >= alpha");
      break;
    case ClassTag::B2:
      if (!(gamma > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("B2 parameters must be positive");
      if (beta < gamma * (1.0 - 1e-12))
        throw std::invalid_argument("B2 requires beta >= gamma");
      break;
    case ClassTag::B3:
      if (!(delta >= 1.0)) throw std::invalid_argument("B3 requires delta >= 1");
      break;
    case ClassTag::U:
      if (!(zeta >= 1.0)) throw std::invalid_argument("U requires zeta >= 1");
      break;
  }
}

std::string ClassParams::describe() const {
  char buf[96];
  switch (tag) {
    case ClassTag::B1:
      std::snprintf(buf, sizeof buf, "B1(alpha=%.6g, beta=%.6g)", alpha, beta);
      break;
    case ClassTag::B2:
      std::snprintf(buf, sizeof buf, "B2(gamma=%.6g, beta=%.6g)", gamma, beta);
      break;
    case ClassTag::B3:
      std::snprintf(buf, sizeof buf, "B3(delta=%.6g)", delta);
      break;
    case ClassTag::U:
      std::snprintf(buf, sizeof buf, "U(zeta=%.6g)", zeta);
      break;
  }
  return buf;
}

int ClassParams::inequality_count() const {
  return tag == ClassTag::B3 ? 1 : 2;
}

// ---- operators under test ---------------------------------------------

OperatorUnderTest make_operator(const CompressorSpec& spec) {
  OperatorUnderTest op;
  op.name = spec.name();
  op.deterministic = spec.deterministic();
  op.apply = [spec](const Vec& x, Rng& rng) { return compress(spec, x, rng).decoded; };
  return op;
}

OperatorUnderTest make_scaled_operator(const CompressorSpec& spec, double lambda) {
  CompressorSpec scaled = spec;
  scaled.scale = spec.scale * lambda;
  OperatorUnderTest op = make_operator(scaled);
  op.name = spec.name() + "*" + std::to_string(lambda);
  return op;
}

// ---- sampler plan ---------------------------------------------------------

SamplerPlan SamplerPlan::defaults() {
  SamplerPlan plan;
  plan.blocks = {{10, 60, 2000}, {100, 200, 2000}, {10000, 10, 200}};
  return plan;
}

SamplerPlan SamplerPlan::quick(int dim, int n_gaussian, int n_mc) {
  SamplerPlan plan;
  plan.blocks = {{dim, n_gaussian, n_mc}};
  return plan;
}

std::vector<Vec> sample_plan_vectors(const SamplerPlan::Block& block,
                                     bool adversarial, Rng& rng) {
  return plan_vectors_impl(block, adversarial, rng);
}

// ---- estimation ------------------------------------------------------------

ClassParams estimate_params(const OperatorUnderTest& op, ClassTag tag,
                            const SamplerPlan& plan, Rng& rng) {
  double alpha = std::numeric_limits<double>::infinity();
  double beta = 0.0;
  double gamma = std::numeric_limits<double>::infinity();
  double delta = 1.0;
  double zeta = 1.0;
  std::uint64_t stream = 0;
  for (const auto& block : plan.blocks) {
    Rng block_rng = rng.substream(stream++);
    for (const auto& x : sample_plan_vectors(block, plan.adversarial, block_rng)) {
      Rng op_rng = block_rng.substream(stream++);
      const VectorMoments vm = probe_vector(op, x, block.n_mc, false, op_rng);
      alpha = std::min(alpha, vm.m2_ratio.mean);
      gamma = std::min(gamma, vm.dot_ratio.mean);
      zeta = std::max(zeta, vm.m2_ratio.mean);
      if (vm.dot_ratio.mean <= 0.0) {
        throw std::domain_error(op.name +
                                ": nonpositive correlation <EC(x),x>; not in B1/B2");
      }
      beta = std::max(beta, vm.m2_ratio.mean / vm.dot_ratio.mean);
      if (vm.dist_ratio.mean >= 1.0) {
        if (tag == ClassTag::B3) {
          throw std::domain_error(op.name +
                                  ": E|C(x)-x|^2 >= |x|^2; empirical delta undefined");
        }
      } else {
        delta = std::max(delta, 1.0 / (1.0 - vm.dist_ratio.mean));
      }
    }
  }
  switch (tag) {
    case ClassTag::B1: return ClassParams::b1(alpha, beta);
    case ClassTag::B2: return ClassParams::b2(gamma, beta);
    case ClassTag::B3: return ClassParams::b3(delta);
    case ClassTag::U: return ClassParams::u(zeta);
  }
  throw std::logic_error("unreachable class tag");
}

MembershipReport verify_membership(const OperatorUnderTest& op,
                                   const ClassParams& claimed,
                                   const SamplerPlan& plan, Rng& rng) {
  claimed.validate();
  MembershipReport report;
  report.operator_name = op.name;
  report.claimed = claimed;
  report.seed = rng.root_seed();
  const int n_ineq = claimed.inequality_count();
  report.margins.assign(n_ineq, std::numeric_limits<double>::infinity());
  report.tolerances.assign(n_ineq, 0.0);

  // Estimation shares the probing pass.
  double est_alpha = std::numeric_limits<double>::infinity();
  double est_beta = 0.0;
  double est_gamma = std::numeric_limits<double>::infinity();
  double est_delta = 1.0;
  double est_zeta = 1.0;

  double worst_score = std::numeric_limits<double>::infinity();
  std::uint64_t stream = 0;
  const bool track_components = claimed.tag == ClassTag::U;

  // The unbiasedness check runs one test per component per vector; at 4
  // standard errors each, a plan probing 1e5 components would false-reject
  // every genuinely unbiased operator. Grow the threshold with the family
  // size so the whole sweep keeps a ~1e-4 false-rejection rate.
  double z_unbias = 4.0;
  if (track_components) {
    double family = 0.0;
    for (const auto& block : plan.blocks) {
      family += static_cast<double>(block.n_gaussian + (plan.adversarial ? 4 : 0)) *
                block.dim;
    }
    z_unbias = std::sqrt(2.0 * std::log(4.0 * std::max(family, 2.0))) + 1.0;
  }

  for (const auto& block : plan.blocks) {
    Rng block_rng = rng.substream(1000003 + stream++);
    for (const auto& x : sample_plan_vectors(block, plan.adversarial, block_rng)) {
      Rng op_rng = block_rng.substream(stream++);
      const VectorMoments vm =
          probe_vector(op, x, block.n_mc, track_components, op_rng);
      report.samples += vm.m2_ratio.n;

      est_alpha = std::min(est_alpha, vm.m2_ratio.mean);
      est_gamma = std::min(est_gamma, vm.dot_ratio.mean);
      est_zeta = std::max(est_zeta, vm.m2_ratio.mean);
      if (vm.dot_ratio.mean > 0.0) {
        est_beta = std::max(est_beta, vm.m2_ratio.mean / vm.dot_ratio.mean);
      }
      if (vm.dist_ratio.mean < 1.0) {
        est_delta = std::max(est_delta, 1.0 / (1.0 - vm.dist_ratio.mean));
      }

      double margin[2] = {0.0, 0.0};
      double tol[2] = {0.0, 0.0};
      switch (claimed.tag) {
        case ClassTag::B1:
          // alpha |x|^2 <= E|C|^2   and   E|C|^2 <= beta <EC, x>
          margin[0] = vm.m2_ratio.mean - claimed.alpha;
          tol[0] = stochastic_tol(vm.m2_ratio, op.deterministic);
          margin[1] = claimed.beta * vm.dot_ratio.mean - vm.m2_ratio.mean;
          tol[1] = stochastic_tol(vm.m2_ratio, op.deterministic) +
                   claimed.beta * stochastic_tol(vm.dot_ratio, op.deterministic);
          break;
        case ClassTag::B2:
          margin[0] = vm.dot_ratio.mean - claimed.gamma;
          tol[0] = stochastic_tol(vm.dot_ratio, op.deterministic);
          margin[1] = vm.dot_ratio.mean - vm.m2_ratio.mean / claimed.beta;
          tol[1] = stochastic_tol(vm.dot_ratio, op.deterministic) +
                   stochastic_tol(vm.m2_ratio, op.deterministic) / claimed.beta;
          break;
        case ClassTag::B3:
          margin[0] = (1.0 - 1.0 / claimed.delta) - vm.dist_ratio.mean;
          tol[0] = stochastic_tol(vm.dist_ratio, op.deterministic);
          break;
        case ClassTag::U: {
          // Unbiasedness: per-component |mean dev| within z standard errors
          // plus a rule-of-three term for branches too rare to observe (the
          // observed sup-norm spread of the messages bounds their gap). When
          // even that spread is unobserved (sparsifiers at tiny k/d), fall
          // back to the variance bound the claim itself implies:
          // Var(C_i) <= E|C|^2 <= zeta |x|^2.
          double unbias = std::numeric_limits<double>::infinity();
          const double claim_ci = z_unbias * std::sqrt(claimed.zeta) *
                                  std::sqrt(nrm2_sq(x)) /
                                  std::sqrt(static_cast<double>(
                                      std::max<long>(vm.m2_ratio.n, 1)));
          for (std::size_t ci = 0; ci < vm.component_dev.size(); ++ci) {
            const auto& acc = vm.component_dev[ci];
            double allowed = kDetTol;
            if (!op.deterministic) {
              const double empirical = std::max(z_unbias * acc.std_err(), kDetTol) +
                                       6.0 * vm.diff_sup / std::max<long>(acc.n, 1);
              allowed = std::max(empirical, claim_ci);
            }
            unbias = std::min(unbias, allowed - std::fabs(acc.mean));
          }
          margin[0] = unbias;
          tol[0] = 0.0;
          margin[1] = claimed.zeta - vm.m2_ratio.mean;
          tol[1] = stochastic_tol(vm.m2_ratio, op.deterministic);
          break;
        }
      }
      for (int i = 0; i < n_ineq; ++i) {
        if (margin[i] < report.margins[i]) {
          report.margins[i] = margin[i];
          report.tolerances[i] = tol[i];
        }
        if (margin[i] < -tol[i]) ++report.violations;
        const double score = margin[i] + tol[i];
        if (score < worst_score) {
          worst_score = score;
          report.worst_vector = x;
        }
      }
    }
  }

  switch (claimed.tag) {
    case ClassTag::B1: report.estimated = ClassParams::b1(est_alpha, est_beta); break;
    case ClassTag::B2: report.estimated = ClassParams::b2(est_gamma, est_beta); break;
    case ClassTag::B3: report.estimated = ClassParams::b3(est_delta); break;
    case ClassTag::U: report.estimated = ClassParams::u(est_zeta); break;
  }
  return report;
}

// ---- reductions ------------------------------------------------------------

std::pair<double, ClassParams> reduce(const ClassParams& params, ClassTag target) {
  params.validate();
  if (params.tag == target) return {1.0, params};
  switch (params.tag) {
    case ClassTag::B1:
      if (target == ClassTag::B2)
        return {1.0, ClassParams::b2(params.alpha, params.beta * params.beta)};
      if (target == ClassTag::B3)
        return {1.0 / params.beta,
                ClassParams::b3(params.beta * params.beta / params.alpha)};
      break;
    case ClassTag::B2:
      if (target == ClassTag::B1)
        return {1.0, ClassParams::b1(params.gamma * params.gamma, params.beta)};
      if (target == ClassTag::B3)
        return {1.0 / params.beta, ClassParams::b3(params.beta / params.gamma)};
      break;
    case ClassTag::B3:
      if (target == ClassTag::B2)
        return {1.0, ClassParams::b2(1.0 / (2.0 * params.delta), 2.0)};
      if (target == ClassTag::B1)
        return {1.0, ClassParams::b1(1.0 / (4.0 * params.delta * params.delta), 2.0)};
      break;
    case ClassTag::U:
      return {1.0, unbiased_to_biased(params.zeta, 1.0, target)};
  }
  throw std::invalid_argument("no reduction to the requested class");
}

ClassParams unbiased_to_biased(double zeta, double lambda, ClassTag target) {
  if (!(zeta >= 1.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("need zeta >= 1 and lambda > 0");
  }
  switch (target) {
    case ClassTag::B1:
      return ClassParams::b1(lambda * lambda, lambda * zeta);
    case ClassTag::B2:
      return ClassParams::b2(lambda, lambda * zeta);
    case ClassTag::B3: {
      if (!(zeta * lambda < 2.0)) {
        throw std::invalid_argument("B3 conversion requires zeta * lambda < 2");
      }
      return ClassParams::b3(1.0 / (lambda * (2.0 - zeta * lambda)));
    }
    case ClassTag::U:
      return ClassParams::u(zeta);
  }
  throw std::logic_error("unreachable target tag");
}

// ---- claimed memberships ----------------------------------------------

std::vector<ClassParams> table1_claims(const CompressorSpec& spec, int dim) {
  if (spec.scale != 1.0) {
    throw std::invalid_argument("table claims are defined for unscaled operators");
  }
  const double d = static_cast<double>(dim);
  std::vector<ClassParams> out;
  switch (spec.kind) {
    case Kind::Identity:
      out = {ClassParams::b1(1, 1), ClassParams::b2(1, 1), ClassParams::b3(1),
             ClassParams::u(1)};
      break;
    case Kind::RandK:
      out = {ClassParams::u(d / spec.k)};
      break;
    case Kind::BiasedRandomSparse: {
      const double q = *std::min_element(spec.probs.begin(), spec.probs.end());
      out = {ClassParams::b1(q, 1), ClassParams::b2(q, 1), ClassParams::b3(1.0 / q)};
      break;
    }
    case Kind::AdaptiveRandomSparse:
      out = {ClassParams::b1(1.0 / d, 1), ClassParams::b2(1.0 / d, 1),
             ClassParams::b3(d)};
      break;
    case Kind::TopK:
      out = {ClassParams::b1(spec.k / d, 1), ClassParams::b2(spec.k / d, 1),
             ClassParams::b3(d / spec.k)};
      break;
    case Kind::GeneralUnbiasedRounding:
      out = {ClassParams::u(0.25 * (spec.base + 1.0 / spec.base + 2.0))};
      break;
    case Kind::GeneralBiasedRounding: {
      const double b = spec.base;
      const double beta = 2.0 * b / (b + 1.0);
      const double gamma = 2.0 / (b + 1.0);
      out = {ClassParams::b1(gamma * gamma, beta), ClassParams::b2(gamma, beta),
             ClassParams::b3((b + 1.0) * (b + 1.0) / (4.0 * b))};
      break;
    }
    case Kind::NaturalCompression:
      out = {ClassParams::u(9.0 / 8.0)};
      break;
    case Kind::GeneralExpDithering:
    case Kind::NaturalDithering: {
      const double b = spec.kind == Kind::NaturalDithering ? 2.0 : spec.base;
      out = {ClassParams::u(dithering_zeta(b, spec.levels, spec.norm_order, dim))};
      break;
    }
    case Kind::TopKPlusDithering: {
      const double zb = dithering_zeta(spec.base, spec.levels, spec.norm_order, dim);
      out = {ClassParams::b1(spec.k / d, zb), ClassParams::b2(spec.k / d, zb),
             ClassParams::b3(d / spec.k * zb)};
      break;
    }
    case Kind::NormalForm:
      out = {ClassParams::u(25.0 / 24.0)};
      break;
  }
  return out;
}

B3Conversion b3_conversion(const CompressorSpec& spec_in, int dim) {
  // The conversion is defined for the unscaled operator; callers may pass a
  // spec that already carries the scaling being computed here.
  CompressorSpec spec = spec_in;
  spec.scale = 1.0;
  B3Conversion conv;
  if (spec.unbiased() && spec.kind != Kind::Identity) {
    double zeta = 1.0;
    for (const auto& claim : table1_claims(spec, dim)) {
      if (claim.tag == ClassTag::U) zeta = claim.zeta;
    }
    conv.lambda = 1.0 / zeta;
    conv.delta = zeta;  // 1 / (lambda (2 - zeta lambda)) at lambda = 1/zeta
    conv.scaled = zeta != 1.0;
    return conv;
  }
  for (const auto& claim : table1_claims(spec, dim)) {
    if (claim.tag == ClassTag::B3) conv.delta = claim.delta;
  }
  return conv;
}

// ---- stock roster --------------------------------------------------------

std::vector<RosterEntry> verification_roster() {
  std::vector<RosterEntry> roster;
  auto add = [&roster](const std::string& label, Kind kind, auto init) {
    RosterEntry e;
    e.label = label;
    e.spec.kind = kind;
    init(e.spec);
    roster.push_back(e);
  };
  auto nop = [](CompressorSpec&) {};
  add("identity", Kind::Identity, nop);
  add("rand_k", Kind::RandK, [](CompressorSpec& s) { s.k = 2; });
  add("biased_random_sparse", Kind::BiasedRandomSparse, nop);  // probs per dim
  add("adaptive_random_sparse", Kind::AdaptiveRandomSparse, nop);
  add("top_k", Kind::TopK, [](CompressorSpec& s) { s.k = 2; });
  add("general_unbiased_rounding", Kind::GeneralUnbiasedRounding,
      [](CompressorSpec& s) { s.base = 3.0; });
  add("unbiased_exp_rounding", Kind::GeneralUnbiasedRounding,
      [](CompressorSpec& s) { s.base = 1.5; });
  add("general_biased_rounding", Kind::GeneralBiasedRounding,
      [](CompressorSpec& s) { s.base = 3.0; });
  add("natural_compression", Kind::NaturalCompression, nop);
  add("general_exp_dithering", Kind::GeneralExpDithering, [](CompressorSpec& s) {
    s.base = 3.0;
    s.levels = 6;
    s.norm_order = 2.0;
  });
  add("natural_dithering", Kind::NaturalDithering, [](CompressorSpec& s) {
    s.levels = 8;
    s.norm_order = std::numeric_limits<double>::infinity();
  });
  add("topk_plus_dithering", Kind::TopKPlusDithering, [](CompressorSpec& s) {
    s.k = 2;
    s.base = 2.0;
    s.levels = 8;
    s.norm_order = std::numeric_limits<double>::infinity();
  });
  add("normal_form", Kind::NormalForm, nop);
  return roster;
}

CompressorSpec roster_at_dimension(const CompressorSpec& spec, int dim) {
  CompressorSpec s = spec;
  if (s.kind == Kind::BiasedRandomSparse && s.probs.empty()) {
    // inclusion probabilities cycling {1, 1/2, 1/4}: q = 1/4 at any dimension
    s.probs.resize(dim);
    const double vals[3] = {1.0, 0.5, 0.25};
    for (int i = 0; i < dim; ++i) s.probs[i] = vals[i % 3];
    if (dim < 3) s.probs.back() = 0.25;
  }
  return s;
}

// ---- JSON -------------------------------------------------------------------

namespace {

nlohmann::json params_json(const ClassParams& p) {
  nlohmann::json j;
  switch (p.tag) {
    case ClassTag::B1:
      j["class"] = "B1";
      j["alpha"] = p.alpha;
      j["beta"] = p.beta;
      break;
    case ClassTag::B2:
      j["class"] = "B2";
      j["gamma"] = p.gamma;
      j["beta"] = p.beta;
      break;
    case ClassTag::B3:
      j["class"] = "B3";
      j["delta"] = p.delta;
      break;
    case ClassTag::U:
      j["class"] = "U";
      j["zeta"] = p.zeta;
      break;
  }
  return j;
}

}  // namespace

nlohmann::json MembershipReport::to_json() const {
  nlohmann::json j;
  j["operator"] = operator_name;
  j["claimed"] = params_json(claimed);
  j["estimated"] = params_json(estimated);
  j["margins"] = margins;
  j["tolerances"] = tolerances;
  j["worst_vector"] = worst_vector;
  j["samples"] = samples;
  j["violations"] = violations;
  j["seed"] = seed;
  j["passed"] = passed();
  return j;
}

}  // namespace gcomp
