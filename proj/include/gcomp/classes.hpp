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

#ifndef GCOMP_CLASSES_HPP
#define GCOMP_CLASSES_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gcomp/compressors.hpp"
#include "gcomp/rng.hpp"
#include "gcomp/vec.hpp"

namespace gcomp {

// The four operator classes and their parameters:
//   B1(alpha, beta):  alpha|x|^2 <= E|C(x)|^2 <= beta <EC(x), x>
//   B2(gamma, beta):  max(gamma|x|^2, E|C(x)|^2 / beta) <= <EC(x), x>
//   B3(delta):        E|C(x) - x|^2 <= (1 - 1/delta) |x|^2
//   U(zeta):          EC(x) = x and E|C(x)|^2 <= zeta |x|^2
enum class ClassTag { B1, B2, B3, U };

struct ClassParams {
  ClassTag tag = ClassTag::B3;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double zeta = 0.0;

  static ClassParams b1(double alpha, double beta);
  static ClassParams b2(double gamma, double beta);
  static ClassParams b3(double delta);
  static ClassParams u(double zeta);

  void validate() const;  // positivity plus beta^2 >= alpha, beta >= gamma,
                          // delta >= 1, zeta >= 1
  std::string describe() const;
  int inequality_count() const;  // B1: 2, B2: 2, B3: 1, U: 2
};

// The operator under test, reduced to what estimation needs: a draw of C(x)
// and whether repeated draws are needed at all.
struct OperatorUnderTest {
  std::function<Vec(const Vec&, Rng&)> apply;
  bool deterministic = false;
  std::string name;
};

OperatorUnderTest make_operator(const CompressorSpec& spec);
// lambda * C; class parameters transform per the scaling rules.
OperatorUnderTest make_scaled_operator(const CompressorSpec& spec, double lambda);

// Which vectors to probe and how hard. Gaussian draws per dimension plus the
// adversarial fixtures (all-equal, one-hot, geometric decay) that attain the
// known extremal parameters.
struct SamplerPlan {
  struct Block {
    int dim = 100;
    int n_gaussian = 200;
    int n_mc = 2000;
  };
  std::vector<Block> blocks;
  bool adversarial = true;

  static SamplerPlan defaults();        // d in {10, 100, 10000}
  static SamplerPlan quick(int dim, int n_gaussian, int n_mc);
};

// The probe vectors of one plan block: Gaussian draws plus, when enabled, the
// adversarial fixtures (all-equal, one-hot, geometric decay, alternating).
std::vector<Vec> sample_plan_vectors(const SamplerPlan::Block& block,
                                     bool adversarial, Rng& rng);

// Per-inequality minimum slack over all probed vectors, plus the claimed /
// estimated parameters. A claim is violated when some margin drops below the
// negative of its tolerance (1e-12 for deterministic operators, 4 sigma-hat /
// sqrt(n_mc) for stochastic ones).
struct MembershipReport {
  std::string operator_name;
  ClassParams claimed;
  ClassParams estimated;
  std::vector<double> margins;
  std::vector<double> tolerances;
  Vec worst_vector;
  long samples = 0;
  int violations = 0;
  std::uint64_t seed = 0;

  bool passed() const { return violations == 0; }
  nlohmann::json to_json() const;
};

// Tightest parameters of the requested class consistent with every probed
// vector. These are Monte Carlo lower bounds on the true sup-based values.
ClassParams estimate_params(const OperatorUnderTest& op, ClassTag tag,
                            const SamplerPlan& plan, Rng& rng);

MembershipReport verify_membership(const OperatorUnderTest& op,
                                   const ClassParams& claimed,
                                   const SamplerPlan& plan, Rng& rng);

// Reduction maps between the classes. Returns the scaling lambda to apply to
// the operator and the parameters of the target class:
//   B1(a,b)  -> B3(b^2/a) at lambda = 1/b     | -> B2(a, b^2) at lambda = 1
//   B2(g,b)  -> B3(b/g)   at lambda = 1/b     | -> B1(g^2, b) at lambda = 1
//   B3(d)    -> B2(1/(2d), 2) and B1(1/(4d^2), 2) at lambda = 1
std::pair<double, ClassParams> reduce(const ClassParams& params, ClassTag target);

// Scaled unbiased operator lambda*C for C in U(zeta):
//   B1(lambda^2, lambda zeta), B2(lambda, lambda zeta),
//   B3(1 / (lambda (2 - zeta lambda))) requiring zeta * lambda < 2.
ClassParams unbiased_to_biased(double zeta, double lambda, ClassTag target);

// Known class memberships of each operator (the summary-table claims),
// evaluated at dimension d. Unbiased operators report U(zeta) only; biased
// ones report B1, B2 and B3.
std::vector<ClassParams> table1_claims(const CompressorSpec& spec, int dim);

// delta of a B3 member usable by error feedback, together with the scaling
// that makes an unbiased operator contractive (lambda = 1/zeta, delta = zeta).
// Biased operators scale by 1.
struct B3Conversion {
  double lambda = 1.0;
  double delta = 1.0;
  bool scaled = false;
};
B3Conversion b3_conversion(const CompressorSpec& spec, int dim);

// The stock verification roster: one instance per operator of the summary
// table (both rounding bases separately) plus the identity, 13 in all.
// Dimension-dependent fields (the inclusion probabilities) are filled by
// roster_at_dimension.
struct RosterEntry {
  std::string label;
  CompressorSpec spec;
};
std::vector<RosterEntry> verification_roster();
CompressorSpec roster_at_dimension(const CompressorSpec& spec, int dim);

}  // namespace gcomp

#endif
