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

#ifndef GCOMP_PROBLEMS_HPP
#define GCOMP_PROBLEMS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gcomp/rng.hpp"
#include "gcomp/vec.hpp"

namespace gcomp {

// Differentiable objective with known smoothness and strong convexity. The
// minimizer and optimal value are filled in when they are cheap to obtain
// (closed form or a one-off solve at construction).
struct Objective {
  int dim = 0;
  double L = 0.0;
  double mu = 0.0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::optional<Vec> xstar;
  std::optional<double> fstar;

  double gap(const Vec& x) const { return value(x) - *fstar; }
};

// f = (1/n) sum f_i. node_L / node_mu are the per-node constants (max / min
// over nodes), which is what the distributed stepsize rules consume. D is
// (1/n) sum |grad f_i(x*)|^2 at the aggregate minimizer.
struct DistributedObjective {
  std::vector<Objective> nodes;
  Objective aggregate;
  double D = 0.0;
  double node_L = 0.0;
  double node_mu = 0.0;

  int n() const { return static_cast<int>(nodes.size()); }
  int dim() const { return aggregate.dim; }
};

// Synthetic quadratic x^T A x - y^T x with A = Q^T diag(D) Q, D_i uniform on
// (eig_lo, eig_hi), Q from the QR factorization of a Gaussian matrix, y
// uniform on (0,1). L and mu come from the largest/smallest sampled diagonal
// entries (the exact extreme eigenvalues of A, times 2 for the Hessian 2A).
Objective gen_quadratic(int dim, double eig_lo, double eig_hi, Rng& rng);

// Same quadratic replicated across n nodes (D = 0 by construction).
DistributedObjective replicate(const Objective& obj, int n);

// The n = d = 3 divergence example: f_i(x) = <a_i, x>^2 + |x|^2 / 4 with
// a_1 = (-3,2,2), a_2 = (2,-3,2), a_3 = (2,2,-3). Minimizer 0, D = 0.
DistributedObjective example1();

// Divergence family over all d1-subsets of [d]: n = C(d, d1) nodes with
// f_j(x) = <a_j, x>^2 + |x|^2 / 2, a_j = -b on I_j and c elsewhere,
// b = d2 + d2/d1, c = d1 + 1/d2 + 1 (so -b d1 + c d2 = 1 and b > c + 1).
// Requires d >= 3, d1 < ceil(d/2), and C(d, d1) <= 1e6.
DistributedObjective counterexample_general(int d, int d1);
// Per-step growth factor of naive DCGD on this family started at t * ones,
// as stated for the construction: 1 + eta (2b - 1) d1 / (d2 + 1). Exact for
// d1 = 1; see counterexample notes in the README for d1 > 1.
double counterexample_growth_factor(int d, int d1, double eta);
// Coefficients (b, c) of the construction.
std::pair<double, double> counterexample_coefficients(int d, int d1);

enum class RegKind { LeastSquares, Logistic };

// Rows of numeric CSV data; the last column is the label. Optional header
// row, optional per-column standardization of the features.
struct RegressionData {
  std::vector<Vec> features;  // m rows of dimension d
  Vec labels;
  RegKind kind = RegKind::LeastSquares;
  double mu0 = 1e-3;  // explicit l2 regularizer, needed for mu > 0
};

RegressionData load_regression_csv(const std::string& path, RegKind kind,
                                   bool normalize, bool header, double mu0 = 1e-3);

// Least squares: f(x) = |Ax - y|^2 / (2m) + mu0 |x|^2 / 2.
// Logistic:      f(x) = (1/m) sum log(1 + exp(-y_i <a_i, x>)) + mu0 |x|^2 / 2,
//                labels in {-1, +1} (0/1 labels are remapped).
// L comes from the spectral norm of the Gram matrix (power iteration), the
// minimizer from a conjugate-gradient or gradient solve at construction.
Objective make_objective(const RegressionData& data);

// Round-robin row partition into n node objectives sharing mu0.
DistributedObjective partition(const RegressionData& data, int n_nodes);

// Central finite-difference gradient check; returns the largest relative
// error over the probe points. Step 1e-5 * (1 + |x|).
double gradient_check(const Objective& obj, const std::vector<Vec>& points);

}  // namespace gcomp

#endif
