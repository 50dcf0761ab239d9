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

#include "gcomp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "gcomp/kernels.hpp"

namespace gcomp {

namespace {

// Constants declared on generated problems get this relative margin so they
// certifiably bound the true Hessian spectrum despite rounding in the
// construction (QR products, power iteration).
constexpr double kSpectralMargin = 1e-9;

using Mat = std::vector<double>;  // row-major square

double& at(Mat& m, int d, int r, int c) { return m[static_cast<std::size_t>(r) * d + c]; }
double at(const Mat& m, int d, int r, int c) {
  return m[static_cast<std::size_t>(r) * d + c];
}

// Householder QR of a square matrix; returns the orthogonal factor Q.
Mat householder_q(Mat p, int d) {
  std::vector<Vec> vs;
  std::vector<double> betas;
  for (int j = 0; j < d - 1; ++j) {
    Vec v(d, 0.0);
    double norm_sq = 0.0;
    for (int i = j; i < d; ++i) {
      v[i] = at(p, d, i, j);
      norm_sq += v[i] * v[i];
    }
    const double alpha = -std::copysign(std::sqrt(norm_sq), v[j]);
    v[j] -= alpha;
    double vtv = 0.0;
    for (int i = j; i < d; ++i) vtv += v[i] * v[i];
    if (vtv == 0.0) {
      vs.push_back(std::move(v));
      betas.push_back(0.0);
      continue;
    }
    const double beta = 2.0 / vtv;
    for (int c = j; c < d; ++c) {
      double s = 0.0;
      for (int i = j; i < d; ++i) s += v[i] * at(p, d, i, c);
      s *= beta;
      for (int i = j; i < d; ++i) at(p, d, i, c) -= s * v[i];
    }
    vs.push_back(std::move(v));
    betas.push_back(beta);
  }
  Mat q(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) at(q, d, i, i) = 1.0;
  for (int j = d - 2; j >= 0; --j) {
    if (betas[j] == 0.0) continue;
    const Vec& v = vs[j];
    for (int c = 0; c < d; ++c) {
      double s = 0.0;
      for (int i = j; i < d; ++i) s += v[i] * at(q, d, i, c);
      s *= betas[j];
      for (int i = j; i < d; ++i) at(q, d, i, c) -= s * v[i];
    }
  }
  return q;
}

// Solves SPD system a x = b by Cholesky; a is consumed.
Vec cholesky_solve(Mat a, int d, const Vec& b) {
  for (int j = 0; j < d; ++j) {
    double diag = at(a, d, j, j);
    for (int k = 0; k < j; ++k) diag -= at(a, d, j, k) * at(a, d, j, k);
    if (diag <= 0.0) throw std::runtime_error("Cholesky: matrix not positive definite");
    diag = std::sqrt(diag);
    at(a, d, j, j) = diag;
    for (int i = j + 1; i < d; ++i) {
      double s = at(a, d, i, j);
      for (int k = 0; k < j; ++k) s -= at(a, d, i, k) * at(a, d, j, k);
      at(a, d, i, j) = s / diag;
    }
  }
  Vec y(d);
  for (int i = 0; i < d; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= at(a, d, i, k) * y[k];
    y[i] = s / at(a, d, i, i);
  }
  Vec x(d);
  for (int i = d - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < d; ++k) s -= at(a, d, k, i) * x[k];
    x[i] = s / at(a, d, i, i);
  }
  return x;
}

double power_iteration(const std::function<Vec(const Vec&)>& matvec, int d) {
  Vec v(d);
  std::uint64_t s = 0x9e3779b97f4a7c15ULL;
  for (auto& e : v) {  // fixed deterministic start
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    e = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  }
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vec w = matvec(v);
    const double n = nrm2(w);
    if (n == 0.0) return 0.0;
    scal(1.0 / n, w);
    const double next = dot(w, matvec(w));
    const bool done = std::fabs(next - lambda) <= 1e-13 * std::max(1.0, std::fabs(next));
    lambda = next;
    v = std::move(w);
    if (done && it > 4) break;
  }
  return lambda;
}

Vec cg_solve(const std::function<Vec(const Vec&)>& matvec, const Vec& b,
             double rel_tol, int max_iter) {
  const int d = static_cast<int>(b.size());
  Vec x = zeros(d);
  Vec r = b;
  Vec p = r;
  double rr = nrm2_sq(r);
  const double stop = rel_tol * rel_tol * std::max(nrm2_sq(b), 1e-300);
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    Vec ap = matvec(p);
    const double alpha = rr / dot(p, ap);
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rr_next = nrm2_sq(r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (int i = 0; i < d; ++i) p[i] = r[i] + beta * p[i];
  }
  return x;
}

Objective quadratic_from(std::shared_ptr<const Mat> a, std::shared_ptr<const Vec> y,
                         int d, double l, double mu) {
  Objective obj;
  obj.dim = d;
  obj.L = l;
  obj.mu = mu;
  obj.value = [a, y, d](const Vec& x) {
    Vec ax(d);
    kernels::mat_vec(a->data(), x.data(), ax.data(), d, d);
    return dot(x, ax) - dot(*y, x);
  };
  obj.grad = [a, y, d](const Vec& x) {
    Vec g(d);
    kernels::mat_vec(a->data(), x.data(), g.data(), d, d);
    scal(2.0, g);
    axpy(-1.0, *y, g);
    return g;
  };
  return obj;
}

Objective inner_product_node(const Vec& a, double reg_half) {
  // f(x) = <a, x>^2 + reg_half |x|^2 ; grad = 2 <a,x> a + 2 reg_half x.
  const int d = static_cast<int>(a.size());
  Objective obj;
  obj.dim = d;
  obj.L = 2.0 * nrm2_sq(a) + 2.0 * reg_half;
  obj.mu = 2.0 * reg_half;
  auto av = std::make_shared<Vec>(a);
  obj.value = [av, reg_half](const Vec& x) {
    const double s = dot(*av, x);
    return s * s + reg_half * nrm2_sq(x);
  };
  obj.grad = [av, reg_half](const Vec& x) {
    const double s = dot(*av, x);
    Vec g = x;
    scal(2.0 * reg_half, g);
    axpy(2.0 * s, *av, g);
    return g;
  };
  obj.xstar = zeros(d);
  obj.fstar = 0.0;
  return obj;
}

Objective average_of(const std::vector<Objective>& nodes, double l, double mu) {
  Objective agg;
  agg.dim = nodes.front().dim;
  agg.L = l;
  agg.mu = mu;
  auto shared = std::make_shared<std::vector<Objective>>(nodes);
  agg.value = [shared](const Vec& x) {
    double s = 0.0;
    for (const auto& f : *shared) s += f.value(x);
    return s / shared->size();
  };
  agg.grad = [shared](const Vec& x) {
    Vec g = zeros(x.size());
    for (const auto& f : *shared) axpy(1.0, f.grad(x), g);
    scal(1.0 / shared->size(), g);
    return g;
  };
  return agg;
}

}  // namespace

Objective gen_quadratic(int dim, double eig_lo, double eig_hi, Rng& rng) {
  if (!(eig_lo > 0.0) || !(eig_hi > eig_lo)) {
    throw std::invalid_argument("need 0 < eig_lo < eig_hi");
  }
  Vec diag(dim);
  double dmin = eig_hi, dmax = eig_lo;
  for (auto& e : diag) {
    e = rng.uniform(eig_lo, eig_hi);
    dmin = std::min(dmin, e);
    dmax = std::max(dmax, e);
  }
  Mat p(static_cast<std::size_t>(dim) * dim);
  for (auto& e : p) e = rng.normal();
  const Mat q = householder_q(std::move(p), dim);

  // A = Q^T diag Q, symmetrized against rounding.
  auto a = std::make_shared<Mat>(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += at(q, dim, k, i) * diag[k] * at(q, dim, k, j);
      at(*a, dim, i, j) = s;
      at(*a, dim, j, i) = s;
    }
  }
  auto y = std::make_shared<Vec>(dim);
  for (auto& e : *y) e = rng.uniform(0.0, 1.0);

  const double l = 2.0 * dmax * (1.0 + kSpectralMargin);
  const double mu = 2.0 * dmin * (1.0 - kSpectralMargin);
  Objective obj = quadratic_from(a, y, dim, l, mu);
  Vec half_y = *y;
  scal(0.5, half_y);
  obj.xstar = cholesky_solve(*a, dim, half_y);
  obj.fstar = obj.value(*obj.xstar);
  return obj;
}

DistributedObjective replicate(const Objective& obj, int n) {
  if (n < 1) throw std::invalid_argument("need at least one node");
  DistributedObjective dobj;
  dobj.nodes.assign(n, obj);
  dobj.aggregate = obj;
  dobj.node_L = obj.L;
  dobj.node_mu = obj.mu;
  dobj.D = 0.0;
  return dobj;
}

DistributedObjective example1() {
  const std::vector<Vec> as = {{-3, 2, 2}, {2, -3, 2}, {2, 2, -3}};
  DistributedObjective dobj;
  for (const auto& a : as) dobj.nodes.push_back(inner_product_node(a, 0.25));
  dobj.node_L = 34.5;  // 2 |a|^2 + 1/2
  dobj.node_mu = 0.5;
  // Sum of a_i a_i^T has eigenvalues {1, 25, 25}; the aggregate Hessian is
  // (2/3) of that plus I/2, so its spectrum is {7/6, 103/6, 103/6}.
  dobj.aggregate = average_of(dobj.nodes, 103.0 / 6.0, 7.0 / 6.0);
  dobj.aggregate.xstar = zeros(3);
  dobj.aggregate.fstar = 0.0;
  dobj.D = 0.0;
  return dobj;
}

std::pair<double, double> counterexample_coefficients(int d, int d1) {
  const int d2 = d - d1;
  const double b = d2 + static_cast<double>(d2) / d1;
  const double c = d1 + 1.0 / d2 + 1.0;
  return {b, c};
}

double counterexample_growth_factor(int d, int d1, double eta) {
  const auto [b, c] = counterexample_coefficients(d, d1);
  (void)c;
  const int d2 = d - d1;
  return 1.0 + eta * (2.0 * b - 1.0) * d1 / (d2 + 1.0);
}

DistributedObjective counterexample_general(int d, int d1) {
  if (d < 3 || d1 < 1 || d1 >= (d + 1) / 2) {
    throw std::invalid_argument("need d >= 3 and d1 < ceil(d/2)");
  }
  double n_count = 1.0;
  for (int i = 0; i < d1; ++i) n_count = n_count * (d - i) / (i + 1);
  if (n_count > 1e6) {
    throw std::invalid_argument("C(d, d1) exceeds the 1e6 node guard");
  }
  const auto [b, c] = counterexample_coefficients(d, d1);
  if (!(b > c + 1.0)) {
    throw std::invalid_argument("construction requires b > c + 1");
  }

  DistributedObjective dobj;
  std::vector<int> subset(d1);
  for (int i = 0; i < d1; ++i) subset[i] = i;
  while (true) {
    Vec a(d, c);
    for (int i : subset) a[i] = -b;
    dobj.nodes.push_back(inner_product_node(a, 0.5));
    int pos = d1 - 1;
    while (pos >= 0 && subset[pos] == d - d1 + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int i = pos + 1; i < d1; ++i) subset[i] = subset[i - 1] + 1;
  }
  dobj.node_L = dobj.nodes.front().L;
  dobj.node_mu = 1.0;
  double agg_l = 0.0;
  for (const auto& f : dobj.nodes) agg_l += f.L;
  agg_l /= dobj.nodes.size();
  dobj.aggregate = average_of(dobj.nodes, agg_l, 1.0);
  dobj.aggregate.xstar = zeros(d);
  dobj.aggregate.fstar = 0.0;
  dobj.D = 0.0;
  return dobj;
}

// ---- regression over CSV ------------------------------------------------

RegressionData load_regression_csv(const std::string& path, RegKind kind,
                                   bool normalize, bool header, double mu0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV: " + path);
  RegressionData data;
  data.kind = kind;
  data.mu0 = mu0;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && header) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ls(line);
    std::string cell;
    Vec row;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        throw std::runtime_error("non-numeric CSV cell: '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() < 2) throw std::runtime_error("CSV rows need >= 2 columns");
    if (width == 0) width = row.size();
    if (row.size() != width) throw std::runtime_error("ragged CSV row");
    data.labels.push_back(row.back());
    row.pop_back();
    data.features.push_back(std::move(row));
  }
  if (data.features.empty()) throw std::runtime_error("empty CSV: " + path);
  if (data.features.size() < data.features.front().size()) {
    throw std::runtime_error("fewer rows than feature dimensions");
  }

  if (kind == RegKind::Logistic) {
    for (auto& l : data.labels) {
      if (l == 0.0) l = -1.0;
      if (l != 1.0 && l != -1.0) {
        throw std::runtime_error("logistic labels must be 0/1 or -1/+1");
      }
    }
  }

  if (normalize) {
    const std::size_t m = data.features.size();
    const std::size_t dim = data.features.front().size();
    for (std::size_t j = 0; j < dim; ++j) {
      double mean = 0.0;
      for (const auto& r : data.features) mean += r[j];
      mean /= m;
      double var = 0.0;
      for (const auto& r : data.features) var += (r[j] - mean) * (r[j] - mean);
      const double sd = std::sqrt(var / m);
      for (auto& r : data.features) {
        r[j] = sd > 0.0 ? (r[j] - mean) / sd : r[j] - mean;
      }
    }
  }
  return data;
}

namespace {

struct RegCore {
  std::shared_ptr<const std::vector<Vec>> rows;
  std::shared_ptr<const Vec> labels;
  RegKind kind;
  double mu0;

  int dim() const { return static_cast<int>(rows->front().size()); }
  std::size_t m() const { return rows->size(); }

  double value(const Vec& x) const {
    double s = 0.0;
    if (kind == RegKind::LeastSquares) {
      for (std::size_t i = 0; i < m(); ++i) {
        const double r = dot((*rows)[i], x) - (*labels)[i];
        s += r * r;
      }
      s /= 2.0 * m();
    } else {
      for (std::size_t i = 0; i < m(); ++i) {
        const double z = -(*labels)[i] * dot((*rows)[i], x);
        // log(1 + exp(z)) without overflow
        s += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      }
      s /= m();
    }
    return s + 0.5 * mu0 * nrm2_sq(x);
  }

  Vec grad(const Vec& x) const {
    Vec g = x;
    scal(mu0, g);
    if (kind == RegKind::LeastSquares) {
      for (std::size_t i = 0; i < m(); ++i) {
        const double r = dot((*rows)[i], x) - (*labels)[i];
        axpy(r / m(), (*rows)[i], g);
      }
    } else {
      for (std::size_t i = 0; i < m(); ++i) {
        const double z = -(*labels)[i] * dot((*rows)[i], x);
        const double sig = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        axpy(-(*labels)[i] * sig / m(), (*rows)[i], g);
      }
    }
    return g;
  }

  // lmax of (1/m) A^T A via power iteration on the Gram operator.
  double gram_lmax() const {
    const int d = dim();
    auto mv = [this, d](const Vec& v) {
      Vec out = zeros(d);
      for (std::size_t i = 0; i < m(); ++i) {
        axpy(dot((*rows)[i], v), (*rows)[i], out);
      }
      scal(1.0 / m(), out);
      return out;
    };
    return power_iteration(mv, d);
  }

  // Newton with Cholesky; both losses have dense d x d Hessians here.
  Vec solve_min() const {
    const int d = dim();
    if (kind == RegKind::LeastSquares) {
      Mat h(static_cast<std::size_t>(d) * d, 0.0);
      Vec b = zeros(d);
      for (std::size_t i = 0; i < m(); ++i) {
        const Vec& a = (*rows)[i];
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) at(h, d, r, c) += a[r] * a[c] / m();
        }
        axpy((*labels)[i] / m(), a, b);
      }
      for (int r = 0; r < d; ++r) at(h, d, r, r) += mu0;
      return cholesky_solve(std::move(h), d, b);
    }
    Vec x = zeros(d);
    for (int it = 0; it < 100; ++it) {
      Vec g = grad(x);
      if (nrm2(g) <= 1e-12) break;
      Mat h(static_cast<std::size_t>(d) * d, 0.0);
      for (std::size_t i = 0; i < m(); ++i) {
        const Vec& a = (*rows)[i];
        const double z = -(*labels)[i] * dot(a, x);
        const double sig = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        const double w = sig * (1.0 - sig) / m();
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) at(h, d, r, c) += w * a[r] * a[c];
        }
      }
      for (int r = 0; r < d; ++r) at(h, d, r, r) += mu0;
      Vec step = cholesky_solve(std::move(h), d, g);
      axpy(-1.0, step, x);
    }
    return x;
  }
};

Objective objective_from_core(const RegCore& core) {
  Objective obj;
  obj.dim = core.dim();
  const double gram = core.gram_lmax();
  const double curv = core.kind == RegKind::LeastSquares ? gram : gram / 4.0;
  obj.L = curv * (1.0 + 1e-9) + core.mu0;
  obj.mu = core.mu0;
  obj.value = [core](const Vec& x) { return core.value(x); };
  obj.grad = [core](const Vec& x) { return core.grad(x); };
  obj.xstar = core.solve_min();
  obj.fstar = core.value(*obj.xstar);
  return obj;
}

RegCore core_of(const RegressionData& data) {
  RegCore core;
  core.rows = std::make_shared<const std::vector<Vec>>(data.features);
  core.labels = std::make_shared<const Vec>(data.labels);
  core.kind = data.kind;
  core.mu0 = data.mu0;
  return core;
}

}  // namespace

Objective make_objective(const RegressionData& data) {
  return objective_from_core(core_of(data));
}

DistributedObjective partition(const RegressionData& data, int n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("need at least one node");
  if (data.features.size() < static_cast<std::size_t>(n_nodes)) {
    throw std::invalid_argument("fewer rows than nodes");
  }
  std::vector<RegressionData> shards(n_nodes);
  for (auto& s : shards) {
    s.kind = data.kind;
    s.mu0 = data.mu0;
  }
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    shards[i % n_nodes].features.push_back(data.features[i]);
    shards[i % n_nodes].labels.push_back(data.labels[i]);
  }
  DistributedObjective dobj;
  double l_sum = 0.0;
  for (const auto& s : shards) {
    dobj.nodes.push_back(make_objective(s));
    l_sum += dobj.nodes.back().L;
  }
  dobj.node_L = 0.0;
  dobj.node_mu = data.mu0;
  for (const auto& f : dobj.nodes) dobj.node_L = std::max(dobj.node_L, f.L);

  // Aggregate curvature bound: lmax of the averaged Hessians is at most the
  // average of the node bounds.
  dobj.aggregate = average_of(dobj.nodes, l_sum / n_nodes, data.mu0);

  // Minimizer of the average via CG on the averaged gradient operator for
  // least squares; Newton steps through the aggregate otherwise.
  const int d = dobj.aggregate.dim;
  if (data.kind == RegKind::LeastSquares) {
    // grad(x) = H x - b with H x = grad(x) - grad(0) + ... ; use the affine
    // structure: H x = grad(x) - grad(0), b = -grad(0).
    Vec g0 = dobj.aggregate.grad(zeros(d));
    auto mv = [&](const Vec& v) {
      Vec gv = dobj.aggregate.grad(v);
      axpy(-1.0, g0, gv);
      return gv;
    };
    Vec b = g0;
    scal(-1.0, b);
    dobj.aggregate.xstar = cg_solve(mv, b, 1e-14, 40 * d);
  } else {
    // Logistic aggregate: plain gradient descent to high precision. Shards
    // can be unequal sizes, so the merged-data Newton solve is not reusable.
    Vec x = zeros(d);
    const double eta = 1.0 / dobj.aggregate.L;
    for (int it = 0; it < 200000; ++it) {
      Vec g = dobj.aggregate.grad(x);
      if (nrm2(g) <= 1e-12) break;
      axpy(-eta, g, x);
    }
    dobj.aggregate.xstar = x;
  }
  dobj.aggregate.fstar = dobj.aggregate.value(*dobj.aggregate.xstar);
  double dsum = 0.0;
  for (const auto& f : dobj.nodes) dsum += nrm2_sq(f.grad(*dobj.aggregate.xstar));
  dobj.D = dsum / n_nodes;
  return dobj;
}

double gradient_check(const Objective& obj, const std::vector<Vec>& points) {
  double worst = 0.0;
  for (const auto& x : points) {
    const double h = 1e-5 * (1.0 + nrm2(x));
    const Vec g = obj.grad(x);
    Vec fd(obj.dim);
    Vec xp = x;
    for (int i = 0; i < obj.dim; ++i) {
      const double orig = xp[i];
      xp[i] = orig + h;
      const double fp = obj.value(xp);
      xp[i] = orig - h;
      const double fm = obj.value(xp);
      xp[i] = orig;
      fd[i] = (fp - fm) / (2.0 * h);
    }
    const double denom = std::max(nrm2(g), 1e-12);
    worst = std::max(worst, std::sqrt(dist_sq(fd, g)) / denom);
  }
  return worst;
}

}  // namespace gcomp
