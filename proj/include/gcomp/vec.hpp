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

#ifndef GCOMP_VEC_HPP
#define GCOMP_VEC_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "gcomp/kernels.hpp"

namespace gcomp {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  return kernels::dot(a.data(), b.data(), a.size());
}

inline double nrm2_sq(const Vec& a) { return kernels::sum_sq(a.data(), a.size()); }

inline double nrm2(const Vec& a) { return std::sqrt(nrm2_sq(a)); }

inline double dist_sq(const Vec& a, const Vec& b) {
  return kernels::diff_sum_sq(a.data(), b.data(), a.size());
}

inline double nrm1(const Vec& a) { return kernels::abs_sum(a.data(), a.size()); }

inline double nrm_inf(const Vec& a) { return kernels::abs_max(a.data(), a.size()); }

// lp norm for p >= 1; p = infinity gives the max norm.
inline double lp_norm(const Vec& a, double p) {
  if (std::isinf(p)) return nrm_inf(a);
  if (p == 2.0) return nrm2(a);
  if (p == 1.0) return nrm1(a);
  double s = 0.0;
  for (double v : a) s += std::pow(std::fabs(v), p);
  return std::pow(s, 1.0 / p);
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  kernels::axpy(alpha, x.data(), y.data(), y.size());
}

inline void scal(double alpha, Vec& x) { kernels::scal(alpha, x.data(), x.size()); }

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

}  // namespace gcomp

#endif
