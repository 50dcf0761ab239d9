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

#include "gcomp/kernels.hpp"

#include <cmath>

#if defined(GCOMP_BUILD_AVX2) && defined(__GNUC__)
#include <cpuid.h>
#endif

namespace gcomp::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double diff_sum_sq(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double abs_sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double abs_max(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace scalar

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*diff_sum_sq)(const double*, const double*, std::size_t);
  double (*abs_sum)(const double*, std::size_t);
  double (*abs_max)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  const char* name;
};

constexpr Vtable kScalar = {scalar::dot,     scalar::sum_sq, scalar::diff_sum_sq,
                            scalar::abs_sum, scalar::abs_max, scalar::axpy,
                            scalar::scal,    "scalar"};

#if defined(GCOMP_BUILD_AVX2)
constexpr Vtable kAvx2 = {avx2::dot,     avx2::sum_sq, avx2::diff_sum_sq,
                          avx2::abs_sum, avx2::abs_max, avx2::axpy,
                          avx2::scal,    "avx2"};

bool cpu_has_avx2() {
#if defined(__GNUC__)
  unsigned int eax = 0, ebx = 0, ecx = 0, edx = 0;
  if (__get_cpuid_max(0, nullptr) < 7) return false;
  __cpuid_count(7, 0, eax, ebx, ecx, edx);
  return (ebx & (1u << 5)) != 0;  // AVX2 feature bit
#else
  return false;
#endif
}
#endif

const Vtable& active() {
#if defined(GCOMP_BUILD_AVX2)
  static const Vtable& v = cpu_has_avx2() ? kAvx2 : kScalar;
#else
  static const Vtable& v = kScalar;
#endif
  return v;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
double sum_sq(const double* a, std::size_t n) { return active().sum_sq(a, n); }
double diff_sum_sq(const double* a, const double* b, std::size_t n) {
  return active().diff_sum_sq(a, b, n);
}
double abs_sum(const double* a, std::size_t n) { return active().abs_sum(a, n); }
double abs_max(const double* a, std::size_t n) { return active().abs_max(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
void scal(double alpha, double* x, std::size_t n) { active().scal(alpha, x, n); }

void mat_vec(const double* A, const double* x, double* out, std::size_t rows,
             std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot(A + r * cols, x, cols);
}

const char* active_isa() { return active().name; }

}  // namespace gcomp::kernels
