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

#ifndef GCOMP_KERNELS_HPP
#define GCOMP_KERNELS_HPP

#include <cstddef>

// Dense double-precision primitives used by every inner loop in the library.
// Scalar reference implementations live in kernels::scalar; on x86-64 an AVX2
// variant of each is selected once at startup via cpuid. Both variants of a
// kernel must agree to floating-point reduction-order tolerance; the test
// suite enforces this.

namespace gcomp::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double diff_sum_sq(const double* a, const double* b, std::size_t n);
double abs_sum(const double* a, std::size_t n);
double abs_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
}  // namespace scalar

#if defined(GCOMP_BUILD_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double diff_sum_sq(const double* a, const double* b, std::size_t n);
double abs_sum(const double* a, std::size_t n);
double abs_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
}  // namespace avx2
#endif

// Dispatched entry points. Same signature as the per-ISA variants.
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double diff_sum_sq(const double* a, const double* b, std::size_t n);
double abs_sum(const double* a, std::size_t n);
double abs_max(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);

// Row-major dense matrix-vector product, out = A x. Built on dot().
void mat_vec(const double* A, const double* x, double* out, std::size_t rows,
             std::size_t cols);

// Name of the kernel set selected at startup ("scalar" or "avx2").
const char* active_isa();

}  // namespace gcomp::kernels

#endif
