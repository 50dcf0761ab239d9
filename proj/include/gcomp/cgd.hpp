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

#ifndef GCOMP_CGD_HPP
#define GCOMP_CGD_HPP

#include <cstdint>
#include <vector>

#include "gcomp/classes.hpp"
#include "gcomp/compressors.hpp"
#include "gcomp/problems.hpp"
#include "gcomp/rng.hpp"

namespace gcomp {

// Compressed gradient descent, x <- x - eta * C(grad f(x)).

enum class StepRule {
  OneOverBetaL,  // eta = 1 / (beta L), needs B1 or B2 class params
  OneOverL,      // eta = 1 / L, needs B3 (or any contractive operator)
  Manual,
};

struct CgdConfig {
  StepRule rule = StepRule::OneOverL;
  double eta_manual = 0.0;
  long iterations = 0;
  ClassParams class_params = ClassParams::b3(1.0);
  Vec x0;  // empty = zeros
};

struct CgdRecord {
  long k = 0;
  double f_gap = 0.0;
  double grad_norm = 0.0;
  // Realized contraction of the compression applied at step k:
  // 1 - 1/delta_k = |C(g) - g|^2 / |g|^2. +inf when the compressor removed
  // the whole gradient, NaN on the final row (no step taken from it).
  double delta_k = 0.0;
  // E0 * prod_{i<k} (1 - eta mu / delta_i), the running per-realization bound.
  double theory_bound = 0.0;
  std::uint64_t bits_cum = 0;
};

struct CgdTrace {
  std::vector<CgdRecord> rows;
  double eta = 0.0;
  bool diverged = false;

  // First iteration whose f-gap is <= target, or -1.
  long first_below(double target) const;
};

CgdTrace run_cgd(const Objective& obj, const CompressorSpec& spec,
                 const CgdConfig& cfg, Rng& rng);

// Fixed contraction factor of the per-class theoretical rates raised to the
// K-th power: B1 (1 - alpha/beta^2 mu/L)^K, B2 (1 - gamma/beta mu/L)^K,
// B3 (1 - mu/(L delta))^K. Throws if the factor falls outside [0, 1).
double rate_bound(const ClassParams& params, double L, double mu, long K);

}  // namespace gcomp

#endif
