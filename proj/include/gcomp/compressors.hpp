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

#ifndef GCOMP_COMPRESSORS_HPP
#define GCOMP_COMPRESSORS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gcomp/config.hpp"
#include "gcomp/rng.hpp"
#include "gcomp/vec.hpp"

namespace gcomp {

enum class Kind {
  Identity,
  RandK,
  BiasedRandomSparse,
  AdaptiveRandomSparse,
  TopK,
  GeneralUnbiasedRounding,
  GeneralBiasedRounding,
  NaturalCompression,
  GeneralExpDithering,
  NaturalDithering,
  TopKPlusDithering,
  NormalForm,
};

// Parameters of one compression operator. Not every field applies to every
// kind; validate(dim) checks the ones that do. `scale` multiplies the decoded
// output (the lambda*C scaling used to move unbiased operators into the
// contractive class); it does not change the bit cost.
struct CompressorSpec {
  Kind kind = Kind::Identity;
  int k = 1;                  // sparsifier budget, 1 <= k <= dim
  std::vector<double> probs;  // per-coordinate inclusion probabilities (b)
  double base = 2.0;          // rounding/dithering base b > 1
  int levels = 1;             // dithering level count s >= 1
  double norm_order = 2.0;    // dithering norm p in [1, inf]
  double scale = 1.0;         // lambda > 0 applied to the decoded vector

  void validate(int dim) const;  // throws std::invalid_argument
  bool deterministic() const;
  bool unbiased() const;  // per the summary table, at scale == 1
  std::string name() const;

  // "key = value" round trip (kind, k, base, levels, norm_order, scale, probs).
  Config to_config() const;
  static CompressorSpec from_config(const Config& cfg);
};

// Result of one compression. `decoded` is the vector the receiver recovers.
// `payload` is the operator-specific encoding (little-endian, layout below);
// decode_payload(payload) reproduces `decoded` bit-exactly. `bit_cost` is the
// idealized wire size under the declared bit model, independent of the
// payload's in-memory byte count.
struct CompressedMessage {
  Vec decoded;
  std::uint64_t bit_cost = 0;
  std::vector<std::uint8_t> payload;
};

// Payload layout (all integers little-endian):
//   u8  kind tag
//   u32 dim
//   f64 scale (lambda)
//   then per kind:
//     Identity:            dim * f64
//     sparsifiers:         f64 gain, u32 nnz, nnz * (u32 index, f64 raw value);
//                          decoded[i] = scale * gain * raw
//     rounding:            f64 base, dim * (i8 sign, i32 exponent);
//                          decoded_i = scale * sign * base^exponent, sign 0 => 0
//     dithering:           f64 base, f64 norm, u16 levels,
//                          dim * (i8 sign, i16 level); level < 0 => 0,
//                          decoded_i = scale * sign * norm * base^(-level)
//     top-k + dithering:   f64 base, f64 norm, u16 levels, u32 nnz,
//                          nnz * (u32 index, i8 sign, i16 level)
//     normal form:         dim * (i8 sign, u8 mantissa_tenths, i16 exponent);
//                          decoded_i = scale * sign * (mantissa_tenths / 10) * 10^exponent
Vec decode_payload(const std::vector<std::uint8_t>& payload);

// Single entry point dispatching on spec.kind.
CompressedMessage compress(const CompressorSpec& spec, const Vec& x, Rng& rng);

// Individual operators. Preconditions mirror CompressorSpec::validate.
CompressedMessage identity(const Vec& x);
CompressedMessage rand_k(const Vec& x, int k, Rng& rng);
CompressedMessage biased_random_sparse(const Vec& x, const std::vector<double>& probs,
                                       Rng& rng);
CompressedMessage adaptive_random_sparse(const Vec& x, Rng& rng);
CompressedMessage top_k(const Vec& x, int k);
CompressedMessage general_unbiased_rounding(const Vec& x, double base, Rng& rng);
CompressedMessage general_biased_rounding(const Vec& x, double base);
CompressedMessage natural_compression(const Vec& x, Rng& rng);
CompressedMessage general_exp_dithering(const Vec& x, double base, int levels,
                                        double norm_order, Rng& rng);
CompressedMessage natural_dithering(const Vec& x, int levels, double norm_order,
                                    Rng& rng);
CompressedMessage topk_plus_dithering(const Vec& x, int k, double base, int levels,
                                      double norm_order, Rng& rng);
CompressedMessage normal_form_compress(const Vec& x, Rng& rng);

// Exact scalar second moment E[C(t)^2] of unbiased exponential rounding with
// the given base (two-outcome closed form). Used to probe the worst-case
// variance ratio on a grid without Monte Carlo noise.
double unbiased_rounding_second_moment(double t, double base);

// Exact scalar second moment E[C(t)^2] of the normal-form compressor (the
// three-case two-outcome closed form). sup over t of E[C(t)^2]/t^2 = 25/24.
double normal_form_second_moment(double t);

// Second-moment bound of general exponential dithering (levels s, norm p) at
// dimension d: 1/4 (b + 1/b + 2) + d^{1/r} b^{1-s} min(1, d^{1/r} b^{1-s}),
// r = min(p, 2).
double dithering_zeta(double base, int levels, double norm_order, int dim);

// Bit model, declared once for every bits-per-coordinate output:
//   sparsifiers          kept * (32 + ceil(log2 d))
//   rounding, base b     d * (1 + ceil(log2(2*emax(b) + 2))), emax(2) = 127 => 9d
//   dithering            32 + d * (1 + ceil(log2 s))
//   top-k + dithering    32 + k * (ceil(log2 d) + 1 + ceil(log2 s))
//   normal form          12d
//   identity             32d
std::uint64_t bit_cost_model(const CompressorSpec& spec, int dim, int kept);

// Largest exponent magnitude of the rounding grid for base b; mirrors the
// binary32 exponent range (127 for b = 2, scaled to equal dynamic range
// otherwise). Values below base^-emax round to zero, values above base^emax
// saturate.
int rounding_exponent_limit(double base);

}  // namespace gcomp

#endif
