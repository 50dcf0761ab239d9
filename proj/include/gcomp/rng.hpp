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

#ifndef GCOMP_RNG_HPP
#define GCOMP_RNG_HPP

#include <cstdint>

namespace gcomp {

// Seedable xoshiro256++ stream. Every stochastic routine in the library takes
// an explicit Rng so identical seeds reproduce identical outputs byte for
// byte. substream(id) derives an independent child stream from the root seed;
// derivation depends only on (root_seed, id), so parallel callers can claim
// ids in any order without changing results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng substream(std::uint64_t id) const;

  std::uint64_t next_u64();

  // Uniform on [0,1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via the Marsaglia polar method (spare value cached).
  double normal();

  // Uniform integer in [0, n), rejection-sampled for exactness. n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t root_seed() const { return root_seed_; }

 private:
  Rng(std::uint64_t root, std::uint64_t stream);

  std::uint64_t s_[4];
  std::uint64_t root_seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gcomp

#endif
