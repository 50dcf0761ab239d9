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

#ifndef GCOMP_TRACE_IO_HPP
#define GCOMP_TRACE_IO_HPP

#include <cstdint>
#include <string>

#include "gcomp/cgd.hpp"
#include "gcomp/config.hpp"
#include "gcomp/distributed.hpp"

namespace gcomp {

inline constexpr const char* kVersion = "0.1.0";

// First lines of every emitted file: config hash, seed, library version.
// Doubles are printed with 17 significant digits so replays are byte-equal.
struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  std::string header_comment() const;  // "# config_hash=... seed=... version=..."
};

std::string format_double(double v);

void write_cgd_csv(const std::string& path, const CgdTrace& trace,
                   const Provenance& prov);
void write_dist_csv(const std::string& path, const DistTrace& trace,
                    const Provenance& prov);
void write_text(const std::string& path, const std::string& content);

}  // namespace gcomp

#endif
