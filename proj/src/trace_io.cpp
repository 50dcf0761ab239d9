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

#include "gcomp/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gcomp {

std::string Provenance::header_comment() const {
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "# config_hash=%016" PRIx64 " seed=%" PRIu64 " version=%s\n",
                config_hash, seed, kVersion);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_cgd_csv(const std::string& path, const CgdTrace& trace,
                   const Provenance& prov) {
  std::string out = prov.header_comment();
  out += "# eta=" + format_double(trace.eta) +
         " diverged=" + (trace.diverged ? std::string("1") : std::string("0")) + "\n";
  out += "k,f_gap,grad_norm,delta_k,theory_bound,bits_cumulative\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.k) + "," + format_double(r.f_gap) + "," +
           format_double(r.grad_norm) + "," + format_double(r.delta_k) + "," +
           format_double(r.theory_bound) + "," + std::to_string(r.bits_cum) + "\n";
  }
  write_text(path, out);
}

void write_dist_csv(const std::string& path, const DistTrace& trace,
                    const Provenance& prov) {
  std::string out = prov.header_comment();
  out += "# diverged=" + std::string(trace.diverged ? "1" : "0");
  if (!trace.note.empty()) out += " note=\"" + trace.note + "\"";
  out += "\n";
  out += "k,f_gap_iterate,f_gap_ergodic,max_error_norm,bits_cumulative,eta_k,w_k\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.k) + "," + format_double(r.f_gap_iterate) + "," +
           format_double(r.f_gap_ergodic) + "," + format_double(r.max_error_norm) +
           "," + std::to_string(r.bits_cum) + "," + format_double(r.eta_k) + "," +
           format_double(r.w_k) + "\n";
  }
  write_text(path, out);
}

}  // namespace gcomp
