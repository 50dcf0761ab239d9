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

#ifndef GCOMP_CONFIG_HPP
#define GCOMP_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcomp {

// Experiment configs are flat "dotted.key = value" text files. '#' starts a
// comment. Keys are case-sensitive. The canonical serialization (sorted keys,
// one per line) is what gets hashed into the provenance header, so a replayed
// config matches byte for byte.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Keys beginning with "<prefix>." with the prefix stripped.
  Config sub(const std::string& prefix) const;
  std::vector<std::string> keys() const;
  bool empty() const { return values_.empty(); }

  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical text

 private:
  std::map<std::string, std::string> values_;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gcomp

#endif
