/*
 * Copyright 2026 the elmpc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// `key = value` run configuration for the command-line tool.  Lines are
// independent; '#' starts a comment; values may be scalars or
// space-separated lists.  Every file carries a `schema` key naming the
// subcommand layout it was written for, and every key must be consumed by
// the subcommand (unknown keys are rejected, catching typos).

#ifndef ELMPC_TOOLS_CONFIG_HPP
#define ELMPC_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class RunConfig {
public:
  RunConfig() = default;

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text,
                              const std::string& origin);

  // "key=value" command-line override; inserts or replaces.
  void apply_override(const std::string& assignment);

  // Verifies the `schema` key when the config came from a file; a config
  // built purely from defaults and overrides may omit it.
  void require_schema(const std::string& name);

  // Rejects every stored key that no getter has consumed.
  void finish() const;

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& def) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& def) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key,
                            const std::vector<int>& def) const;

  // FNV-1a over the sorted "key=value" lines of the effective config;
  // stable provenance fingerprint for output files.
  std::string hash() const;

private:
  void set(const std::string& key, const std::string& value,
           const std::string& origin, bool allow_replace);
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  bool from_file_ = false;
};

} // namespace cli

#endif
