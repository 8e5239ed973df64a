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

#include "config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      return false;
  return true;
}

double parse_one_double(const std::string& tok, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key '" + key + "': not a number: '" + tok + "'");
  return v;
}

long parse_one_long(const std::string& tok, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key '" + key + "': not an integer: '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

} // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is.good()) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str(), path);
}

RunConfig RunConfig::parse_text(const std::string& text,
                                const std::string& origin) {
  RunConfig cfg;
  cfg.from_file_ = true;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
            origin + ":" + std::to_string(lineno), false);
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value: '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)),
      "override '" + assignment + "'", true);
}

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& origin, bool allow_replace) {
  if (!valid_key(key))
    throw ConfigError(origin + ": bad key name '" + key + "'");
  if (!allow_replace && values_.count(key) != 0)
    throw ConfigError(origin + ": duplicate key '" + key + "'");
  values_[key] = value;
}

void RunConfig::require_schema(const std::string& name) {
  const std::string* s = find("schema");
  if (s == nullptr) {
    if (from_file_)
      throw ConfigError("config file has no 'schema' key (expected '" +
                        name + "')");
    return;
  }
  if (*s != name)
    throw ConfigError("config schema is '" + *s + "', this command needs '" +
                      name + "'");
}

void RunConfig::finish() const {
  for (const auto& kv : values_)
    if (consumed_.count(kv.first) == 0)
      throw ConfigError("unknown config key: '" + kv.first + "'");
}

const std::string* RunConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string RunConfig::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw ConfigError("missing config key: '" + key + "'");
  return *v;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& def) const {
  const std::string* v = find(key);
  return v != nullptr ? *v : def;
}

long RunConfig::get_int(const std::string& key) const {
  return parse_one_long(get_string(key), key);
}

long RunConfig::get_int(const std::string& key, long def) const {
  const std::string* v = find(key);
  return v != nullptr ? parse_one_long(*v, key) : def;
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t def) const {
  const std::string* v = find(key);
  if (v == nullptr) return def;
  errno = 0;
  char* end = nullptr;
  unsigned long long r = std::strtoull(v->c_str(), &end, 10);
  if (end == v->c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("key '" + key + "': not an unsigned integer: '" + *v +
                      "'");
  return static_cast<std::uint64_t>(r);
}

double RunConfig::get_double(const std::string& key) const {
  return parse_one_double(get_string(key), key);
}

double RunConfig::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  return v != nullptr ? parse_one_double(*v, key) : def;
}

bool RunConfig::get_bool(const std::string& key, bool def) const {
  const std::string* v = find(key);
  if (v == nullptr) return def;
  if (*v == "1" || *v == "true") return true;
  if (*v == "0" || *v == "false") return false;
  throw ConfigError("key '" + key + "': expected 0/1/true/false, got '" +
                    *v + "'");
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw ConfigError("missing config key: '" + key + "'");
  std::vector<double> out;
  for (const auto& t : tokens(*v)) out.push_back(parse_one_double(t, key));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<double>
RunConfig::get_doubles(const std::string& key,
                       const std::vector<double>& def) const {
  if (find(key) == nullptr) return def;
  return get_doubles(key);
}

std::vector<int> RunConfig::get_ints(const std::string& key,
                                     const std::vector<int>& def) const {
  const std::string* v = find(key);
  if (v == nullptr) return def;
  std::vector<int> out;
  for (const auto& t : tokens(*v))
    out.push_back(static_cast<int>(parse_one_long(t, key)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& kv : values_) {
    mix(kv.first);
    mix("=");
    mix(kv.second);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cli
