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

#ifndef ELMPC_CORE_ERROR_HPP
#define ELMPC_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace elmpc {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  singular_system,
  untrained_model,
  io_error,
  parse_error,
  numeric_failure,
  divergence,
  infeasible,
};

// The only exception type the core throws on purpose.  The C boundary maps
// the code to a status enum; everything else becomes ELMPC_ERR_UNKNOWN.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

} // namespace elmpc

#endif
