/*
 * Copyright 2026 The dgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgp {

/// Malformed or unusable input data (parse failures, non-finite values,
/// empty files, dimension mismatches between data files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear-algebra or aggregation step could not produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure attributed to one GP expert.
class ExpertError : public NumericalError {
 public:
  ExpertError(std::size_t expert_id, const std::string& what)
      : NumericalError("expert " + std::to_string(expert_id) + ": " + what),
        expert_id_(expert_id) {}

  std::size_t expert_id() const noexcept { return expert_id_; }

 private:
  std::size_t expert_id_;
};

}  // namespace dgp
