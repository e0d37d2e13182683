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
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace dgp {

using Index = Eigen::Index;

/// Immutable training or test table: N input rows with D features plus one
/// target per row. All values are finite.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets);

  Index size() const { return inputs_.rows(); }
  Index dim() const { return inputs_.cols(); }

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
};

/// Read-only subset of a Dataset addressed by row indices. The view never
/// copies or mutates its source; the source must outlive it.
class DataView {
 public:
  /// All rows of `source`, in order.
  explicit DataView(const Dataset& source);
  /// Throws std::invalid_argument on out-of-range or repeated indices.
  DataView(const Dataset& source, std::vector<Index> indices);

  Index size() const { return static_cast<Index>(indices_.size()); }
  Index dim() const { return source_->dim(); }
  const Dataset& source() const { return *source_; }
  const std::vector<Index>& indices() const { return indices_; }

  /// Materialized n_k x D input block (row order follows indices()).
  Eigen::MatrixXd gather_inputs() const;
  Eigen::VectorXd gather_targets() const;

 private:
  const Dataset* source_;
  std::vector<Index> indices_;
};

/// Disjoint, balanced cover of a dataset's rows by M views.
struct Partition {
  std::vector<DataView> views;
  std::uint64_t seed = 0;

  std::size_t num_experts() const { return views.size(); }
};

/// Random balanced assignment of rows to `num_experts` experts. The first
/// (N mod M) experts receive one extra row. Deterministic in `seed`.
Partition random_partition(const Dataset& data, std::size_t num_experts,
                           std::uint64_t seed);

/// z-score statistics. Scales use the population convention (divide by N).
/// Constant columns are centered only: their scale is 1 and the flag is set.
struct NormalizationStats {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  std::vector<bool> feature_constant;
  double target_mean = 0.0;
  double target_scale = 1.0;
  bool target_constant = false;

  /// Applies these (training) statistics to another dataset, e.g. test data.
  Dataset apply(const Dataset& data) const;
  Eigen::VectorXd denormalize_targets(const Eigen::VectorXd& normalized) const;
  Eigen::VectorXd denormalize_variances(const Eigen::VectorXd& normalized) const;
};

/// Requires N >= 2.
std::pair<Dataset, NormalizationStats> normalize(const Dataset& data);

/// Column selector for CSV ingest: a header name or a zero-based index.
/// Negative indices count from the end (-1 is the last column).
using TargetColumn = std::variant<std::string, long>;

/// Numeric CSV table with optional header.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// RFC-4180 subset: comma separated, optional double quotes, '.' decimal
/// separator. A first row containing any non-numeric field is a header.
/// Throws DataError with row/column on parse failure, non-finite values or
/// an empty file.
CsvTable load_table(const std::filesystem::path& path);

/// Splits a table into features and the selected target column.
Dataset split_target(const CsvTable& table, const TargetColumn& target);

/// load_table + split_target.
Dataset load_csv(const std::filesystem::path& path,
                 const TargetColumn& target = -1L);

/// Writes inputs then target per row with 17 significant digits.
void save_csv(const std::filesystem::path& path, const Dataset& data,
              const std::vector<std::string>& header = {});

/// Binary cache layout: 16-byte header of four little-endian uint32 words
/// {magic "DGPB", version 1, N, D}, then N*D little-endian float64 inputs in
/// row-major order, then N float64 targets.
inline constexpr std::uint32_t kBinaryMagic = 0x42504744u;  // "DGPB"
inline constexpr std::uint32_t kBinaryVersion = 1;

void save_binary(const std::filesystem::path& path, const Dataset& data);
Dataset load_binary(const std::filesystem::path& path);

/// Dispatches on the file header: binary cache if the magic matches,
/// otherwise CSV.
Dataset load_dataset(const std::filesystem::path& path,
                     const TargetColumn& target = -1L);

}  // namespace dgp
