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

#include "dgp/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dgp/errors.hpp"
#include "dgp/random.hpp"

namespace dgp {

namespace {

void require_finite(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
  for (Index i = 0; i < inputs.rows(); ++i) {
    for (Index d = 0; d < inputs.cols(); ++d) {
      if (!std::isfinite(inputs(i, d))) {
        throw DataError("non-finite input at row " + std::to_string(i) +
                        ", column " + std::to_string(d));
      }
    }
    if (!std::isfinite(targets(i))) {
      throw DataError("non-finite target at row " + std::to_string(i));
    }
  }
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets)
    : inputs_(std::move(inputs)), targets_(std::move(targets)) {
  if (inputs_.rows() != targets_.size()) {
    throw std::invalid_argument("dataset: " + std::to_string(inputs_.rows()) +
                                " input rows but " +
                                std::to_string(targets_.size()) + " targets");
  }
  require_finite(inputs_, targets_);
}

DataView::DataView(const Dataset& source) : source_(&source), indices_(source.size()) {
  std::iota(indices_.begin(), indices_.end(), Index{0});
}

DataView::DataView(const Dataset& source, std::vector<Index> indices)
    : source_(&source), indices_(std::move(indices)) {
  std::vector<bool> seen(static_cast<std::size_t>(source.size()), false);
  for (const Index i : indices_) {
    if (i < 0 || i >= source.size()) {
      throw std::invalid_argument("data view: index " + std::to_string(i) +
                                  " out of range [0, " + std::to_string(source.size()) + ")");
    }
    if (seen[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("data view: duplicate index " + std::to_string(i));
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
}

Eigen::MatrixXd DataView::gather_inputs() const {
  return source_->inputs()(indices_, Eigen::all);
}

Eigen::VectorXd DataView::gather_targets() const { return source_->targets()(indices_); }

Partition random_partition(const Dataset& data, std::size_t num_experts, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.size());
  if (num_experts == 0 || num_experts > n) {
    throw std::invalid_argument("random_partition: need 1 <= experts <= N, got " +
                                std::to_string(num_experts) + " experts for N=" +
                                std::to_string(n));
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(order));

  Partition partition;
  partition.seed = seed;
  partition.views.reserve(num_experts);
  const std::size_t base = n / num_experts;
  const std::size_t extra = n % num_experts;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < num_experts; ++k) {
    const std::size_t count = base + (k < extra ? 1 : 0);
    partition.views.emplace_back(
        data, std::vector<Index>(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                 order.begin() + static_cast<std::ptrdiff_t>(offset + count)));
    offset += count;
  }
  return partition;
}

namespace {

struct ColumnStats {
  double mean;
  double scale;
  bool constant;
};

ColumnStats column_stats(const Eigen::Ref<const Eigen::VectorXd>& column) {
  const double mean = column.mean();
  const double var = (column.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  // Relative test so that e.g. a column of 1e6 +- roundoff counts as constant.
  const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
  return {mean, constant ? 1.0 : sd, constant};
}

}  // namespace

std::pair<Dataset, NormalizationStats> normalize(const Dataset& data) {
  if (data.size() < 2) {
    throw std::invalid_argument("normalize: need at least 2 rows");
  }
  NormalizationStats stats;
  const Index d = data.dim();
  stats.feature_mean.resize(d);
  stats.feature_scale.resize(d);
  stats.feature_constant.resize(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    const ColumnStats s = column_stats(data.inputs().col(j));
    stats.feature_mean(j) = s.mean;
    stats.feature_scale(j) = s.scale;
    stats.feature_constant[static_cast<std::size_t>(j)] = s.constant;
  }
  const ColumnStats t = column_stats(data.targets());
  stats.target_mean = t.mean;
  stats.target_scale = t.scale;
  stats.target_constant = t.constant;
  return {stats.apply(data), std::move(stats)};
}

Dataset NormalizationStats::apply(const Dataset& data) const {
  if (data.dim() != feature_mean.size()) {
    throw DataError("normalization: dataset has " + std::to_string(data.dim()) +
                    " features, statistics have " + std::to_string(feature_mean.size()));
  }
  Eigen::MatrixXd x = (data.inputs().rowwise() - feature_mean.transpose()).array().rowwise() /
                      feature_scale.transpose().array();
  Eigen::VectorXd y = (data.targets().array() - target_mean) / target_scale;
  return Dataset(std::move(x), std::move(y));
}

Eigen::VectorXd NormalizationStats::denormalize_targets(const Eigen::VectorXd& normalized) const {
  return (normalized.array() * target_scale + target_mean).matrix();
}

Eigen::VectorXd NormalizationStats::denormalize_variances(const Eigen::VectorXd& normalized) const {
  return normalized * (target_scale * target_scale);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one record. Quoted fields may contain commas and "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line, std::size_t row) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && trim(current).empty()) {
      quoted = true;
      was_quoted = true;
      current.clear();
    } else if (c == ',') {
      fields.emplace_back(was_quoted ? current : std::string(trim(current)));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) {
    throw DataError("csv row " + std::to_string(row) + ": unterminated quoted field");
  }
  fields.emplace_back(was_quoted ? current : std::string(trim(current)));
  return fields;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::size_t resolve_target(const TargetColumn& target, const std::vector<std::string>& header,
                           std::size_t num_columns) {
  if (const auto* name = std::get_if<std::string>(&target)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw DataError("csv: target column '" + *name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
  const long index = std::get<long>(target);
  const long resolved = index < 0 ? static_cast<long>(num_columns) + index : index;
  if (resolved < 0 || resolved >= static_cast<long>(num_columns)) {
    throw DataError("csv: target column index " + std::to_string(index) + " out of range for " +
                    std::to_string(num_columns) + " columns");
  }
  return static_cast<std::size_t>(resolved);
}

}  // namespace

CsvTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::size_t num_columns = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line, line_no);
    if (num_columns == 0) {
      num_columns = fields.size();
      double unused = 0.0;
      const bool is_header = std::any_of(fields.begin(), fields.end(), [&](const std::string& f) {
        return !parse_number(f, unused);
      });
      if (is_header) {
        table.header = std::move(fields);
        continue;
      }
    }
    if (fields.size() != num_columns) {
      throw DataError("csv row " + std::to_string(line_no) + ": expected " +
                      std::to_string(num_columns) + " columns, found " +
                      std::to_string(fields.size()));
    }
    std::vector<double> values(num_columns);
    for (std::size_t c = 0; c < num_columns; ++c) {
      if (!parse_number(fields[c], values[c])) {
        throw DataError("csv row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + ": cannot parse '" + fields[c] + "'");
      }
      if (!std::isfinite(values[c])) {
        throw DataError("csv row " + std::to_string(line_no) + ", column " +
                        std::to_string(c + 1) + ": non-finite value '" + fields[c] + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("csv: no data rows in " + path.string());

  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(num_columns));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < num_columns; ++c) {
      table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    }
  }
  return table;
}

Dataset split_target(const CsvTable& table, const TargetColumn& target) {
  const auto num_columns = static_cast<std::size_t>(table.values.cols());
  if (num_columns < 2) throw DataError("csv: need at least one feature and one target column");
  const std::size_t target_col = resolve_target(target, table.header, num_columns);
  const Index n = table.values.rows();
  Eigen::MatrixXd x(n, static_cast<Index>(num_columns - 1));
  Index col = 0;
  for (std::size_t c = 0; c < num_columns; ++c) {
    if (c != target_col) x.col(col++) = table.values.col(static_cast<Index>(c));
  }
  Eigen::VectorXd y = table.values.col(static_cast<Index>(target_col));
  return Dataset(std::move(x), std::move(y));
}

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target) {
  return split_target(load_table(path), target);
}

void save_csv(const std::filesystem::path& path, const Dataset& data,
              const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  out << std::setprecision(17);
  for (Index i = 0; i < data.size(); ++i) {
    for (Index d = 0; d < data.dim(); ++d) out << data.inputs()(i, d) << ',';
    out << data.targets()(i) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Binary cache

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("binary cache " + path.string() + ": truncated file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_binary(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_le<std::uint32_t>(out, kBinaryMagic);
  write_le<std::uint32_t>(out, kBinaryVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.dim()));
  for (Index i = 0; i < data.size(); ++i) {
    for (Index d = 0; d < data.dim(); ++d) write_le<double>(out, data.inputs()(i, d));
  }
  for (Index i = 0; i < data.size(); ++i) write_le<double>(out, data.targets()(i));
}

Dataset load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (read_le<std::uint32_t>(in, path) != kBinaryMagic) {
    throw DataError("binary cache " + path.string() + ": bad magic");
  }
  const auto version = read_le<std::uint32_t>(in, path);
  if (version != kBinaryVersion) {
    throw DataError("binary cache " + path.string() + ": unsupported version " +
                    std::to_string(version));
  }
  const auto n = static_cast<Index>(read_le<std::uint32_t>(in, path));
  const auto d = static_cast<Index>(read_le<std::uint32_t>(in, path));
  if (n == 0) throw DataError("binary cache " + path.string() + ": no rows");
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = read_le<double>(in, path);
  }
  for (Index i = 0; i < n; ++i) y(i) = read_le<double>(in, path);
  try {
    return Dataset(std::move(x), std::move(y));
  } catch (const DataError& e) {
    throw DataError("binary cache " + path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path, const TargetColumn& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  unsigned char magic[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(magic), 4);
  const std::uint32_t word = static_cast<std::uint32_t>(magic[0]) |
                             (static_cast<std::uint32_t>(magic[1]) << 8) |
                             (static_cast<std::uint32_t>(magic[2]) << 16) |
                             (static_cast<std::uint32_t>(magic[3]) << 24);
  if (in.gcount() == 4 && word == kBinaryMagic) return load_binary(path);
  return load_csv(path, target);
}

}  // namespace dgp
