// Copyright 2026 The xaxa Authors.
//
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xaxa/geometry.hpp"

namespace xaxa {

enum class AggregateKind { Count, Avg, Sum };

std::string_view to_string(AggregateKind kind) noexcept;
/// Accepts "count", "avg", "sum" in any case. Throws UsageError otherwise.
AggregateKind parse_aggregate_kind(std::string_view text);

struct Range {
  double min = 0.0;
  double max = 1.0;

  double span() const noexcept { return max - min; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Per-dimension min-max parameters. Constant dimensions map to 0.
struct ScalingParams {
  std::vector<Range> coords;
  std::optional<Range> measure;

  Point normalize(const Point& raw) const;
  Point denormalize(const Point& unit) const;
  double normalize_measure(double raw) const;
  double denormalize_measure(double unit) const;
  /// Raw radius to unit radius, using the widest coordinate span.
  double normalize_radius(double raw) const;

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

class GridIndex;

/// Immutable set of rows with an optional measure column.
class Dataset {
 public:
  Dataset(std::string name, std::size_t dim, std::vector<double> coords,
          std::optional<std::vector<double>> measure = std::nullopt, double norm_order = 2.0);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  double norm_order() const noexcept { return norm_order_; }
  bool has_measure() const noexcept { return measure_.has_value(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  Point point(std::size_t i) const;
  double measure(std::size_t i) const { return (*measure_)[i]; }
  std::span<const double> raw_coords() const noexcept { return coords_; }
  const std::optional<std::vector<double>>& measures() const noexcept { return measure_; }

  /// Builds the uniform-grid accelerator. The index never changes answers.
  void build_index(std::size_t cells_per_dim = 0);
  bool has_index() const noexcept { return index_ != nullptr; }
  const GridIndex* index() const noexcept { return index_.get(); }

 private:
  std::string name_;
  std::size_t dim_;
  std::vector<double> coords_;
  std::optional<std::vector<double>> measure_;
  double norm_order_;
  std::shared_ptr<const GridIndex> index_;
};

struct CsvOptions {
  char delimiter = ',';
};

/// Reads `coord_columns` (and optionally `measure_column`) from a headed CSV file.
Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& coord_columns,
                 const std::optional<std::string>& measure_column = std::nullopt,
                 const CsvOptions& options = {});

/// Writes coordinates as x1..xd and the measure as `measure`.
void save_csv(const Dataset& ds, const std::filesystem::path& path);
/// Reads a file written by save_csv: every column named x<i> is a coordinate.
Dataset load_normalized_csv(const std::filesystem::path& path);

std::pair<Dataset, ScalingParams> normalize(const Dataset& ds);

enum class ScanMode { Auto, Linear, Index };

struct Answer {
  double value = 0.0;
  std::size_t count = 0;
  /// AVG over an empty subspace; value is meaningless.
  bool empty_subspace = false;
};

Answer execute_aq(const Dataset& ds, const Query& q, AggregateKind kind, ScanMode mode = ScanMode::Auto);

struct SeriesPoint {
  double theta = 0.0;
  double y = 0.0;
  bool defined = true;
};

/// Ground-truth answers at n evenly spaced radii over [theta_min, q.theta].
std::vector<SeriesPoint> actual_explanation(const Dataset& ds, const Query& q, AggregateKind kind,
                                            std::size_t n, double theta_min = 0.02);

/// Number of execute_aq / actual_explanation calls made in this process.
std::uint64_t dataset_access_count() noexcept;

}  // namespace xaxa
