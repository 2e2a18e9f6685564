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

// Explanation losses between an actual and a predicted series sampled on the
// same radius grid. A metric that is undefined for its input (constant actual
// series, flat slope vector) returns std::nullopt instead of throwing.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xaxa/dataset.hpp"
#include "xaxa/geometry.hpp"
#include "xaxa/model.hpp"

namespace xaxa {

struct CurvePair {
  std::vector<double> theta;
  std::vector<double> actual;
  std::vector<double> predicted;

  /// Throws UsageError unless all three series have the same length n >= 2.
  void check() const;
};

/// 1 - SSE / SST. nullopt when the actual series is constant.
std::optional<double> r2(const CurvePair& pair);

/// 1 - sum|y - y_hat| / sum|y - mean(y)|. nullopt when the actual series is constant.
std::optional<double> alt_r2(const CurvePair& pair);

/// KL(actual || predicted) in bits over shared equal-width histograms with
/// additive smoothing.
double kl(const CurvePair& pair, std::size_t bins = 10, double smoothing = 1.0);

/// Cosine similarity of the finite-difference slope vectors. nullopt when
/// either slope vector has zero norm. Requires a strictly increasing grid.
std::optional<double> cosine_similarity(const CurvePair& pair);

/// RMSE / (max(actual) - min(actual)); with `unrooted` the root is
/// dropped. nullopt when the actual series is constant.
std::optional<double> nrmse(const CurvePair& pair, bool unrooted = false);

inline constexpr std::array<std::string_view, 5> kMetricNames = {"r2", "alt_r2", "kl", "cosine", "nrmse"};

struct QueryMetrics {
  std::size_t query = 0;
  /// Indexed like kMetricNames.
  std::array<std::optional<double>, 5> values;
  /// Grid points dropped because the actual answer was undefined (AVG over nothing).
  std::size_t undefined_points = 0;
  /// Non-empty when the query could not be evaluated.
  std::string error;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

struct EvaluationOptions {
  std::size_t n = 20;
  double theta_min = 0.02;
  std::size_t kl_bins = 10;
  double kl_smoothing = 1.0;
  bool unrooted_nrmse = false;
};

struct EvaluationReport {
  AggregateKind kind = AggregateKind::Count;
  EvaluationOptions options;
  std::vector<QueryMetrics> rows;
  std::array<MetricSummary, 5> summary{};
  std::size_t undefined_points = 0;
  std::size_t failed_queries = 0;

  const MetricSummary& metric(std::string_view name) const;
};

/// Recomputes summary, undefined_points and failed_queries from rows.
void summarize(EvaluationReport& report);

/// Compares the model's fused curve against the dataset ground truth for each
/// query. Queries are in the model's unit space; the dataset is normalized.
/// Per-query failures are recorded in the row and never abort the run.
EvaluationReport evaluate(const XaxaModel& model, std::span<const Query> queries, const Dataset& dataset,
                          AggregateKind kind, const EvaluationOptions& options = {});

/// query,metric,value with "undefined" for missing values.
void save_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
nlohmann::json report_summary_json(const EvaluationReport& report);

}  // namespace xaxa
