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

// Explanation serving. Everything here reads a model and a query only; no
// dataset type is reachable from these signatures.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "xaxa/geometry.hpp"
#include "xaxa/model.hpp"
#include "xaxa/plr.hpp"

namespace xaxa {

/// Index of the nearest location representative (squared L2, ties to the smaller index).
std::size_t nearest_lr(const XaxaModel& model, const Point& x);

/// One radius interval [theta_lo, theta_hi) and the cell model that explains it.
struct Segment {
  double theta_lo = 0.0;
  double theta_hi = std::numeric_limits<double>::infinity();
  std::size_t rr_index = 0;
  double rr = 0.0;
  PlrModel plr;
};

/// Fused piecewise-linear explanation for one query location. Segments
/// partition [0, inf); boundaries are midpoints of consecutive radius
/// representatives and a boundary belongs to the higher segment.
struct ExplanationFunction {
  std::size_t lr_index = 0;
  Point lr;
  std::vector<Segment> segments;
  Range answer{0.0, 1.0};
  std::uint64_t version = 0;

  std::size_t segment_for(double theta) const;
  /// Prediction in normalized answer units.
  double predict_unit(double theta) const;
  /// Prediction in answer units.
  double predict(double theta) const;
  /// d y_hat / d theta in answer units (right derivative).
  double slope(double theta) const;
  std::vector<double> boundaries() const;
};

/// Throws UsageError when theta <= 0 or the center dimension does not match.
ExplanationFunction build_explanation(const XaxaModel& model, const Query& q);

double predict_answer(const XaxaModel& model, const Query& q);

struct CurvePoint {
  double theta = 0.0;
  double y_hat = 0.0;
  std::size_t segment = 0;
  double slope = 0.0;
};

/// Evaluates the fused function on an ascending, non-empty grid.
std::vector<CurvePoint> sample_curve(const ExplanationFunction& expl, std::span<const double> theta_grid);

/// {lr_index, version, answer_scaling, segments:[...], curve:[...]}
nlohmann::json explanation_json(const ExplanationFunction& expl, std::span<const CurvePoint> curve);

/// Maps a query in raw dataset coordinates into the model's unit space.
Query normalize_query(const XaxaModel& model, const Query& raw);

}  // namespace xaxa
