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

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xaxa/geometry.hpp"
#include "xaxa/model.hpp"

namespace xaxa {

/// Builds the initial model from answered history queries: hierarchical
/// quantization of (center, radius), then one fit per (location, radius) cell.
/// Throws UsageError on empty history or unanswered queries.
XaxaModel preprocess(std::span<const Query> history, const Hyperparams& hyper, const ScalingParams& scaling = {});

struct Assignment {
  std::size_t k = 0;
  /// Radius cell chosen for the pair, indexed before re-sorting.
  std::size_t l = 0;
  /// Index of the same cell after the representatives were re-sorted.
  std::size_t l_after = 0;
};

/// Nearest location by squared L2; then the radius cell minimizing
/// z*|theta - u| + (1 - z)*(y - f(theta))^2 on normalized answers. Ties go to
/// the smaller index. `y` is in raw answer units.
Assignment assign(const XaxaModel& model, const Query& q, double y);

/// u + alpha * z * sgn(theta - u), with sgn(0) = 0.
double update_rr(double u, double theta, double alpha, double z) noexcept;

/// w + alpha * (x - w).
Point update_lr(const Point& w, const Point& x, double alpha);

/// One training step: assignment, representative updates, buffering of the
/// pair into its cell. Bumps the model version.
Assignment process_pair(XaxaModel& model, const Query& q, double y);

struct RetrainReport {
  bool triggered = false;
  std::vector<std::pair<std::size_t, std::size_t>> refit;
  std::vector<std::string> failures;
};

/// Refits every cell with buffered pairs once `retrain_every` pairs were
/// processed since the previous retrain. A cell whose refit throws keeps its
/// previous model and is reported in `failures`.
RetrainReport maybe_retrain(XaxaModel& model);

}  // namespace xaxa
