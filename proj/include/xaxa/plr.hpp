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
#include <vector>

namespace xaxa {

/// max(0, theta - knot)
inline double hinge(double theta, double knot) noexcept { return theta > knot ? theta - knot : 0.0; }

struct HingeTerm {
  double beta = 0.0;
  double knot = 0.0;

  friend bool operator==(const HingeTerm&, const HingeTerm&) = default;
};

/// beta0 + sum_i beta_i * max(0, theta - knot_i), knots strictly increasing.
struct PlrModel {
  double beta0 = 0.0;
  std::vector<HingeTerm> terms;

  double predict(double theta) const noexcept;
  /// Right derivative d/dtheta at theta.
  double slope(double theta) const noexcept;
  std::size_t size() const noexcept { return terms.size(); }

  friend bool operator==(const PlrModel&, const PlrModel&) = default;
};

struct PlrSample {
  double theta = 0.0;
  double y = 0.0;

  friend bool operator==(const PlrSample&, const PlrSample&) = default;
};

struct PlrFitConfig {
  double r2_gain_threshold = 1e-3;
  std::size_t max_terms = 10;
  /// Fewer samples than this yield the constant model.
  std::size_t min_samples = 4;

  friend bool operator==(const PlrFitConfig&, const PlrFitConfig&) = default;
};

struct PlrFit {
  PlrModel model;
  /// Training R^2 after each accepted forward step, starting with the constant model.
  std::vector<double> r2_trace;
  /// The selected term made the least-squares system rank deficient; it was dropped.
  bool singular_stop = false;
};

/// Greedy forward hinge selection with a full least-squares refit per step.
///
/// Candidates are the distinct sample thetas that leave at least one sample
/// strictly to their right. Each step adds the candidate with the smallest
/// residual sum of squares (ties: smallest knot) and stops once the R^2 gain
/// falls under the threshold or max_terms is reached.
PlrFit fit(std::span<const PlrSample> samples, const PlrFitConfig& config = {});

/// 1 - RSS/TSS of the model on the samples; 1 when the samples are constant and fit exactly.
double training_r2(const PlrModel& model, std::span<const PlrSample> samples);

}  // namespace xaxa
