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
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace xaxa {

inline constexpr double kInfinityNorm = std::numeric_limits<double>::infinity();

/// A point in the d-dimensional data space.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<double> coords) : coords_(coords) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }

  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

/// A center-radius aggregate query, optionally labeled with its answer.
struct Query {
  Point center;
  double theta = 0.0;
  std::optional<double> answer;
};

/// L_p distance between two coordinate vectors; p may be kInfinityNorm.
/// Throws UsageError on dimension mismatch or p < 1.
double p_norm_distance(std::span<const double> a, std::span<const double> b, double p = 2.0);
double p_norm_distance(const Point& a, const Point& b, double p = 2.0);

double squared_l2(std::span<const double> a, std::span<const double> b);

/// Membership of `x` in the ball of radius `theta` around `center`. The boundary is inside.
bool in_subspace(const Point& x, const Point& center, double theta, double p = 2.0);

/// ||x - x'||^2 + (theta - theta')^2.
double query_similarity(const Query& a, const Query& b);

/// n radii evenly spaced over [lo, hi]; the last one is exactly `hi`.
std::vector<double> evenly_spaced_radii(double lo, double hi, std::size_t n);

}  // namespace xaxa
