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

#include "xaxa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xaxa/errors.hpp"

namespace xaxa {

namespace {

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw UsageError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double p_norm_distance(std::span<const double> a, std::span<const double> b, double p) {
  check_dims(a.size(), b.size());
  if (!(p >= 1.0)) throw UsageError("norm order must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
  if (p == 2.0) return std::sqrt(squared_l2(a, b));
  if (p == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s, 1.0 / p);
}

double p_norm_distance(const Point& a, const Point& b, double p) {
  return p_norm_distance(a.coords(), b.coords(), p);
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

bool in_subspace(const Point& x, const Point& center, double theta, double p) {
  return p_norm_distance(x, center, p) <= theta;
}

double query_similarity(const Query& a, const Query& b) {
  const double dt = a.theta - b.theta;
  return squared_l2(a.center.coords(), b.center.coords()) + dt * dt;
}

std::vector<double> evenly_spaced_radii(double lo, double hi, std::size_t n) {
  if (n < 2) throw UsageError("need at least 2 radii");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out[n - 1] = hi;
  return out;
}

}  // namespace xaxa
