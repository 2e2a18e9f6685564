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
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "xaxa/geometry.hpp"

namespace xaxa {

struct KMeansConfig {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
};

/// Result of a vector quantization run.
///
/// `assignments[i]` is the index of the centroid nearest to sample i under
/// squared L2 (ties go to the smaller index). `ssqe_trace` holds the SSQE after
/// every assignment step and is non-increasing.
struct Codebook {
  std::vector<Point> centroids;
  std::vector<std::size_t> assignments;
  double ssqe = 0.0;
  std::vector<double> ssqe_trace;
  std::size_t iterations = 0;

  std::size_t k() const noexcept { return centroids.size(); }
};

/// Lloyd's algorithm with seeded farthest-point initialization.
///
/// Samples are canonicalized (sorted, duplicates merged with weights) before
/// seeding, so the result is independent of input order and of uniform
/// duplication. Throws UsageError when samples are empty, have mixed
/// dimension, or when k exceeds the number of distinct samples.
Codebook kmeans(std::span<const Point> samples, const KMeansConfig& config);
Codebook kmeans(std::span<const double> scalars, const KMeansConfig& config);

/// Sum over samples of the squared L2 distance to the nearest centroid.
double ssqe(std::span<const Point> samples, std::span<const Point> centroids);

std::size_t nearest_centroid(std::span<const double> x, std::span<const Point> centroids);

struct SelectKConfig {
  std::size_t k0 = 2;
  double epsilon = 1e-3;
  std::size_t k_max = 32;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;

  friend bool operator==(const SelectKConfig&, const SelectKConfig&) = default;
};

struct Selection {
  Codebook codebook;
  /// SSQE for every K that was run, starting at the effective k0.
  std::vector<double> ssqe_curve;
  std::size_t first_k = 0;
};

/// Increases K from k0 until the SSQE improvement drops to epsilon or below,
/// and returns the last codebook whose successor did not improve by more than
/// epsilon. K is capped by k_max and by the number of distinct samples.
Selection select_k(std::span<const Point> samples, const SelectKConfig& config);
Selection select_k(std::span<const double> scalars, const SelectKConfig& config);

/// Two-level quantization of a query set: centers first, then the radii of
/// each center cluster.
struct HierarchicalCodebook {
  Codebook locations;
  /// One codebook per location cluster, centroids ascending by radius.
  /// `radii[k].assignments` follows the ascending index order of the queries
  /// assigned to location k.
  std::vector<Codebook> radii;
  /// Radius count selected on the pooled radii before per-cluster clamping.
  std::size_t pooled_l = 0;
};

HierarchicalCodebook hierarchical_quantize(std::span<const Query> queries, const SelectKConfig& l1,
                                           const SelectKConfig& l2);

}  // namespace xaxa
