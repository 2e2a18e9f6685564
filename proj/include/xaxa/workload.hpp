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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xaxa/dataset.hpp"
#include "xaxa/geometry.hpp"

namespace xaxa {

enum class Family { Gaussian, Uniform };

/// Mixture workload over the unit domain. Component parameters are drawn from
/// `seed` by make_workload_spec and stored, so a spec fully determines its
/// workload.
struct WorkloadSpec {
  std::string preset = "gauss-gauss";
  Family center_family = Family::Gaussian;
  Family radius_family = Family::Gaussian;
  /// Centers and radii uniform over the whole domain; mixtures are ignored.
  bool domain_uniform = false;
  std::size_t dim = 2;
  std::size_t c = 5;
  std::size_t j = 3;
  std::size_t m = 5000;
  std::uint64_t seed = 0;
  double center_variance = 1e-4;
  double center_width = 0.04;
  double radius_variance = 9e-4;
  double radius_width = 0.02;
  double theta_min = 0.02;
  double theta_max = 1.0;
  /// Gaussian means or uniform lower corners, one per component.
  std::vector<Point> center_params;
  std::vector<double> radius_params;

  /// Throws UsageError on an inconsistent spec.
  void validate() const;
  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

/// Presets: gauss-gauss, gauss-uni, uni-gauss, uni-uni, dc-u.
WorkloadSpec make_workload_spec(std::string_view preset, std::size_t dim, std::size_t m, std::uint64_t seed,
                                std::size_t c = 5, std::size_t j = 3);

nlohmann::json to_json(const WorkloadSpec& spec);
WorkloadSpec workload_spec_from_json(const nlohmann::json& j);

struct Workload {
  WorkloadSpec spec;
  AggregateKind kind = AggregateKind::Count;
  std::vector<Query> queries;
  /// (center component, radius component) per query; empty for loaded files.
  std::vector<std::pair<std::size_t, std::size_t>> components;
  /// Queries dropped after exhausting AVG resampling retries.
  std::size_t dropped = 0;
};

/// Samples spec.m queries and labels each with execute_aq on `dataset`
/// (expected normalized). Empty AVG subspaces are resampled up to
/// `max_retries` times, then dropped.
Workload generate(const WorkloadSpec& spec, const Dataset& dataset, AggregateKind kind,
                  std::size_t max_retries = 32);

/// Seeded shuffle then split; the evaluation part has ceil(m * eval_fraction) queries.
std::pair<std::vector<Query>, std::vector<Query>> split(std::span<const Query> workload, double eval_fraction,
                                                        std::uint64_t seed);

/// CSV with a leading "# {json}" comment, header x1..xd,theta,y.
void save_workload(const Workload& wl, const std::filesystem::path& path);
Workload load_workload(const std::filesystem::path& path);

struct BlobConfig {
  std::size_t n = 100000;
  std::size_t dim = 2;
  std::size_t blobs = 5;
  double sigma = 0.1;
  /// Share of rows drawn uniformly over the domain.
  double background = 0.1;
  double measure_base = 10.0;
  /// Measure gain at a blob core, decaying with the blob's Gaussian profile.
  double core_amplitude = 10.0;
  double measure_noise = 0.5;
  std::uint64_t seed = 0;
};

/// Gaussian blobs in [0,1]^d. The measure peaks at blob cores and carries Gaussian noise.
Dataset make_blobs(const BlobConfig& config, std::string name = "blobs");

}  // namespace xaxa
