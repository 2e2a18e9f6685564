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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xaxa/dataset.hpp"
#include "xaxa/geometry.hpp"
#include "xaxa/plr.hpp"
#include "xaxa/quantizer.hpp"

namespace xaxa {

inline constexpr int kModelSchemaVersion = 1;

struct Hyperparams {
  /// Weight of the radius distance against the prediction error when picking a radius representative.
  double z = 0.5;
  /// Learning rate of the representative updates.
  double alpha = 0.01;
  /// When set, the step of a cell after t updates is alpha * horizon / (horizon + t).
  bool alpha_decay = false;
  double alpha_decay_horizon = 100.0;
  std::size_t retrain_every = 100;
  SelectKConfig l1{2, 1e-3, 32, 0, 100, 1e-6};
  SelectKConfig l2{2, 1e-3, 16, 0, 100, 1e-6};
  PlrFitConfig plr;
  double theta_min = 0.02;
  std::size_t n_subradii = 20;
  AggregateKind kind = AggregateKind::Count;

  /// Throws UsageError when a value is out of range.
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// One (location, radius) cell: its radius representative, the fitted model
/// over normalized answers, and the training state used by retraining.
struct Cell {
  double rr = 0.0;
  PlrModel plr;
  std::vector<PlrSample> samples;
  std::vector<PlrSample> buffer;
  std::uint64_t count = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct LocationCluster {
  Point lr;
  std::uint64_t count = 0;
  std::vector<Cell> cells;

  friend bool operator==(const LocationCluster&, const LocationCluster&) = default;
};

/// The learned triple: location representatives, per-location radius
/// representatives and per-cell piecewise-linear models.
///
/// Answers are modeled in normalized units: y_unit = (y - answer.min) / answer.span().
struct XaxaModel {
  Hyperparams hyper;
  /// Coordinate scaling of the source dataset; empty coords means queries are already normalized.
  ScalingParams scaling;
  Range answer{0.0, 1.0};
  std::vector<LocationCluster> clusters;
  std::uint64_t version = 0;
  std::uint64_t pending = 0;

  std::size_t dim() const noexcept { return clusters.empty() ? 0 : clusters.front().lr.dim(); }
  std::size_t k() const noexcept { return clusters.size(); }
  std::size_t l(std::size_t k) const { return clusters.at(k).cells.size(); }

  std::vector<Point> location_representatives() const;
  std::vector<double> radius_representatives(std::size_t k) const;

  double normalize_answer(double y) const noexcept;
  double denormalize_answer(double unit) const noexcept;

  /// Structural invariants; throws ModelError on violation.
  void validate() const;

  friend bool operator==(const XaxaModel&, const XaxaModel&) = default;
};

nlohmann::json to_json(const XaxaModel& model);
XaxaModel model_from_json(const nlohmann::json& doc);

void save(const XaxaModel& model, const std::filesystem::path& path);
XaxaModel load(const std::filesystem::path& path);

nlohmann::json to_json(const ScalingParams& scaling);
ScalingParams scaling_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Hyperparams& hyper);
Hyperparams hyper_from_json(const nlohmann::json& doc);

using ModelSnapshot = std::shared_ptr<const XaxaModel>;

/// Immutable copy of the model at its current version.
ModelSnapshot snapshot(const XaxaModel& model);

/// Single-writer / multi-reader holder. Readers take snapshots; the writer
/// mutates the live model under `write` and publishes a new snapshot.
class ModelStore {
 public:
  explicit ModelStore(XaxaModel model);

  ModelSnapshot snapshot() const;
  std::uint64_t live_version() const;

  /// Runs fn(XaxaModel&) under the writer lock and returns its result.
  template <typename Fn>
  auto write(Fn&& fn) {
    std::lock_guard lock(writer_);
    return fn(live_);
  }

  /// Copies the live model into a new published snapshot.
  void publish();

 private:
  mutable std::mutex writer_;
  mutable std::mutex published_mutex_;
  XaxaModel live_;
  ModelSnapshot published_;
};

}  // namespace xaxa
