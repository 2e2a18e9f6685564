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

#include "xaxa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xaxa/errors.hpp"
#include "xaxa/quantizer.hpp"

namespace xaxa {

namespace {

double step_size(const Hyperparams& h, std::uint64_t updates) {
  if (!h.alpha_decay) return h.alpha;
  return h.alpha * h.alpha_decay_horizon / (h.alpha_decay_horizon + static_cast<double>(updates));
}

}  // namespace

XaxaModel preprocess(std::span<const Query> history, const Hyperparams& hyper, const ScalingParams& scaling) {
  hyper.validate();
  if (history.empty()) throw UsageError("preprocessing needs a non-empty history");
  for (const Query& q : history) {
    if (!q.answer) throw UsageError("every history query needs an answer");
  }

  XaxaModel model;
  model.hyper = hyper;
  model.scaling = scaling;
  const auto [lo, hi] = std::minmax_element(history.begin(), history.end(),
                                            [](const Query& a, const Query& b) { return *a.answer < *b.answer; });
  model.answer = Range{*lo->answer, *hi->answer};

  const HierarchicalCodebook hq = hierarchical_quantize(history, hyper.l1, hyper.l2);
  std::vector<std::vector<std::size_t>> members(hq.locations.k());
  for (std::size_t i = 0; i < history.size(); ++i) members[hq.locations.assignments[i]].push_back(i);

  for (std::size_t k = 0; k < hq.locations.k(); ++k) {
    LocationCluster cluster;
    cluster.lr = hq.locations.centroids[k];
    const Codebook& radii = hq.radii[k];
    cluster.cells.resize(radii.k());
    double cluster_mean = 0.0;
    for (std::size_t j = 0; j < members[k].size(); ++j) {
      const Query& q = history[members[k][j]];
      const double y = model.normalize_answer(*q.answer);
      cluster_mean += y;
      cluster.cells[radii.assignments[j]].samples.push_back({q.theta, y});
    }
    cluster_mean /= static_cast<double>(members[k].size());
    for (std::size_t l = 0; l < radii.k(); ++l) {
      Cell& cell = cluster.cells[l];
      cell.rr = radii.centroids[l][0];
      if (cell.samples.empty()) {
        cell.plr = PlrModel{cluster_mean, {}};
      } else {
        cell.plr = fit(cell.samples, hyper.plr).model;
      }
    }
    model.clusters.push_back(std::move(cluster));
  }
  model.version = 1;
  model.validate();
  return model;
}

Assignment assign(const XaxaModel& model, const Query& q, double y) {
  if (model.clusters.empty()) throw UsageError("model is empty");
  if (q.center.dim() != model.dim()) {
    throw UsageError("query dimension " + std::to_string(q.center.dim()) + " does not match model dimension " +
                     std::to_string(model.dim()));
  }
  Assignment a;
  std::size_t best_k = 0;
  double best_d = squared_l2(q.center.coords(), model.clusters[0].lr.coords());
  for (std::size_t k = 1; k < model.clusters.size(); ++k) {
    const double d = squared_l2(q.center.coords(), model.clusters[k].lr.coords());
    if (d < best_d) {
      best_d = d;
      best_k = k;
    }
  }
  a.k = best_k;

  const double z = model.hyper.z;
  const double y_unit = model.normalize_answer(y);
  const auto& cells = model.clusters[best_k].cells;
  double best_cost = 0.0;
  for (std::size_t l = 0; l < cells.size(); ++l) {
    const double err = y_unit - cells[l].plr.predict(q.theta);
    const double cost = z * std::abs(q.theta - cells[l].rr) + (1.0 - z) * err * err;
    if (l == 0 || cost < best_cost) {
      best_cost = cost;
      a.l = l;
    }
  }
  a.l_after = a.l;
  return a;
}

double update_rr(double u, double theta, double alpha, double z) noexcept {
  if (theta > u) return u + alpha * z;
  if (theta < u) return u - alpha * z;
  return u;
}

Point update_lr(const Point& w, const Point& x, double alpha) {
  if (w.dim() != x.dim()) throw UsageError("dimension mismatch in location update");
  std::vector<double> out(w.dim());
  for (std::size_t j = 0; j < w.dim(); ++j) out[j] = w[j] + alpha * (x[j] - w[j]);
  return Point(std::move(out));
}

Assignment process_pair(XaxaModel& model, const Query& q, double y) {
  if (!(q.theta > 0.0)) throw UsageError("query radius must be > 0");
  if (!std::isfinite(y)) throw UsageError("answer must be finite");
  Assignment a = assign(model, q, y);
  const Hyperparams& h = model.hyper;

  LocationCluster& cluster = model.clusters[a.k];
  cluster.lr = update_lr(cluster.lr, q.center, step_size(h, cluster.count));
  ++cluster.count;

  Cell& cell = cluster.cells[a.l];
  const double moved = update_rr(cell.rr, q.theta, step_size(h, cell.count), h.z);
  // Two representatives never share a value; a move onto a neighbor is skipped.
  const bool collides = std::any_of(cluster.cells.begin(), cluster.cells.end(),
                                    [&](const Cell& other) { return &other != &cell && other.rr == moved; });
  if (!collides) cell.rr = moved;
  cell.buffer.push_back({q.theta, model.normalize_answer(y)});
  ++cell.count;
  ++model.pending;

  // Cells travel with their representative when representatives cross.
  const double rr = cell.rr;
  std::stable_sort(cluster.cells.begin(), cluster.cells.end(), [](const Cell& lhs, const Cell& rhs) { return lhs.rr < rhs.rr; });
  for (std::size_t l = 0; l < cluster.cells.size(); ++l) {
    if (cluster.cells[l].rr == rr) a.l_after = l;
  }
  ++model.version;
  return a;
}

RetrainReport maybe_retrain(XaxaModel& model) {
  RetrainReport report;
  if (model.pending < model.hyper.retrain_every) return report;
  report.triggered = true;
  for (std::size_t k = 0; k < model.clusters.size(); ++k) {
    auto& cells = model.clusters[k].cells;
    for (std::size_t l = 0; l < cells.size(); ++l) {
      Cell& cell = cells[l];
      if (cell.buffer.empty()) continue;
      std::vector<PlrSample> merged = cell.samples;
      merged.insert(merged.end(), cell.buffer.begin(), cell.buffer.end());
      try {
        cell.plr = fit(merged, model.hyper.plr).model;
        report.refit.emplace_back(k, l);
      } catch (const Error& e) {
        report.failures.push_back("cell (" + std::to_string(k) + "," + std::to_string(l) + "): " + e.what());
      }
      cell.samples = std::move(merged);
      cell.buffer.clear();
    }
  }
  model.pending = 0;
  ++model.version;
  return report;
}

}  // namespace xaxa
