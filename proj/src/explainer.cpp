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

#include "xaxa/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xaxa/errors.hpp"

namespace xaxa {

using nlohmann::json;

std::size_t nearest_lr(const XaxaModel& model, const Point& x) {
  if (model.clusters.empty()) throw UsageError("model is empty");
  if (x.dim() != model.dim()) {
    throw UsageError("query dimension " + std::to_string(x.dim()) + " does not match model dimension " +
                     std::to_string(model.dim()));
  }
  std::size_t best = 0;
  double best_d = squared_l2(x.coords(), model.clusters[0].lr.coords());
  for (std::size_t k = 1; k < model.clusters.size(); ++k) {
    const double d = squared_l2(x.coords(), model.clusters[k].lr.coords());
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::size_t ExplanationFunction::segment_for(double theta) const {
  // Segment index = number of lower boundaries at or below theta.
  std::size_t lo = 1, hi = segments.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments[mid].theta_lo <= theta) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo - 1;
}

double ExplanationFunction::predict_unit(double theta) const {
  return segments[segment_for(theta)].plr.predict(theta);
}

double ExplanationFunction::predict(double theta) const {
  const double unit = predict_unit(theta);
  const double span = answer.span();
  return answer.min + (span > 0 ? unit * span : unit);
}

double ExplanationFunction::slope(double theta) const {
  const double s = segments[segment_for(theta)].plr.slope(theta);
  const double span = answer.span();
  return span > 0 ? s * span : s;
}

std::vector<double> ExplanationFunction::boundaries() const {
  std::vector<double> out;
  for (std::size_t l = 1; l < segments.size(); ++l) out.push_back(segments[l].theta_lo);
  return out;
}

ExplanationFunction build_explanation(const XaxaModel& model, const Query& q) {
  if (!(q.theta > 0.0) || !std::isfinite(q.theta)) throw UsageError("query radius must be a positive number");
  ExplanationFunction e;
  e.lr_index = nearest_lr(model, q.center);
  const LocationCluster& cluster = model.clusters[e.lr_index];
  e.lr = cluster.lr;
  e.answer = model.answer;
  e.version = model.version;
  const auto& cells = cluster.cells;
  e.segments.resize(cells.size());
  for (std::size_t l = 0; l < cells.size(); ++l) {
    Segment& s = e.segments[l];
    s.rr_index = l;
    s.rr = cells[l].rr;
    s.plr = cells[l].plr;
    s.theta_lo = l == 0 ? 0.0 : 0.5 * (cells[l - 1].rr + cells[l].rr);
    s.theta_hi = l + 1 == cells.size() ? std::numeric_limits<double>::infinity()
                                       : 0.5 * (cells[l].rr + cells[l + 1].rr);
  }
  return e;
}

double predict_answer(const XaxaModel& model, const Query& q) { return build_explanation(model, q).predict(q.theta); }

std::vector<CurvePoint> sample_curve(const ExplanationFunction& expl, std::span<const double> theta_grid) {
  if (theta_grid.empty()) throw UsageError("curve grid is empty");
  for (std::size_t i = 1; i < theta_grid.size(); ++i) {
    if (theta_grid[i] < theta_grid[i - 1]) throw UsageError("curve grid must be ascending");
  }
  std::vector<CurvePoint> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    out.push_back({theta, expl.predict(theta), expl.segment_for(theta), expl.slope(theta)});
  }
  return out;
}

json explanation_json(const ExplanationFunction& expl, std::span<const CurvePoint> curve) {
  json segments = json::array();
  for (const Segment& s : expl.segments) {
    json terms = json::array();
    for (const auto& t : s.plr.terms) terms.push_back({t.beta, t.knot});
    segments.push_back({{"theta_lo", s.theta_lo},
                        {"theta_hi", std::isinf(s.theta_hi) ? json(nullptr) : json(s.theta_hi)},
                        {"rr", s.rr},
                        {"rr_index", s.rr_index},
                        {"plr", {{"beta0", s.plr.beta0}, {"terms", terms}}}});
  }
  json pts = json::array();
  for (const CurvePoint& p : curve) {
    pts.push_back({{"theta", p.theta}, {"y_hat", p.y_hat}, {"segment", p.segment}, {"slope", p.slope}});
  }
  return {{"lr_index", expl.lr_index},
          {"lr", expl.lr.values()},
          {"version", expl.version},
          {"answer_scaling", {expl.answer.min, expl.answer.max}},
          {"segments", segments},
          {"curve", pts}};
}

Query normalize_query(const XaxaModel& model, const Query& raw) {
  if (model.scaling.coords.empty()) return raw;
  Query q = raw;
  q.center = model.scaling.normalize(raw.center);
  q.theta = model.scaling.normalize_radius(raw.theta);
  return q;
}

}  // namespace xaxa
