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

#include <limits>
#include <random>
#include <vector>

#include "xaxa/dataset.hpp"
#include "xaxa/trainer.hpp"

namespace xaxa::test {

/// Small 2-d dataset, one query, and a model that interpolates that query's
/// actual curve exactly on the default grid.
struct ExactFixture {
  Dataset dataset;
  Query query;
  XaxaModel model;
};

inline Dataset scatter(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> flat(2 * n), meas(n);
  for (double& v : flat) v = u(rng);
  for (double& v : meas) v = 1 + 9 * u(rng);
  return Dataset("scatter", 2, flat, meas);
}

inline ExactFixture exact_fixture(std::size_t n_grid = 20, double theta_min = 0.02) {
  ExactFixture f{scatter(3000, 77), Query{Point{0.45, 0.55}, 0.25, {}}, {}};
  const auto series = actual_explanation(f.dataset, f.query, AggregateKind::Count, n_grid, theta_min);
  std::vector<Query> hist;
  for (const SeriesPoint& p : series) hist.push_back(Query{f.query.center, p.theta, p.y});
  Hyperparams h;
  h.l1.k0 = 1;
  h.l1.epsilon = std::numeric_limits<double>::infinity();
  h.l2.k0 = 1;
  h.l2.epsilon = std::numeric_limits<double>::infinity();
  h.plr.r2_gain_threshold = 0.0;
  h.plr.max_terms = n_grid;
  h.n_subradii = n_grid;
  h.theta_min = theta_min;
  f.model = preprocess(hist, h);
  f.query.answer = series.back().y;
  return f;
}

}  // namespace xaxa::test
