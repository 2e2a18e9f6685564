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

#include "xaxa/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "xaxa/errors.hpp"

namespace xaxa {

namespace {

// Distinct samples in lexicographic order, with multiplicities.
struct Canonical {
  std::vector<Point> unique;
  std::vector<double> weight;
  std::vector<std::size_t> slot;  // original index -> unique index
};

Canonical canonicalize(std::span<const Point> samples) {
  if (samples.empty()) throw UsageError("cannot quantize an empty sample set");
  const std::size_t d = samples.front().dim();
  if (d == 0) throw UsageError("samples must have dimension >= 1");
  for (const Point& p : samples) {
    if (p.dim() != d) throw UsageError("samples have mixed dimensions");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
  Canonical c;
  c.slot.resize(samples.size());
  for (std::size_t i : order) {
    if (c.unique.empty() || !(c.unique.back() == samples[i])) {
      c.unique.push_back(samples[i]);
      c.weight.push_back(0.0);
    }
    c.weight.back() += 1.0;
    c.slot[i] = c.unique.size() - 1;
  }
  return c;
}

std::vector<Point> as_points(std::span<const double> scalars) {
  std::vector<Point> pts;
  pts.reserve(scalars.size());
  for (double v : scalars) pts.push_back(Point{v});
  return pts;
}

std::vector<Point> farthest_point_seeds(const Canonical& c, std::size_t k, std::uint64_t seed) {
  const std::size_t n = c.unique.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<Point> centroids{c.unique[pick(rng)]};
  std::vector<double> gap(n);
  for (std::size_t u = 0; u < n; ++u) gap[u] = squared_l2(c.unique[u].coords(), centroids[0].coords());
  while (centroids.size() < k) {
    std::size_t best = 0;
    for (std::size_t u = 1; u < n; ++u) {
      if (gap[u] > gap[best]) best = u;
    }
    centroids.push_back(c.unique[best]);
    for (std::size_t u = 0; u < n; ++u) {
      gap[u] = std::min(gap[u], squared_l2(c.unique[u].coords(), centroids.back().coords()));
    }
  }
  return centroids;
}

struct LloydState {
  std::vector<Point> centroids;
  std::vector<std::size_t> assign;  // per unique sample
  std::vector<double> dist2;
  std::vector<double> trace;
  std::size_t iterations = 0;
};

// Returns true when any assignment changed.
bool assign_step(const Canonical& c, LloydState& s) {
  bool changed = false;
  double total = 0.0;
  for (std::size_t u = 0; u < c.unique.size(); ++u) {
    std::size_t best = 0;
    double best_d = squared_l2(c.unique[u].coords(), s.centroids[0].coords());
    for (std::size_t j = 1; j < s.centroids.size(); ++j) {
      const double d = squared_l2(c.unique[u].coords(), s.centroids[j].coords());
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (s.assign[u] != best) changed = true;
    s.assign[u] = best;
    s.dist2[u] = best_d;
    total += c.weight[u] * best_d;
  }
  s.trace.push_back(total);
  return changed;
}

// Moves every centroid to the weighted mean of its members. An empty
// cluster is reseeded at the sample farthest from its own centroid.
double update_step(const Canonical& c, LloydState& s) {
  const std::size_t k = s.centroids.size();
  const std::size_t d = c.unique.front().dim();
  std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
  std::vector<double> mass(k, 0.0);
  for (std::size_t u = 0; u < c.unique.size(); ++u) {
    auto& acc = sums[s.assign[u]];
    for (std::size_t j = 0; j < d; ++j) acc[j] += c.weight[u] * c.unique[u][j];
    mass[s.assign[u]] += c.weight[u];
  }
  std::vector<Point> next(k);
  std::vector<std::size_t> empty;
  for (std::size_t i = 0; i < k; ++i) {
    if (mass[i] == 0.0) {
      empty.push_back(i);
      continue;
    }
    for (double& v : sums[i]) v /= mass[i];
    next[i] = Point(std::move(sums[i]));
  }
  if (!empty.empty()) {
    std::vector<double> gap(c.unique.size());
    for (std::size_t u = 0; u < c.unique.size(); ++u) {
      const Point& own = next[s.assign[u]];
      gap[u] = own.dim() ? squared_l2(c.unique[u].coords(), own.coords()) : 0.0;
    }
    for (std::size_t i : empty) {
      std::size_t best = 0;
      for (std::size_t u = 1; u < gap.size(); ++u) {
        if (gap[u] > gap[best]) best = u;
      }
      next[i] = c.unique[best];
      gap[best] = -1.0;
    }
  }
  double shift = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    shift = std::max(shift, std::sqrt(squared_l2(next[i].coords(), s.centroids[i].coords())));
  }
  s.centroids = std::move(next);
  return shift;
}

Codebook lloyd(const Canonical& c, std::vector<Point> init, const KMeansConfig& cfg) {
  LloydState s;
  s.centroids = std::move(init);
  s.assign.assign(c.unique.size(), static_cast<std::size_t>(-1));
  s.dist2.assign(c.unique.size(), 0.0);
  assign_step(c, s);
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const double shift = update_step(c, s);
    const bool changed = assign_step(c, s);
    ++s.iterations;
    if (!changed || shift < cfg.tol) break;
  }
  Codebook cb;
  cb.centroids = std::move(s.centroids);
  cb.assignments.resize(c.slot.size());
  for (std::size_t i = 0; i < c.slot.size(); ++i) cb.assignments[i] = s.assign[c.slot[i]];
  cb.ssqe = s.trace.back();
  cb.ssqe_trace = std::move(s.trace);
  cb.iterations = s.iterations;
  return cb;
}

void check_k(std::size_t k, std::size_t distinct) {
  if (k == 0) throw UsageError("k must be >= 1");
  if (k > distinct) {
    throw UsageError("k = " + std::to_string(k) + " exceeds the number of distinct samples (" +
                     std::to_string(distinct) + ")");
  }
}

Selection select_k_canonical(const Canonical& c, const SelectKConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw UsageError("epsilon must be > 0");
  const std::size_t distinct = c.unique.size();
  const std::size_t cap = std::max<std::size_t>(1, std::min(cfg.k_max, distinct));
  std::size_t k = std::clamp<std::size_t>(cfg.k0, 1, cap);
  const KMeansConfig kc{k, cfg.seed, cfg.max_iter, cfg.tol};

  Selection sel;
  sel.first_k = k;
  sel.codebook = lloyd(c, farthest_point_seeds(c, k, cfg.seed), kc);
  sel.ssqe_curve.push_back(sel.codebook.ssqe);
  while (k < cap) {
    // Warm start: previous centroids plus the sample farthest from them, so
    // the explored SSQE curve can only go down.
    std::vector<Point> init = sel.codebook.centroids;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t u = 0; u < distinct; ++u) {
      double d = std::numeric_limits<double>::infinity();
      for (const Point& w : init) d = std::min(d, squared_l2(c.unique[u].coords(), w.coords()));
      if (d > far_d) {
        far_d = d;
        far = u;
      }
    }
    if (far_d <= 0.0) break;
    init.push_back(c.unique[far]);
    Codebook next = lloyd(c, std::move(init), KMeansConfig{k + 1, cfg.seed, cfg.max_iter, cfg.tol});
    sel.ssqe_curve.push_back(next.ssqe);
    if (sel.codebook.ssqe - next.ssqe > cfg.epsilon) {
      sel.codebook = std::move(next);
      ++k;
    } else {
      break;
    }
  }
  return sel;
}

}  // namespace

std::size_t nearest_centroid(std::span<const double> x, std::span<const Point> centroids) {
  if (centroids.empty()) throw UsageError("no centroids");
  std::size_t best = 0;
  double best_d = squared_l2(x, centroids[0].coords());
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = squared_l2(x, centroids[j].coords());
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

double ssqe(std::span<const Point> samples, std::span<const Point> centroids) {
  double total = 0.0;
  for (const Point& x : samples) {
    total += squared_l2(x.coords(), centroids[nearest_centroid(x.coords(), centroids)].coords());
  }
  return total;
}

Codebook kmeans(std::span<const Point> samples, const KMeansConfig& config) {
  const Canonical c = canonicalize(samples);
  check_k(config.k, c.unique.size());
  return lloyd(c, farthest_point_seeds(c, config.k, config.seed), config);
}

Codebook kmeans(std::span<const double> scalars, const KMeansConfig& config) {
  const auto pts = as_points(scalars);
  return kmeans(std::span<const Point>(pts), config);
}

Selection select_k(std::span<const Point> samples, const SelectKConfig& config) {
  return select_k_canonical(canonicalize(samples), config);
}

Selection select_k(std::span<const double> scalars, const SelectKConfig& config) {
  const auto pts = as_points(scalars);
  return select_k(std::span<const Point>(pts), config);
}

HierarchicalCodebook hierarchical_quantize(std::span<const Query> queries, const SelectKConfig& l1,
                                           const SelectKConfig& l2) {
  if (queries.empty()) throw UsageError("hierarchical quantization needs at least one query");
  std::vector<Point> centers;
  std::vector<double> radii;
  centers.reserve(queries.size());
  radii.reserve(queries.size());
  for (const Query& q : queries) {
    if (!(q.theta > 0.0)) throw UsageError("query radius must be > 0");
    centers.push_back(q.center);
    radii.push_back(q.theta);
  }

  HierarchicalCodebook hc;
  hc.locations = select_k(std::span<const Point>(centers), l1).codebook;
  hc.pooled_l = select_k(std::span<const double>(radii), l2).codebook.k();

  std::vector<std::vector<std::size_t>> members(hc.locations.k());
  for (std::size_t i = 0; i < queries.size(); ++i) members[hc.locations.assignments[i]].push_back(i);

  hc.radii.resize(hc.locations.k());
  for (std::size_t k = 0; k < hc.locations.k(); ++k) {
    std::vector<Point> local;
    local.reserve(members[k].size());
    for (std::size_t i : members[k]) local.push_back(Point{radii[i]});
    const Canonical c = canonicalize(local);
    const std::size_t l = std::min(hc.pooled_l, c.unique.size());
    const KMeansConfig kc{l, l2.seed, l2.max_iter, l2.tol};
    Codebook cb = lloyd(c, farthest_point_seeds(c, l, l2.seed), kc);

    std::vector<std::size_t> order(cb.k());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cb.centroids[a][0] < cb.centroids[b][0]; });
    std::vector<std::size_t> rank(cb.k());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    Codebook sorted = cb;
    for (std::size_t r = 0; r < order.size(); ++r) sorted.centroids[r] = cb.centroids[order[r]];
    for (auto& a : sorted.assignments) a = rank[a];
    hc.radii[k] = std::move(sorted);
  }
  return hc;
}

}  // namespace xaxa
