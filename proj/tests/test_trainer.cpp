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


#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "xaxa/dataset.hpp"
#include "xaxa/errors.hpp"
#include "xaxa/trainer.hpp"

namespace xaxa {
namespace {

// One location, constant cells at the given radii.
XaxaModel flat_model(const std::vector<double>& rr, const std::vector<double>& level, double z = 0.5) {
  XaxaModel m;
  m.hyper.z = z;
  m.answer = Range{0.0, 1.0};
  LocationCluster c;
  c.lr = Point{0.5, 0.5};
  for (std::size_t l = 0; l < rr.size(); ++l) {
    Cell cell;
    cell.rr = rr[l];
    cell.plr = PlrModel{level[l], {}};
    c.cells.push_back(cell);
  }
  m.clusters.push_back(c);
  m.version = 1;
  return m;
}

TEST(Assign, HandEvaluatedCost) {
  const XaxaModel m = flat_model({0.1, 0.3}, {0.4, 1.4});
  const Assignment a = assign(m, Query{Point{0.5, 0.5}, 0.18, {}}, 0.4);
  EXPECT_EQ(a.k, 0u);
  EXPECT_EQ(a.l, 0u);
}

TEST(Assign, LimitsOfZ) {
  // z = 0 ignores radius distance entirely.
  const XaxaModel err_only = flat_model({0.1, 0.3}, {0.9, 0.2}, 0.0);
  EXPECT_EQ(assign(err_only, Query{Point{0.5, 0.5}, 0.1, {}}, 0.2).l, 1u);
  const XaxaModel dist_only = flat_model({0.1, 0.3}, {0.9, 0.2}, 1.0);
  EXPECT_EQ(assign(dist_only, Query{Point{0.5, 0.5}, 0.1, {}}, 0.2).l, 0u);
}

TEST(Assign, NearestLocationAndErrors) {
  XaxaModel m = flat_model({0.1}, {0.5});
  LocationCluster far = m.clusters[0];
  far.lr = Point{0.9, 0.1};
  m.clusters.push_back(far);
  EXPECT_EQ(assign(m, Query{Point{0.8, 0.2}, 0.1, {}}, 0.5).k, 1u);
  EXPECT_THROW(assign(m, Query{Point{0.8}, 0.1, {}}, 0.5), UsageError);
  EXPECT_THROW(assign(XaxaModel{}, Query{Point{0.8}, 0.1, {}}, 0.5), UsageError);
}

TEST(Assign, CommonScalingOfBothTermsKeepsArgmin) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const XaxaModel a = flat_model({0.05, 0.1, 0.2}, {u(rng), u(rng), u(rng)});
    XaxaModel b = a;
    b.answer = Range{0.0, 50.0};
    const Query q{Point{0.5, 0.5}, 0.3 * u(rng) + 0.01, {}};
    const double y = u(rng);
    EXPECT_EQ(assign(a, q, y).l, assign(b, q, 50.0 * y).l);
  }
}

TEST(UpdateRr, SignStep) {
  EXPECT_NEAR(update_rr(0.10, 0.20, 0.01, 0.5), 0.105, 1e-15);
  EXPECT_EQ(update_rr(0.10, 0.10, 0.01, 0.5), 0.10);
  EXPECT_DOUBLE_EQ(update_rr(0.30, 0.29, 0.01, 0.5), 0.30 - 0.005);
  EXPECT_DOUBLE_EQ(update_rr(0.30, 0.01, 0.01, 0.5), 0.30 - 0.005);
}

TEST(UpdateLr, RuleAndContraction) {
  EXPECT_EQ(update_lr(Point{0.3, 0.4}, Point{0.3, 0.4}, 0.01), (Point{0.3, 0.4}));
  const Point p = update_lr(Point{0, 0}, Point{1, 0}, 0.01);
  EXPECT_DOUBLE_EQ(p[0], 0.01);
  EXPECT_EQ(p[1], 0.0);
  Point w{0.0};
  for (int i = 0; i < 50; ++i) w = update_lr(w, Point{1.0}, 0.1);
  EXPECT_NEAR(1.0 - w[0], std::pow(0.9, 50), 1e-12);
  EXPECT_THROW(update_lr(Point{0.0}, Point{1.0, 2.0}, 0.1), UsageError);
}

TEST(ProcessPair, MovesTowardRadiusEveryTime) {
  XaxaModel m = flat_model({0.1, 0.3}, {0.4, 0.6}, 1.0);
  const Query q{Point{0.6, 0.5}, 0.15, {}};
  const Assignment a1 = process_pair(m, q, 0.5);
  EXPECT_EQ(a1.l, 0u);
  EXPECT_DOUBLE_EQ(m.clusters[0].cells[0].rr, 0.11);
  process_pair(m, q, 0.5);
  EXPECT_DOUBLE_EQ(m.clusters[0].cells[0].rr, 0.12);
  EXPECT_EQ(m.clusters[0].cells[0].buffer.size(), 2u);
  EXPECT_EQ(m.clusters[0].cells[0].count, 2u);
  EXPECT_EQ(m.clusters[0].count, 2u);
  EXPECT_EQ(m.pending, 2u);
  EXPECT_EQ(m.version, 3u);
  EXPECT_NEAR(m.clusters[0].lr[0], 0.5 + 0.1 * (1 - 0.99 * 0.99), 1e-12);
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW(process_pair(m, Query{Point{0.6, 0.5}, 0.0, {}}, 0.5), UsageError);
}

TEST(ProcessPair, InvariantsHoldOnRandomStreams) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  XaxaModel m = flat_model({0.05, 0.06, 0.07, 0.3}, {0.1, 0.2, 0.3, 0.4}, 0.7);
  m.hyper.alpha = 0.05;
  for (int t = 0; t < 5000; ++t) {
    process_pair(m, Query{Point{u(rng), u(rng)}, 0.01 + 0.4 * u(rng), {}}, u(rng));
    ASSERT_NO_THROW(m.validate());
  }
}

TEST(ProcessPair, MedianConvergence) {
  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> e(10.0);
  XaxaModel m = flat_model({0.3}, {0.5}, 1.0);
  std::vector<double> seen;
  double tail = 0.0;
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const double theta = std::clamp(e(rng), 1e-6, 1.0);
    seen.push_back(theta);
    process_pair(m, Query{Point{0.5, 0.5}, theta, {}}, 0.5);
    if (t >= n * 8 / 10) tail += m.clusters[0].cells[0].rr;
  }
  tail /= n * 2 / 10;
  std::nth_element(seen.begin(), seen.begin() + n / 2, seen.end());
  EXPECT_NEAR(tail, seen[n / 2], 0.02);
}

TEST(Retrain, CounterSemanticsAndTouchedCells) {
  XaxaModel m = flat_model({0.1, 0.3}, {0.4, 0.6}, 1.0);
  m.hyper.retrain_every = 100;
  for (int i = 0; i < 99; ++i) process_pair(m, Query{Point{0.5, 0.5}, 0.1, {}}, 0.4);
  EXPECT_FALSE(maybe_retrain(m).triggered);
  EXPECT_EQ(m.clusters[0].cells[0].buffer.size(), 99u);
  process_pair(m, Query{Point{0.5, 0.5}, 0.1, {}}, 0.4);
  const std::uint64_t v = m.version;
  const RetrainReport r = maybe_retrain(m);
  EXPECT_TRUE(r.triggered);
  ASSERT_EQ(r.refit.size(), 1u);
  EXPECT_EQ(r.refit[0], (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(m.pending, 0u);
  EXPECT_EQ(m.version, v + 1);
  EXPECT_TRUE(m.clusters[0].cells[0].buffer.empty());
  EXPECT_EQ(m.clusters[0].cells[0].samples.size(), 100u);
  EXPECT_FALSE(maybe_retrain(m).triggered);
}

TEST(Retrain, ExactPairsKeepPredictions) {
  XaxaModel m = flat_model({0.2}, {0.0}, 1.0);
  const PlrModel truth{0.1, {{2.0, 0.15}}};
  m.clusters[0].cells[0].plr = truth;
  m.hyper.retrain_every = 50;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.05 + 0.005 * i;
    process_pair(m, Query{Point{0.5, 0.5}, t, {}}, truth.predict(t));
  }
  ASSERT_TRUE(maybe_retrain(m).triggered);
  for (double t = 0.05; t < 0.3; t += 0.01) EXPECT_NEAR(m.clusters[0].cells[0].plr.predict(t), truth.predict(t), 1e-6);
}

TEST(Retrain, ShiftedStreamImprovesBufferFit) {
  XaxaModel m = flat_model({0.2}, {0.0}, 1.0);
  m.clusters[0].cells[0].plr = PlrModel{0.1, {{1.0, 0.1}}};
  m.hyper.retrain_every = 100;
  std::vector<PlrSample> buf;
  for (int i = 0; i < 100; ++i) {
    const double t = 0.05 + 0.003 * i;
    const double y = 0.3 + 2.0 * hinge(t, 0.2);
    buf.push_back({t, y});
    process_pair(m, Query{Point{0.5, 0.5}, t, {}}, y);
  }
  const double before = training_r2(m.clusters[0].cells[0].plr, buf);
  ASSERT_TRUE(maybe_retrain(m).triggered);
  EXPECT_GE(training_r2(m.clusters[0].cells[0].plr, buf), before);
}

Dataset uniform_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> flat(2 * n);
  for (double& v : flat) v = u(rng);
  Dataset ds("u", 2, flat);
  ds.build_index();
  return ds;
}

std::vector<Query> two_blob_history(const Dataset& ds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 0.01);
  std::uniform_real_distribution<double> band(-0.01, 0.01);
  std::vector<Query> h;
  for (int i = 0; i < 400; ++i) {
    const double c = i % 2 ? 0.25 : 0.75;
    const double theta = (i / 2) % 2 ? 0.05 + band(rng) : 0.15 + band(rng);
    Query q{Point{c + g(rng), c + g(rng)}, theta, {}};
    q.answer = execute_aq(ds, q, AggregateKind::Count).value;
    h.push_back(q);
  }
  return h;
}

Hyperparams blob_hyper() {
  Hyperparams h;
  h.l1.epsilon = 0.1;
  h.l2.epsilon = 0.01;
  return h;
}

TEST(Preprocess, TwoBlobsTwoBands) {
  const Dataset ds = uniform_points(20000, 1);
  const auto hist = two_blob_history(ds, 2);
  const XaxaModel m = preprocess(hist, blob_hyper());
  ASSERT_EQ(m.k(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    ASSERT_EQ(m.l(k), 2u);
    const auto u = m.radius_representatives(k);
    EXPECT_NEAR(u[0], 0.05, 0.005);
    EXPECT_NEAR(u[1], 0.15, 0.005);
    for (const Cell& c : m.clusters[k].cells) EXPECT_GE(training_r2(c.plr, c.samples), 0.9);
  }
  EXPECT_EQ(m.version, 1u);
  EXPECT_NO_THROW(m.validate());
}

TEST(Preprocess, SingleQueryAndErrors) {
  const std::vector<Query> one{Query{Point{0.2, 0.2}, 0.1, 12.0}};
  const XaxaModel m = preprocess(one, Hyperparams{});
  EXPECT_EQ(m.k(), 1u);
  EXPECT_EQ(m.l(0), 1u);
  EXPECT_EQ(m.clusters[0].cells[0].plr.size(), 0u);
  EXPECT_THROW(preprocess(std::vector<Query>{}, Hyperparams{}), UsageError);
  EXPECT_THROW(preprocess(std::vector<Query>{Query{Point{0.2}, 0.1, {}}}, Hyperparams{}), UsageError);
}

TEST(Preprocess, DuplicatedHistoryGivesSameModel) {
  const Dataset ds = uniform_points(20000, 3);
  const auto hist = two_blob_history(ds, 4);
  auto doubled = hist;
  doubled.insert(doubled.end(), hist.begin(), hist.end());
  const XaxaModel a = preprocess(hist, blob_hyper());
  Hyperparams twice = blob_hyper();
  twice.l1.epsilon *= 2;
  twice.l2.epsilon *= 2;
  const XaxaModel b = preprocess(doubled, twice);
  ASSERT_EQ(a.k(), b.k());
  EXPECT_EQ(a.answer, b.answer);
  for (std::size_t k = 0; k < a.k(); ++k) {
    EXPECT_EQ(a.clusters[k].lr, b.clusters[k].lr);
    ASSERT_EQ(a.l(k), b.l(k));
    for (std::size_t l = 0; l < a.l(k); ++l) {
      const PlrModel& pa = a.clusters[k].cells[l].plr;
      const PlrModel& pb = b.clusters[k].cells[l].plr;
      EXPECT_EQ(a.clusters[k].cells[l].rr, b.clusters[k].cells[l].rr);
      ASSERT_EQ(pa.size(), pb.size());
      EXPECT_NEAR(pa.beta0, pb.beta0, 1e-9);
      for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa.terms[i].knot, pb.terms[i].knot);
        EXPECT_NEAR(pa.terms[i].beta, pb.terms[i].beta, 1e-6);
      }
    }
  }
}

}  // namespace
}  // namespace xaxa
