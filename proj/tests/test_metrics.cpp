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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "test_util.hpp"
#include "xaxa/errors.hpp"
#include "xaxa/metrics.hpp"

namespace xaxa {
namespace {

CurvePair pair_of(std::vector<double> y, std::vector<double> yh) {
  CurvePair p;
  for (std::size_t i = 0; i < y.size(); ++i) p.theta.push_back(0.1 * static_cast<double>(i + 1));
  p.actual = std::move(y);
  p.predicted = std::move(yh);
  return p;
}

TEST(Metrics, HandValues) {
  const CurvePair p = pair_of({1, 2, 3}, {1, 2, 5});
  EXPECT_DOUBLE_EQ(*r2(p), -1.0);
  EXPECT_DOUBLE_EQ(*alt_r2(p), 0.0);
  EXPECT_DOUBLE_EQ(*r2(pair_of({1, 2, 3}, {1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(*alt_r2(pair_of({1, 2, 3}, {1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(*r2(pair_of({1, 2, 3}, {2, 2, 2})), 0.0);
  EXPECT_DOUBLE_EQ(*nrmse(pair_of({0, 1}, {0.5, 0.5})), 0.5);
  EXPECT_DOUBLE_EQ(*nrmse(pair_of({0, 1}, {0.5, 0.5}), true), 0.25);
  EXPECT_EQ(*nrmse(pair_of({0, 1}, {0, 1})), 0.0);
}

TEST(Metrics, KlSmoothedHistogram) {
  const CurvePair p = pair_of(std::vector<double>(10, 0.0), std::vector<double>(10, 1.0));
  const double expect = std::log2(11.0) * 11.0 / 12.0 + std::log2(1.0 / 11.0) / 12.0;
  EXPECT_NEAR(kl(p, 2, 1.0), expect, 1e-12);
  EXPECT_EQ(kl(pair_of({1, 5, 2}, {1, 5, 2})), 0.0);
}

TEST(Metrics, UndefinedSentinels) {
  const CurvePair flat = pair_of({2, 2, 2}, {1, 2, 3});
  EXPECT_FALSE(r2(flat));
  EXPECT_FALSE(alt_r2(flat));
  EXPECT_FALSE(nrmse(flat));
  EXPECT_FALSE(cosine_similarity(flat));
  EXPECT_FALSE(cosine_similarity(pair_of({1, 2, 3}, {4, 4, 4})));
  EXPECT_THROW(r2(pair_of({1}, {1})), UsageError);
  CurvePair ragged = pair_of({1, 2}, {1, 2});
  ragged.predicted.push_back(3);
  EXPECT_THROW(kl(ragged), UsageError);
}

TEST(Metrics, CosineExamples) {
  EXPECT_NEAR(*cosine_similarity(pair_of({1, 3, 2, 5}, {11, 13, 12, 15})), 1.0, 1e-15);
  EXPECT_NEAR(*cosine_similarity(pair_of({1, 3, 2, 5}, {-1, -3, -2, -5})), -1.0, 1e-15);
  EXPECT_NEAR(*cosine_similarity(pair_of({1, 3, 2, 5}, {2, 6, 4, 10})), 1.0, 1e-15);
}

TEST(Metrics, AgreeWithOracleOnRandomPairs) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> y(20), yh(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = u(rng), yh[i] = u(rng);
    const CurvePair p = pair_of(y, yh);
    EXPECT_NEAR(*r2(p), static_cast<double>(*oracle::r2(y, yh)), 1e-10);
    EXPECT_NEAR(*alt_r2(p), static_cast<double>(*oracle::alt_r2(y, yh)), 1e-10);
    EXPECT_NEAR(*nrmse(p), static_cast<double>(*oracle::nrmse(y, yh)), 1e-12);
    EXPECT_NEAR(*cosine_similarity(p), static_cast<double>(*oracle::cosine(p.theta, y, yh)), 1e-12);
    const double k = kl(p);
    EXPECT_GE(k, 0.0);
    EXPECT_NEAR(k, static_cast<double>(oracle::kl(y, yh, 10, 1.0)), 1e-12);
    EXPECT_LE(*r2(p), 1.0);

    // Invariances.
    const double a = 0.5 + std::abs(u(rng)), b = u(rng);
    std::vector<double> ya(y), yha(yh), yhs(yh);
    for (std::size_t i = 0; i < 20; ++i) {
      ya[i] = a * y[i] + b;
      yha[i] = a * yh[i] + b;
      yhs[i] = a * yh[i] + b;
    }
    EXPECT_NEAR(*nrmse(pair_of(ya, yha)), *nrmse(p), 1e-10);
    EXPECT_NEAR(*cosine_similarity(pair_of(y, yhs)), *cosine_similarity(p), 1e-10);
    EXPECT_NEAR(*cosine_similarity(pair_of(ya, yh)), *cosine_similarity(p), 1e-10);
  }
}

TEST(Evaluate, ExactFixtureScoresPerfectly) {
  const test::ExactFixture f = test::exact_fixture();
  const std::vector<Query> qs{f.query};
  const EvaluationReport r = evaluate(f.model, qs, f.dataset, AggregateKind::Count);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].error.empty());
  EXPECT_NEAR(r.metric("r2").mean, 1.0, 1e-9);
  EXPECT_NEAR(r.metric("alt_r2").mean, 1.0, 1e-9);
  EXPECT_NEAR(r.metric("nrmse").mean, 0.0, 1e-9);
  EXPECT_NEAR(r.metric("kl").mean, 0.0, 1e-12);
  EXPECT_NEAR(r.metric("cosine").mean, 1.0, 1e-9);
  EXPECT_EQ(r.failed_queries, 0u);
}

TEST(Evaluate, EmptyAndFailingQueries) {
  const test::ExactFixture f = test::exact_fixture();
  const EvaluationReport empty = evaluate(f.model, std::vector<Query>{}, f.dataset, AggregateKind::Count);
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_EQ(empty.metric("r2").defined, 0u);

  const std::vector<Query> qs{f.query, Query{Point{0.5}, 0.2, {}}, Query{f.query.center, 0.01, {}}};
  const EvaluationReport r = evaluate(f.model, qs, f.dataset, AggregateKind::Count);
  EXPECT_EQ(r.failed_queries, 1u);
  EXPECT_FALSE(r.rows[1].error.empty());
  EXPECT_TRUE(r.rows[2].error.empty());
  EXPECT_EQ(r.metric("r2").defined + r.metric("r2").undefined, 3u);
}

TEST(Summary, MeanAndSampleStddev) {
  EvaluationReport r;
  for (double v : {1.0, 2.0, 4.0}) {
    QueryMetrics row;
    row.values[0] = v;
    r.rows.push_back(row);
  }
  r.rows.push_back(QueryMetrics{});
  summarize(r);
  EXPECT_DOUBLE_EQ(r.metric("r2").mean, 7.0 / 3.0);
  EXPECT_NEAR(r.metric("r2").stddev, std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 2), 1e-12);
  EXPECT_EQ(r.metric("r2").defined, 3u);
  EXPECT_EQ(r.metric("r2").undefined, 1u);
  EXPECT_THROW(r.metric("bogus"), UsageError);
}

TEST(Report, CsvAndJson) {
  test::TempDir dir;
  EvaluationReport r;
  QueryMetrics row;
  row.values[0] = 0.5;
  r.rows.push_back(row);
  summarize(r);
  save_report_csv(r, dir.path() / "r.csv");
  const std::string csv = test::TempDir::read(dir.path() / "r.csv");
  EXPECT_EQ(csv.substr(0, 18), "query,metric,value");
  EXPECT_NE(csv.find("0,r2,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("0,kl,undefined\n"), std::string::npos);
  const auto j = report_summary_json(r);
  EXPECT_TRUE(j.contains("metrics"));
}

}  // namespace
}  // namespace xaxa
