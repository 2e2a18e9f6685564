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

#include "xaxa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "xaxa/errors.hpp"
#include "xaxa/explainer.hpp"

namespace xaxa {

using nlohmann::json;

namespace {

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

double mean_of(std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

std::vector<double> slopes(std::span<const double> theta, std::span<const double> y) {
  std::vector<double> out(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) out[i] = (y[i + 1] - y[i]) / (theta[i + 1] - theta[i]);
  return out;
}

}  // namespace

void CurvePair::check() const {
  if (actual.size() < 2) throw UsageError("metric needs at least 2 points");
  if (actual.size() != predicted.size() || actual.size() != theta.size()) {
    throw UsageError("metric series have different lengths");
  }
}

std::optional<double> r2(const CurvePair& pair) {
  pair.check();
  if (is_constant(pair.actual)) return std::nullopt;
  const double ybar = mean_of(pair.actual);
  CompensatedSum sse, sst;
  for (std::size_t i = 0; i < pair.actual.size(); ++i) {
    const double e = pair.actual[i] - pair.predicted[i];
    const double d = pair.actual[i] - ybar;
    sse.add(e * e);
    sst.add(d * d);
  }
  return 1.0 - sse.value() / sst.value();
}

std::optional<double> alt_r2(const CurvePair& pair) {
  pair.check();
  if (is_constant(pair.actual)) return std::nullopt;
  const double ybar = mean_of(pair.actual);
  CompensatedSum num, den;
  for (std::size_t i = 0; i < pair.actual.size(); ++i) {
    num.add(std::abs(pair.actual[i] - pair.predicted[i]));
    den.add(std::abs(pair.actual[i] - ybar));
  }
  return 1.0 - num.value() / den.value();
}

double kl(const CurvePair& pair, std::size_t bins, double smoothing) {
  pair.check();
  if (bins < 2) throw UsageError("kl needs at least 2 bins");
  if (!(smoothing > 0.0)) throw UsageError("kl smoothing must be > 0");
  const auto [amin, amax] = std::minmax_element(pair.actual.begin(), pair.actual.end());
  const auto [pmin, pmax] = std::minmax_element(pair.predicted.begin(), pair.predicted.end());
  const double lo = std::min(*amin, *pmin);
  const double hi = std::max(*amax, *pmax);
  const double width = (hi - lo) / static_cast<double>(bins);

  auto histogram = [&](std::span<const double> v) {
    std::vector<double> h(bins, smoothing);
    for (double x : v) {
      std::size_t b = 0;
      if (width > 0) {
        b = static_cast<std::size_t>(std::floor((x - lo) / width));
        b = std::min(b, bins - 1);
      }
      h[b] += 1.0;
    }
    const double total = static_cast<double>(v.size()) + smoothing * static_cast<double>(bins);
    for (double& c : h) c /= total;
    return h;
  };
  const auto p = histogram(pair.actual);
  const auto q = histogram(pair.predicted);
  CompensatedSum s;
  for (std::size_t b = 0; b < bins; ++b) s.add(p[b] * std::log2(p[b] / q[b]));
  return std::max(0.0, s.value());
}

std::optional<double> cosine_similarity(const CurvePair& pair) {
  pair.check();
  for (std::size_t i = 0; i + 1 < pair.theta.size(); ++i) {
    if (!(pair.theta[i + 1] > pair.theta[i])) throw UsageError("cosine needs a strictly increasing grid");
  }
  const auto a = slopes(pair.theta, pair.actual);
  const auto b = slopes(pair.theta, pair.predicted);
  CompensatedSum dot, na, nb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot.add(a[i] * b[i]);
    na.add(a[i] * a[i]);
    nb.add(b[i] * b[i]);
  }
  if (na.value() == 0.0 || nb.value() == 0.0) return std::nullopt;
  const double c = dot.value() / (std::sqrt(na.value()) * std::sqrt(nb.value()));
  return std::clamp(c, -1.0, 1.0);
}

std::optional<double> nrmse(const CurvePair& pair, bool unrooted) {
  pair.check();
  const auto [amin, amax] = std::minmax_element(pair.actual.begin(), pair.actual.end());
  const double range = *amax - *amin;
  if (!(range > 0.0)) return std::nullopt;
  CompensatedSum sse;
  for (std::size_t i = 0; i < pair.actual.size(); ++i) {
    const double e = pair.actual[i] - pair.predicted[i];
    sse.add(e * e);
  }
  const double mse = sse.value() / static_cast<double>(pair.actual.size());
  return (unrooted ? mse : std::sqrt(mse)) / range;
}

const MetricSummary& EvaluationReport::metric(std::string_view name) const {
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    if (kMetricNames[m] == name) return summary[m];
  }
  throw UsageError("unknown metric " + std::string(name));
}

void summarize(EvaluationReport& report) {
  report.undefined_points = 0;
  report.failed_queries = 0;
  for (const QueryMetrics& row : report.rows) {
    report.undefined_points += row.undefined_points;
    if (!row.error.empty()) ++report.failed_queries;
  }
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    std::vector<double> vals;
    MetricSummary s;
    for (const QueryMetrics& row : report.rows) {
      if (row.values[m]) {
        vals.push_back(*row.values[m]);
      } else {
        ++s.undefined;
      }
    }
    s.defined = vals.size();
    if (!vals.empty()) {
      s.mean = mean_of(vals);
      if (vals.size() > 1) {
        CompensatedSum ss;
        for (double v : vals) ss.add((v - s.mean) * (v - s.mean));
        s.stddev = std::sqrt(ss.value() / static_cast<double>(vals.size() - 1));
      }
    }
    report.summary[m] = s;
  }
}

EvaluationReport evaluate(const XaxaModel& model, std::span<const Query> queries, const Dataset& dataset,
                          AggregateKind kind, const EvaluationOptions& options) {
  EvaluationReport report;
  report.kind = kind;
  report.options = options;
  report.rows.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    QueryMetrics row;
    row.query = i;
    try {
      const Query& q = queries[i];
      const double lo = options.theta_min < q.theta ? options.theta_min : q.theta / static_cast<double>(options.n);
      const auto actual = actual_explanation(dataset, q, kind, options.n, lo);
      const ExplanationFunction expl = build_explanation(model, q);
      CurvePair pair;
      for (const SeriesPoint& p : actual) {
        if (!p.defined) {
          ++row.undefined_points;
          continue;
        }
        pair.theta.push_back(p.theta);
        pair.actual.push_back(p.y);
        pair.predicted.push_back(expl.predict(p.theta));
      }
      if (pair.actual.size() >= 2) {
        row.values[0] = r2(pair);
        row.values[1] = alt_r2(pair);
        row.values[2] = kl(pair, options.kl_bins, options.kl_smoothing);
        row.values[3] = cosine_similarity(pair);
        row.values[4] = nrmse(pair, options.unrooted_nrmse);
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  summarize(report);
  return report;
}

void save_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "query,metric,value\n";
  for (const QueryMetrics& row : report.rows) {
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      out << row.query << ',' << kMetricNames[m] << ',';
      if (row.values[m]) {
        out << *row.values[m];
      } else {
        out << "undefined";
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

json report_summary_json(const EvaluationReport& report) {
  json metrics = json::object();
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    const MetricSummary& s = report.summary[m];
    metrics[std::string(kMetricNames[m])] = {
        {"mean", s.defined ? json(s.mean) : json(nullptr)},
        {"std", s.defined ? json(s.stddev) : json(nullptr)},
        {"defined", s.defined},
        {"undefined", s.undefined}};
  }
  return {{"kind", std::string(to_string(report.kind))},
          {"queries", report.rows.size()},
          {"n", report.options.n},
          {"theta_min", report.options.theta_min},
          {"unrooted_nrmse", report.options.unrooted_nrmse},
          {"undefined_points", report.undefined_points},
          {"failed_queries", report.failed_queries},
          {"metrics", metrics}};
}

}  // namespace xaxa
