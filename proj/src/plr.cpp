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

#include "xaxa/plr.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "xaxa/errors.hpp"

namespace xaxa {

double PlrModel::predict(double theta) const noexcept {
  double y = beta0;
  for (const auto& t : terms) y += t.beta * hinge(theta, t.knot);
  return y;
}

double PlrModel::slope(double theta) const noexcept {
  double s = 0.0;
  for (const auto& t : terms) {
    if (theta >= t.knot) s += t.beta;
  }
  return s;
}

double training_r2(const PlrModel& model, std::span<const PlrSample> samples) {
  if (samples.empty()) return 1.0;
  double mean = 0.0;
  for (const auto& s : samples) mean += s.y;
  mean /= static_cast<double>(samples.size());
  double rss = 0.0, tss = 0.0;
  for (const auto& s : samples) {
    const double r = s.y - model.predict(s.theta);
    rss += r * r;
    tss += (s.y - mean) * (s.y - mean);
  }
  if (tss == 0.0) return rss == 0.0 ? 1.0 : 0.0;
  return 1.0 - rss / tss;
}

namespace {

Eigen::MatrixXd design(std::span<const PlrSample> samples, const std::vector<double>& knots) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(knots.size() + 1));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = 1.0;
    for (std::size_t j = 0; j < knots.size(); ++j) {
      x(r, static_cast<Eigen::Index>(j + 1)) = hinge(samples[i].theta, knots[j]);
    }
  }
  return x;
}

// Least-squares coefficients for the given knots, or nullopt when rank deficient.
std::optional<PlrModel> solve(std::span<const PlrSample> samples, const std::vector<double>& knots,
                              const Eigen::VectorXd& y) {
  const Eigen::MatrixXd x = design(samples, knots);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) return std::nullopt;
  const Eigen::VectorXd beta = qr.solve(y);
  PlrModel m;
  m.beta0 = beta(0);
  for (std::size_t j = 0; j < knots.size(); ++j) m.terms.push_back({beta(static_cast<Eigen::Index>(j + 1)), knots[j]});
  std::sort(m.terms.begin(), m.terms.end(), [](const HingeTerm& a, const HingeTerm& b) { return a.knot < b.knot; });
  return m;
}

}  // namespace

PlrFit fit(std::span<const PlrSample> samples, const PlrFitConfig& config) {
  if (samples.empty()) throw UsageError("cannot fit a piecewise-linear model to zero samples");
  for (const auto& s : samples) {
    if (!std::isfinite(s.theta) || !std::isfinite(s.y)) throw UsageError("non-finite sample in PLR fit");
  }
  const std::size_t n = samples.size();
  double mean = 0.0;
  for (const auto& s : samples) mean += s.y;
  mean /= static_cast<double>(n);
  double tss = 0.0;
  for (const auto& s : samples) tss += (s.y - mean) * (s.y - mean);

  PlrFit out;
  out.model.beta0 = mean;
  out.r2_trace.push_back(tss == 0.0 ? 1.0 : 0.0);
  if (n < config.min_samples || tss == 0.0 || config.max_terms == 0) return out;

  double theta_max = samples[0].theta;
  for (const auto& s : samples) theta_max = std::max(theta_max, s.theta);
  std::vector<double> candidates;
  for (const auto& s : samples) {
    if (s.theta < theta_max) candidates.push_back(s.theta);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(rows);
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = samples[i].y;

  std::vector<double> knots;
  std::vector<bool> used(candidates.size(), false);
  double r2 = 0.0;
  Eigen::VectorXd col(rows);
  while (knots.size() < config.max_terms) {
    // Orthonormal basis of the current design; each candidate column is
    // projected off it to get the RSS drop of adding that single term.
    const Eigen::MatrixXd x = design(samples, knots);
    Eigen::HouseholderQR<Eigen::MatrixXd> hqr(x);
    const Eigen::MatrixXd q = hqr.householderQ() * Eigen::MatrixXd::Identity(rows, x.cols());
    const Eigen::VectorXd resid = y - q * (q.transpose() * y);
    const double rss_base = resid.squaredNorm();

    std::optional<std::size_t> best;
    double best_rss = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      for (std::size_t i = 0; i < n; ++i) col(static_cast<Eigen::Index>(i)) = hinge(samples[i].theta, candidates[c]);
      const double col_norm = col.squaredNorm();
      Eigen::VectorXd v = col - q * (q.transpose() * col);
      v -= q * (q.transpose() * v);
      const double vn = v.squaredNorm();
      if (!(vn > 1e-12 * col_norm)) continue;
      const double proj = v.dot(resid);
      const double rss = std::max(0.0, rss_base - proj * proj / vn);
      if (!best || rss < best_rss - 1e-12 * tss) {
        best = c;
        best_rss = rss;
      }
    }
    if (!best) break;
    if ((1.0 - best_rss / tss) - r2 < config.r2_gain_threshold) break;

    std::vector<double> trial = knots;
    trial.push_back(candidates[*best]);
    auto model = solve(samples, trial, y);
    if (!model) {
      out.singular_stop = true;
      break;
    }
    knots = std::move(trial);
    used[*best] = true;
    out.model = std::move(*model);
    r2 = training_r2(out.model, samples);
    out.r2_trace.push_back(r2);
  }

  // Terms the final solve left at numerical zero are removed.
  const double scale = std::sqrt(tss / static_cast<double>(n));
  std::vector<double> kept;
  for (const auto& t : out.model.terms) {
    if (std::abs(t.beta) * (theta_max - t.knot) > 1e-9 * scale) kept.push_back(t.knot);
  }
  if (kept.size() < out.model.terms.size()) {
    if (auto slim = solve(samples, kept, y); slim && training_r2(*slim, samples) >= r2 - 1e-12) out.model = std::move(*slim);
  }
  return out;
}

}  // namespace xaxa
