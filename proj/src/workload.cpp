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

#include "xaxa/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "xaxa/errors.hpp"

namespace xaxa {

using nlohmann::json;

namespace {

constexpr std::uint64_t kQueryStream = 0x9E3779B97F4A7C15ULL;

std::string_view family_name(Family f) { return f == Family::Gaussian ? "gaussian" : "uniform"; }

Family parse_family(std::string_view s) {
  if (s == "gaussian") return Family::Gaussian;
  if (s == "uniform") return Family::Uniform;
  throw UsageError("unknown distribution family " + std::string(s));
}

double parse_number(std::string_view text, std::size_t line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("line " + std::to_string(line) + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

void WorkloadSpec::validate() const {
  if (dim == 0) throw UsageError("workload dimension must be >= 1");
  if (c == 0 || j == 0) throw UsageError("mixture component counts must be >= 1");
  if (!(theta_min > 0.0) || !(theta_max > theta_min)) throw UsageError("need 0 < theta_min < theta_max");
  if (center_variance < 0.0 || radius_variance < 0.0) throw UsageError("variances must be >= 0");
  if (domain_uniform) return;
  if (center_params.size() != c) throw UsageError("expected " + std::to_string(c) + " center components");
  if (radius_params.size() != j) throw UsageError("expected " + std::to_string(j) + " radius components");
  for (const Point& p : center_params) {
    if (p.dim() != dim) throw UsageError("center component dimension mismatch");
  }
}

WorkloadSpec make_workload_spec(std::string_view preset, std::size_t dim, std::size_t m, std::uint64_t seed,
                                std::size_t c, std::size_t j) {
  WorkloadSpec spec;
  spec.preset = std::string(preset);
  spec.dim = dim;
  spec.m = m;
  spec.seed = seed;
  spec.c = c;
  spec.j = j;
  if (preset == "gauss-gauss") {
    spec.center_family = Family::Gaussian;
    spec.radius_family = Family::Gaussian;
  } else if (preset == "gauss-uni") {
    spec.center_family = Family::Gaussian;
    spec.radius_family = Family::Uniform;
  } else if (preset == "uni-gauss") {
    spec.center_family = Family::Uniform;
    spec.radius_family = Family::Gaussian;
  } else if (preset == "uni-uni") {
    spec.center_family = Family::Uniform;
    spec.radius_family = Family::Uniform;
  } else if (preset == "dc-u") {
    spec.domain_uniform = true;
    spec.center_family = Family::Uniform;
    spec.radius_family = Family::Uniform;
    spec.validate();
    return spec;
  } else {
    throw UsageError("unknown workload preset '" + std::string(preset) +
                     "' (gauss-gauss, gauss-uni, uni-gauss, uni-uni, dc-u)");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = unit(rng);
    spec.center_params.emplace_back(std::move(v));
  }
  std::uniform_real_distribution<double> gauss_mean(0.02, 0.2);
  std::uniform_real_distribution<double> uni_lo(0.02, 0.18);
  for (std::size_t i = 0; i < j; ++i) {
    spec.radius_params.push_back(spec.radius_family == Family::Gaussian ? gauss_mean(rng) : uni_lo(rng));
  }
  spec.validate();
  return spec;
}

json to_json(const WorkloadSpec& spec) {
  json centers = json::array();
  for (const Point& p : spec.center_params) centers.push_back(p.values());
  return {{"preset", spec.preset},
          {"center_family", family_name(spec.center_family)},
          {"radius_family", family_name(spec.radius_family)},
          {"domain_uniform", spec.domain_uniform},
          {"dim", spec.dim},
          {"C", spec.c},
          {"J", spec.j},
          {"m", spec.m},
          {"seed", spec.seed},
          {"center_variance", spec.center_variance},
          {"center_width", spec.center_width},
          {"radius_variance", spec.radius_variance},
          {"radius_width", spec.radius_width},
          {"theta_min", spec.theta_min},
          {"theta_max", spec.theta_max},
          {"center_params", centers},
          {"radius_params", spec.radius_params}};
}

WorkloadSpec workload_spec_from_json(const json& j) {
  try {
    WorkloadSpec spec;
    spec.preset = j.at("preset").get<std::string>();
    spec.center_family = parse_family(j.at("center_family").get<std::string>());
    spec.radius_family = parse_family(j.at("radius_family").get<std::string>());
    spec.domain_uniform = j.at("domain_uniform").get<bool>();
    spec.dim = j.at("dim").get<std::size_t>();
    spec.c = j.at("C").get<std::size_t>();
    spec.j = j.at("J").get<std::size_t>();
    spec.m = j.at("m").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.center_variance = j.at("center_variance").get<double>();
    spec.center_width = j.at("center_width").get<double>();
    spec.radius_variance = j.at("radius_variance").get<double>();
    spec.radius_width = j.at("radius_width").get<double>();
    spec.theta_min = j.at("theta_min").get<double>();
    spec.theta_max = j.at("theta_max").get<double>();
    for (const auto& c : j.at("center_params")) spec.center_params.emplace_back(c.get<std::vector<double>>());
    spec.radius_params = j.at("radius_params").get<std::vector<double>>();
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed workload spec: ") + e.what());
  }
}

Workload generate(const WorkloadSpec& spec, const Dataset& dataset, AggregateKind kind, std::size_t max_retries) {
  spec.validate();
  if (dataset.dim() != spec.dim) {
    throw UsageError("workload dimension " + std::to_string(spec.dim) + " does not match dataset dimension " +
                     std::to_string(dataset.dim()));
  }
  Workload wl;
  wl.spec = spec;
  wl.kind = kind;
  wl.queries.reserve(spec.m);

  std::mt19937_64 rng(spec.seed ^ kQueryStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_c(0, spec.c - 1);
  std::uniform_int_distribution<std::size_t> pick_j(0, spec.j - 1);
  const double center_sd = std::sqrt(spec.center_variance);
  const double radius_sd = std::sqrt(spec.radius_variance);

  auto sample = [&](std::size_t& ci, std::size_t& ji) {
    std::vector<double> x(spec.dim);
    double theta = 0.0;
    if (spec.domain_uniform) {
      ci = 0;
      ji = 0;
      for (double& v : x) v = unit(rng);
      theta = unit(rng);
    } else {
      ci = pick_c(rng);
      ji = pick_j(rng);
      const Point& cp = spec.center_params[ci];
      for (std::size_t d = 0; d < spec.dim; ++d) {
        x[d] = spec.center_family == Family::Gaussian ? cp[d] + center_sd * normal(rng)
                                                      : cp[d] + spec.center_width * unit(rng);
      }
      const double rp = spec.radius_params[ji];
      theta = spec.radius_family == Family::Gaussian ? rp + radius_sd * normal(rng) : rp + spec.radius_width * unit(rng);
    }
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
    theta = std::clamp(theta, spec.theta_min, spec.theta_max);
    return Query{Point(std::move(x)), theta, std::nullopt};
  };

  if (spec.dim <= 3 && !dataset.has_index()) {
    Dataset indexed = dataset;
    indexed.build_index();
    return generate(spec, indexed, kind, max_retries);
  }

  for (std::size_t i = 0; i < spec.m; ++i) {
    bool labeled = false;
    for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
      std::size_t ci = 0, ji = 0;
      Query q = sample(ci, ji);
      const Answer a = execute_aq(dataset, q, kind);
      if (a.empty_subspace) continue;
      q.answer = a.value;
      wl.queries.push_back(std::move(q));
      wl.components.emplace_back(ci, ji);
      labeled = true;
      break;
    }
    if (!labeled) ++wl.dropped;
  }
  return wl;
}

std::pair<std::vector<Query>, std::vector<Query>> split(std::span<const Query> workload, double eval_fraction,
                                                        std::uint64_t seed) {
  if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw UsageError("eval fraction must lie in (0, 1)");
  std::vector<std::size_t> order(workload.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_eval = static_cast<std::size_t>(std::ceil(static_cast<double>(workload.size()) * eval_fraction - 1e-9));
  const std::size_t n_train = workload.size() - n_eval;
  std::pair<std::vector<Query>, std::vector<Query>> out;
  out.first.reserve(n_train);
  out.second.reserve(n_eval);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(workload[order[i]]);
  }
  return out;
}

void save_workload(const Workload& wl, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const json meta = {{"spec", to_json(wl.spec)}, {"kind", std::string(to_string(wl.kind))}, {"dropped", wl.dropped}};
  out << "# " << meta.dump() << '\n';
  for (std::size_t d = 0; d < wl.spec.dim; ++d) out << 'x' << d + 1 << ',';
  out << "theta,y\n";
  out << std::setprecision(17);
  for (const Query& q : wl.queries) {
    for (std::size_t d = 0; d < q.center.dim(); ++d) out << q.center[d] << ',';
    out << q.theta << ',';
    if (q.answer) out << *q.answer;
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Workload load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open workload " + path.string());
  Workload wl;
  std::string line;
  std::size_t lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("#", 0) != 0) break;
    try {
      const json meta = json::parse(line.substr(1));
      wl.spec = workload_spec_from_json(meta.at("spec"));
      wl.kind = parse_aggregate_kind(meta.at("kind").get<std::string>());
      wl.dropped = meta.value("dropped", std::size_t{0});
      have_meta = true;
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": malformed workload header: " + e.what());
    }
  }
  if (line.empty()) throw DataError("workload " + path.string() + " has no header row");
  const auto header = split_fields(line);
  if (header.size() < 3 || header[header.size() - 2] != "theta" ||
      (header.back() != "y" && header.back() != "y\r")) {
    throw DataError("workload header must be x1..xd,theta,y");
  }
  const std::size_t dim = header.size() - 2;
  if (!have_meta) wl.spec.dim = dim;
  if (wl.spec.dim != dim) throw DataError("workload header dimension disagrees with its spec");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != dim + 2) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 2) + " fields");
    }
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = parse_number(fields[d], lineno);
    Query q{Point(std::move(x)), parse_number(fields[dim], lineno), std::nullopt};
    std::string_view yf = fields[dim + 1];
    if (!yf.empty() && yf != "\r") q.answer = parse_number(yf, lineno);
    wl.queries.push_back(std::move(q));
  }
  return wl;
}

Dataset make_blobs(const BlobConfig& config, std::string name) {
  if (config.n == 0 || config.dim == 0 || config.blobs == 0) throw UsageError("blob dataset needs n, dim, blobs >= 1");
  if (config.background < 0.0 || config.background > 1.0) throw UsageError("background share must lie in [0, 1]");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> inner(0.15, 0.85);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> centers(config.blobs, std::vector<double>(config.dim));
  for (auto& c : centers) {
    for (double& v : c) v = inner(rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, config.blobs - 1);
  std::vector<double> coords(config.n * config.dim);
  std::vector<double> measure(config.n);
  const double two_var = 2.0 * config.sigma * config.sigma;
  for (std::size_t i = 0; i < config.n; ++i) {
    double* row = coords.data() + i * config.dim;
    if (unit(rng) < config.background) {
      for (std::size_t d = 0; d < config.dim; ++d) row[d] = unit(rng);
    } else {
      const auto& c = centers[pick(rng)];
      for (std::size_t d = 0; d < config.dim; ++d) row[d] = std::clamp(c[d] + config.sigma * normal(rng), 0.0, 1.0);
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) nearest = std::min(nearest, squared_l2(std::span<const double>(row, config.dim), c));
    measure[i] = config.measure_base + config.core_amplitude * std::exp(-nearest / two_var) +
                 config.measure_noise * normal(rng);
  }
  return Dataset(std::move(name), config.dim, std::move(coords), std::move(measure));
}

}  // namespace xaxa
