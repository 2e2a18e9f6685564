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

#include "xaxa/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "xaxa/errors.hpp"

namespace xaxa {

using nlohmann::json;

void Hyperparams::validate() const {
  if (!(z >= 0.0 && z <= 1.0)) throw UsageError("z must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (!(alpha_decay_horizon > 0.0)) throw UsageError("alpha decay horizon must be > 0");
  if (retrain_every == 0) throw UsageError("retrain_every must be >= 1");
  if (!(theta_min > 0.0)) throw UsageError("theta_min must be > 0");
  if (n_subradii < 2) throw UsageError("n_subradii must be >= 2");
  for (const SelectKConfig* c : {&l1, &l2}) {
    if (c->k0 == 0) throw UsageError("k0 must be >= 1");
    if (!(c->epsilon > 0.0)) throw UsageError("epsilon must be > 0");
    if (c->k_max == 0) throw UsageError("k_max must be >= 1");
  }
  if (!(plr.r2_gain_threshold >= 0.0)) throw UsageError("r2 gain threshold must be >= 0");
}

std::vector<Point> XaxaModel::location_representatives() const {
  std::vector<Point> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.lr);
  return out;
}

std::vector<double> XaxaModel::radius_representatives(std::size_t k) const {
  std::vector<double> out;
  for (const auto& cell : clusters.at(k).cells) out.push_back(cell.rr);
  return out;
}

double XaxaModel::normalize_answer(double y) const noexcept {
  const double span = answer.span();
  return span > 0 ? (y - answer.min) / span : y - answer.min;
}

double XaxaModel::denormalize_answer(double unit) const noexcept {
  const double span = answer.span();
  return answer.min + (span > 0 ? unit * span : unit);
}

void XaxaModel::validate() const {
  hyper.validate();
  if (clusters.empty()) throw ModelError("model has no location representatives");
  const std::size_t d = clusters.front().lr.dim();
  if (d == 0) throw ModelError("location representative has dimension 0");
  if (!scaling.coords.empty() && scaling.coords.size() != d) {
    throw ModelError("scaling dimension does not match the location representatives");
  }
  if (!(answer.max >= answer.min)) throw ModelError("answer range is inverted");
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto& c = clusters[k];
    if (c.lr.dim() != d) throw ModelError("location representatives have mixed dimensions");
    for (double v : c.lr.values()) {
      if (!std::isfinite(v)) throw ModelError("non-finite location representative");
    }
    if (c.cells.empty()) throw ModelError("location " + std::to_string(k) + " has no radius representatives");
    for (std::size_t l = 0; l < c.cells.size(); ++l) {
      const Cell& cell = c.cells[l];
      if (!std::isfinite(cell.rr)) throw ModelError("non-finite radius representative");
      if (l > 0 && !(c.cells[l - 1].rr < cell.rr)) {
        throw ModelError("radius representatives of location " + std::to_string(k) + " are not strictly ascending");
      }
      if (!std::isfinite(cell.plr.beta0)) throw ModelError("non-finite intercept");
      for (std::size_t i = 0; i < cell.plr.terms.size(); ++i) {
        const auto& t = cell.plr.terms[i];
        if (!std::isfinite(t.beta) || !std::isfinite(t.knot)) throw ModelError("non-finite hinge term");
        if (i > 0 && !(cell.plr.terms[i - 1].knot < t.knot)) throw ModelError("hinge knots are not strictly ascending");
      }
    }
  }
}

namespace {

json range_json(const Range& r) { return json::array({r.min, r.max}); }
Range range_from(const json& j) { return Range{j.at(0).get<double>(), j.at(1).get<double>()}; }

json select_json(const SelectKConfig& c) {
  // "inf" encodes an infinite threshold.
  const json eps = std::isinf(c.epsilon) ? json("inf") : json(c.epsilon);
  return {{"k0", c.k0}, {"epsilon", eps}, {"k_max", c.k_max},
          {"seed", c.seed}, {"max_iter", c.max_iter}, {"tol", c.tol}};
}

SelectKConfig select_from(const json& j) {
  SelectKConfig c;
  c.k0 = j.at("k0").get<std::size_t>();
  const json& eps = j.at("epsilon");
  c.epsilon = eps.is_string() && eps.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                  : eps.get<double>();
  c.k_max = j.at("k_max").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_iter = j.at("max_iter").get<std::size_t>();
  c.tol = j.at("tol").get<double>();
  return c;
}

json samples_json(const std::vector<PlrSample>& s) {
  json a = json::array();
  for (const auto& p : s) a.push_back({p.theta, p.y});
  return a;
}

std::vector<PlrSample> samples_from(const json& j) {
  std::vector<PlrSample> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

json plr_json(const PlrModel& m) {
  json terms = json::array();
  for (const auto& t : m.terms) terms.push_back({t.beta, t.knot});
  return {{"beta0", m.beta0}, {"terms", terms}};
}

PlrModel plr_from(const json& j) {
  PlrModel m;
  m.beta0 = j.at("beta0").get<double>();
  for (const auto& t : j.at("terms")) m.terms.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
  return m;
}

}  // namespace

json to_json(const ScalingParams& scaling) {
  json coords = json::array();
  for (const auto& r : scaling.coords) coords.push_back(range_json(r));
  return {{"coords", coords}, {"measure", scaling.measure ? range_json(*scaling.measure) : json(nullptr)}};
}

ScalingParams scaling_from_json(const json& doc) {
  ScalingParams s;
  for (const auto& r : doc.at("coords")) s.coords.push_back(range_from(r));
  if (doc.contains("measure") && !doc.at("measure").is_null()) s.measure = range_from(doc.at("measure"));
  return s;
}

json to_json(const Hyperparams& h) {
  return {{"z", h.z},
          {"alpha", h.alpha},
          {"alpha_decay", h.alpha_decay},
          {"alpha_decay_horizon", h.alpha_decay_horizon},
          {"retrain_every", h.retrain_every},
          {"l1", select_json(h.l1)},
          {"l2", select_json(h.l2)},
          {"plr", {{"r2_gain_threshold", h.plr.r2_gain_threshold},
                   {"max_terms", h.plr.max_terms},
                   {"min_samples", h.plr.min_samples}}},
          {"theta_min", h.theta_min},
          {"n_subradii", h.n_subradii},
          {"aggregate", std::string(to_string(h.kind))}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.z = j.at("z").get<double>();
  h.alpha = j.at("alpha").get<double>();
  h.alpha_decay = j.at("alpha_decay").get<bool>();
  h.alpha_decay_horizon = j.at("alpha_decay_horizon").get<double>();
  h.retrain_every = j.at("retrain_every").get<std::size_t>();
  h.l1 = select_from(j.at("l1"));
  h.l2 = select_from(j.at("l2"));
  const auto& p = j.at("plr");
  h.plr.r2_gain_threshold = p.at("r2_gain_threshold").get<double>();
  h.plr.max_terms = p.at("max_terms").get<std::size_t>();
  h.plr.min_samples = p.at("min_samples").get<std::size_t>();
  h.theta_min = j.at("theta_min").get<double>();
  h.n_subradii = j.at("n_subradii").get<std::size_t>();
  h.kind = parse_aggregate_kind(j.at("aggregate").get<std::string>());
  return h;
}

json to_json(const XaxaModel& model) {
  json w = json::array(), u = json::array(), m = json::array(), cells = json::array(), lr_counts = json::array();
  for (const auto& c : model.clusters) {
    w.push_back(c.lr.values());
    lr_counts.push_back(c.count);
    json ur = json::array(), mr = json::array(), cr = json::array();
    for (const auto& cell : c.cells) {
      ur.push_back(cell.rr);
      mr.push_back(plr_json(cell.plr));
      cr.push_back({{"count", cell.count}, {"samples", samples_json(cell.samples)}, {"buffer", samples_json(cell.buffer)}});
    }
    u.push_back(std::move(ur));
    m.push_back(std::move(mr));
    cells.push_back(std::move(cr));
  }
  json scaling = to_json(model.scaling);
  scaling["answer"] = range_json(model.answer);
  return {{"schema_version", kModelSchemaVersion},
          {"version", model.version},
          {"hyper", to_json(model.hyper)},
          {"scaling", scaling},
          {"W", w},
          {"U", u},
          {"M", m},
          {"counters", {{"pending", model.pending}, {"lr_counts", lr_counts}, {"cells", cells}}}};
}

XaxaModel model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw ModelError("not a model document: missing schema_version (expected schema " +
                     std::to_string(kModelSchemaVersion) + ")");
  }
  const int schema = doc.at("schema_version").get<int>();
  if (schema != kModelSchemaVersion) {
    throw ModelError("model schema_version " + std::to_string(schema) + " is not supported (expected schema " +
                     std::to_string(kModelSchemaVersion) + ")");
  }
  XaxaModel model;
  try {
    model.version = doc.at("version").get<std::uint64_t>();
    model.hyper = hyper_from_json(doc.at("hyper"));
    model.scaling = scaling_from_json(doc.at("scaling"));
    model.answer = range_from(doc.at("scaling").at("answer"));
    const auto& w = doc.at("W");
    const auto& u = doc.at("U");
    const auto& m = doc.at("M");
    const auto& counters = doc.at("counters");
    const auto& cells = counters.at("cells");
    if (u.size() != w.size() || m.size() != w.size() || cells.size() != w.size()) {
      throw ModelError("W, U, M and counters disagree on the number of locations");
    }
    model.pending = counters.at("pending").get<std::uint64_t>();
    const auto& lr_counts = counters.at("lr_counts");
    for (std::size_t k = 0; k < w.size(); ++k) {
      LocationCluster c;
      c.lr = Point(w[k].get<std::vector<double>>());
      c.count = lr_counts.at(k).get<std::uint64_t>();
      if (m[k].size() != u[k].size() || cells[k].size() != u[k].size()) {
        throw ModelError("location " + std::to_string(k) + ": U, M and counters disagree on the radius count");
      }
      for (std::size_t l = 0; l < u[k].size(); ++l) {
        Cell cell;
        cell.rr = u[k][l].get<double>();
        cell.plr = plr_from(m[k][l]);
        cell.count = cells[k][l].at("count").get<std::uint64_t>();
        cell.samples = samples_from(cells[k][l].at("samples"));
        cell.buffer = samples_from(cells[k][l].at("buffer"));
        c.cells.push_back(std::move(cell));
      }
      model.clusters.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  } catch (const UsageError& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  try {
    model.validate();
  } catch (const UsageError& e) {
    throw ModelError(std::string("invalid hyperparameters in model: ") + e.what());
  }
  return model;
}

void save(const XaxaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out << to_json(model).dump(1) << '\n';
  if (!out) throw ModelError("failed writing model file " + path.string());
}

XaxaModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ModelError("corrupt model file " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

ModelSnapshot snapshot(const XaxaModel& model) { return std::make_shared<const XaxaModel>(model); }

ModelStore::ModelStore(XaxaModel model) : live_(std::move(model)), published_(xaxa::snapshot(live_)) {}

ModelSnapshot ModelStore::snapshot() const {
  std::lock_guard lock(published_mutex_);
  return published_;
}

std::uint64_t ModelStore::live_version() const {
  std::lock_guard lock(writer_);
  return live_.version;
}

void ModelStore::publish() {
  ModelSnapshot next;
  {
    std::lock_guard lock(writer_);
    next = xaxa::snapshot(live_);
  }
  std::lock_guard lock(published_mutex_);
  published_ = std::move(next);
}

}  // namespace xaxa
