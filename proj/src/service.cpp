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

#include "xaxa/service.hpp"

#include <cmath>
#include <vector>

#include <httplib.h>

#include "xaxa/errors.hpp"
#include "xaxa/explainer.hpp"
#include "xaxa/trainer.hpp"

namespace xaxa {

using nlohmann::json;

struct Service::Http {
  httplib::Server server;
};

namespace {

struct BadRequest {
  int status;
  std::string message;
};

ServiceResponse reply(int status, const json& body, std::uint64_t version) {
  return {status, body.dump(), version};
}

ServiceResponse error_reply(int status, std::string_view message, std::uint64_t version) {
  return reply(status, {{"error", message}, {"version", version}}, version);
}

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest{400, "body must be a JSON object"};
  return j;
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw BadRequest{400, std::string("missing numeric field '") + key + "'"};
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw BadRequest{400, std::string("field '") + key + "' must be finite"};
  return v;
}

// Parses {x, theta[, raw]} into a unit-space query checked against the model.
Query query_field(const json& j, const XaxaModel& model) {
  if (!j.contains("x") || !j["x"].is_array()) throw BadRequest{400, "missing array field 'x'"};
  std::vector<double> x;
  for (const auto& v : j["x"]) {
    if (!v.is_number()) throw BadRequest{400, "'x' must contain numbers"};
    x.push_back(v.get<double>());
  }
  const double theta = number_field(j, "theta");
  if (!(theta > 0.0)) throw BadRequest{400, "theta must be > 0"};
  if (x.size() != model.dim()) {
    throw BadRequest{409, "query dimension " + std::to_string(x.size()) + " does not match model dimension " +
                              std::to_string(model.dim())};
  }
  Query q{Point(std::move(x)), theta, std::nullopt};
  if (j.value("raw", false)) q = normalize_query(model, q);
  return q;
}

std::size_t count_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 2 || j[key].get<long long>() > 10000) {
    throw BadRequest{400, std::string("'") + key + "' must be an integer in [2, 10000]"};
  }
  return j[key].get<std::size_t>();
}

std::vector<double> curve_grid(const XaxaModel& model, double theta, std::size_t n) {
  const double lo = model.hyper.theta_min < theta ? model.hyper.theta_min : theta / static_cast<double>(n);
  return evenly_spaced_radii(lo, theta, n);
}

template <typename Fn>
ServiceResponse guarded(std::uint64_t version, Fn&& fn) {
  try {
    return fn();
  } catch (const BadRequest& e) {
    return error_reply(e.status, e.message, version);
  } catch (const UsageError& e) {
    return error_reply(400, e.what(), version);
  } catch (const Error& e) {
    return error_reply(500, e.what(), version);
  }
}

}  // namespace

Service::Service(XaxaModel model, std::optional<Dataset> dataset)
    : store_(std::move(model)), dataset_(std::move(dataset)), http_(std::make_unique<Http>()) {
  if (dataset_ && dataset_->dim() <= 3 && !dataset_->has_index()) dataset_->build_index();
  trainer_ = std::thread([this] { trainer_loop(); });
}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (trainer_.joinable()) trainer_.join();
}

ServiceResponse Service::get_model() const {
  const ModelSnapshot m = store_.snapshot();
  json ls = json::array();
  for (std::size_t k = 0; k < m->k(); ++k) ls.push_back(m->l(k));
  return reply(200,
               {{"K", m->k()},
                {"L", ls},
                {"dim", m->dim()},
                {"kind", std::string(to_string(m->hyper.kind))},
                {"version", m->version},
                {"W", [&] {
                   json w = json::array();
                   for (const Point& p : m->location_representatives()) w.push_back(p.values());
                   return w;
                 }()},
                {"U", [&] {
                   json u = json::array();
                   for (std::size_t k = 0; k < m->k(); ++k) u.push_back(m->radius_representatives(k));
                   return u;
                 }()},
                {"dataset_mounted", has_dataset()}},
               m->version);
}

ServiceResponse Service::explain(std::string_view body) const {
  const ModelSnapshot m = store_.snapshot();
  return guarded(m->version, [&] {
    const json j = parse_body(body);
    const Query q = query_field(j, *m);
    const std::size_t n = count_field(j, "n", m->hyper.n_subradii);
    const ExplanationFunction e = build_explanation(*m, q);
    const auto grid = curve_grid(*m, q.theta, n);
    const auto curve = sample_curve(e, grid);
    json out = explanation_json(e, curve);
    out["theta"] = q.theta;
    out["y_hat"] = e.predict(q.theta);
    return reply(200, out, m->version);
  });
}

ServiceResponse Service::predict(std::string_view body) const {
  const ModelSnapshot m = store_.snapshot();
  return guarded(m->version, [&] {
    const json j = parse_body(body);
    const Query q = query_field(j, *m);
    const ExplanationFunction e = build_explanation(*m, q);
    return reply(200, {{"y_hat", e.predict(q.theta)}, {"segment", e.segment_for(q.theta)}, {"version", m->version}},
                 m->version);
  });
}

ServiceResponse Service::observe(std::string_view body) {
  const ModelSnapshot m = store_.snapshot();
  return guarded(m->version, [&] {
    const json j = parse_body(body);
    const Query q = query_field(j, *m);
    const double y = number_field(j, "y");
    std::size_t queued = 0;
    {
      std::lock_guard lock(queue_mutex_);
      queue_.emplace_back(q, y);
      queued = queue_.size();
    }
    queue_cv_.notify_one();
    return reply(202, {{"accepted", true}, {"queued", queued}, {"version", m->version}}, m->version);
  });
}

ServiceResponse Service::actual(std::string_view body) const {
  const ModelSnapshot m = store_.snapshot();
  if (!dataset_) return error_reply(404, "no dataset mounted", m->version);
  return guarded(m->version, [&] {
    const json j = parse_body(body);
    const Query q = query_field(j, *m);
    const std::size_t n = count_field(j, "n", m->hyper.n_subradii);
    const double lo = m->hyper.theta_min < q.theta ? m->hyper.theta_min : q.theta / static_cast<double>(n);
    const auto series = actual_explanation(*dataset_, q, m->hyper.kind, n, lo);
    json curve = json::array();
    for (const SeriesPoint& p : series) {
      curve.push_back({{"theta", p.theta}, {"y", p.defined ? json(p.y) : json(nullptr)}, {"defined", p.defined}});
    }
    return reply(200, {{"curve", curve}, {"kind", std::string(to_string(m->hyper.kind))}, {"version", m->version}},
                 m->version);
  });
}

ServiceResponse Service::metrics_latest() const {
  const std::uint64_t version = store_.snapshot()->version;
  std::lock_guard lock(report_mutex_);
  if (!latest_report_) return error_reply(404, "no evaluation report available", version);
  json out = *latest_report_;
  out["version"] = version;
  return reply(200, out, version);
}

void Service::set_latest_report(json report) {
  std::lock_guard lock(report_mutex_);
  latest_report_ = std::move(report);
}

void Service::drain() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void Service::trainer_loop() {
  std::unique_lock lock(queue_mutex_);
  while (true) {
    queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) return;
    std::deque<std::pair<Query, double>> batch;
    batch.swap(queue_);
    busy_ = true;
    lock.unlock();
    store_.write([&](XaxaModel& model) {
      for (const auto& [q, y] : batch) {
        try {
          process_pair(model, q, y);
          maybe_retrain(model);
        } catch (const Error&) {
        }
      }
      return 0;
    });
    store_.publish();
    lock.lock();
    busy_ = false;
    idle_cv_.notify_all();
  }
}

int Service::bind(const std::string& host, int port) {
  auto& srv = http_->server;
  srv.set_tcp_nodelay(true);
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_header("X-Model-Version", std::to_string(r.version));
    res.set_content(r.body, "application/json");
  };
  srv.Get("/model", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_model()); });
  srv.Post("/explain",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, explain(req.body)); });
  srv.Post("/predict",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, predict(req.body)); });
  srv.Post("/observe",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, observe(req.body)); });
  srv.Post("/actual",
           [this, send](const httplib::Request& req, httplib::Response& res) { send(res, actual(req.body)); });
  srv.Get("/metrics/latest",
          [this, send](const httplib::Request&, httplib::Response& res) { send(res, metrics_latest()); });

  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { http_->server.listen_after_bind(); }

void Service::stop() {
  if (http_) http_->server.stop();
}

}  // namespace xaxa
