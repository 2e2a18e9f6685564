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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "xaxa/dataset.hpp"
#include "xaxa/model.hpp"

namespace xaxa {

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::uint64_t version = 0;
};

/// JSON endpoints over model snapshots. Readers never touch the dataset;
/// only /actual does, and only when one is mounted. Observed pairs go through
/// a single trainer thread that publishes a new snapshot after each batch.
///
/// Handlers are plain member functions so they can be driven without sockets.
class Service {
 public:
  explicit Service(XaxaModel model, std::optional<Dataset> dataset = std::nullopt);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ServiceResponse get_model() const;
  /// {x, theta[, raw, n]} -> explanation with curve.
  ServiceResponse explain(std::string_view body) const;
  /// {x, theta[, raw]} -> {y_hat, segment, version}.
  ServiceResponse predict(std::string_view body) const;
  /// {x, theta, y[, raw]} -> 202, applied asynchronously.
  ServiceResponse observe(std::string_view body);
  /// {x, theta[, n, raw]} -> ground-truth curve; 404 without a dataset.
  ServiceResponse actual(std::string_view body) const;
  ServiceResponse metrics_latest() const;

  void set_latest_report(nlohmann::json report);
  /// Blocks until every accepted observation has been applied and published.
  void drain();

  ModelSnapshot snapshot() const { return store_.snapshot(); }
  bool has_dataset() const noexcept { return dataset_.has_value(); }

  /// Binds and returns the port (0 picks a free one). Throws Error on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires bind().
  void run();
  void stop();

 private:
  void trainer_loop();

  ModelStore store_;
  std::optional<Dataset> dataset_;

  mutable std::mutex report_mutex_;
  std::optional<nlohmann::json> latest_report_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::pair<Query, double>> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread trainer_;

  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace xaxa
