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


#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "xaxa/cli.hpp"
#include "xaxa/dataset.hpp"
#include "xaxa/errors.hpp"
#include "xaxa/explainer.hpp"
#include "xaxa/metrics.hpp"
#include "xaxa/model.hpp"
#include "xaxa/plr.hpp"
#include "xaxa/service.hpp"
#include "xaxa/trainer.hpp"
#include "xaxa/workload.hpp"

namespace py = pybind11;
using namespace xaxa;

namespace {

Query make_query(std::vector<double> center, double theta, std::optional<double> answer) {
  return Query{Point(std::move(center)), theta, answer};
}

std::vector<PlrSample> to_samples(const std::vector<double>& theta, const std::vector<double>& y) {
  if (theta.size() != y.size()) throw UsageError("theta and y differ in length");
  std::vector<PlrSample> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = {theta[i], y[i]};
  return out;
}

py::tuple response(const ServiceResponse& r) { return py::make_tuple(r.status, r.body, r.version); }

}  // namespace

PYBIND11_MODULE(_xaxa, m) {
  m.doc() = "Query-driven explanations of aggregate answers.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());

  py::enum_<AggregateKind>(m, "AggregateKind")
      .value("COUNT", AggregateKind::Count)
      .value("AVG", AggregateKind::Avg)
      .value("SUM", AggregateKind::Sum);
  m.def("parse_aggregate_kind", [](const std::string& s) { return parse_aggregate_kind(s); });

  py::class_<Query>(m, "Query")
      .def(py::init(&make_query), py::arg("center"), py::arg("theta"), py::arg("answer") = py::none())
      .def_property_readonly("center", [](const Query& q) { return q.center.values(); })
      .def_readwrite("theta", &Query::theta)
      .def_readwrite("answer", &Query::answer)
      .def("__repr__", [](const Query& q) {
        std::ostringstream s;
        s << "Query(dim=" << q.center.dim() << ", theta=" << q.theta << ")";
        return s.str();
      });

  m.def("p_norm_distance",
        [](const std::vector<double>& a, const std::vector<double>& b, double p) { return p_norm_distance(a, b, p); },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
  m.def("query_similarity", &query_similarity);

  py::class_<Answer>(m, "Answer")
      .def_readonly("value", &Answer::value)
      .def_readonly("count", &Answer::count)
      .def_readonly("empty_subspace", &Answer::empty_subspace);

  py::class_<ScalingParams>(m, "ScalingParams")
      .def("to_json", [](const ScalingParams& s) { return to_json(s).dump(); })
      .def("normalize", [](const ScalingParams& s, const std::vector<double>& x) {
        return s.normalize(Point(x)).values();
      })
      .def("normalize_radius", &ScalingParams::normalize_radius);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::string, std::size_t, std::vector<double>, std::optional<std::vector<double>>, double>(),
           py::arg("name"), py::arg("dim"), py::arg("coords"), py::arg("measure") = py::none(),
           py::arg("norm_order") = 2.0)
      .def_property_readonly("name", &Dataset::name)
      .def_property_readonly("dim", &Dataset::dim)
      .def_property_readonly("has_measure", &Dataset::has_measure)
      .def("__len__", &Dataset::size)
      .def("point", [](const Dataset& d, std::size_t i) {
        if (i >= d.size()) throw py::index_error();
        return d.point(i).values();
      })
      .def("build_index", &Dataset::build_index, py::arg("cells_per_dim") = 0);

  m.def("load_csv",
        [](const std::string& path, const std::vector<std::string>& cols, std::optional<std::string> measure) {
          return load_csv(path, cols, measure);
        },
        py::arg("path"), py::arg("columns"), py::arg("measure") = py::none());
  m.def("save_csv", [](const Dataset& d, const std::string& path) { save_csv(d, path); });
  m.def("normalize", [](const Dataset& d) { return normalize(d); });
  m.def("execute_aq", [](const Dataset& d, const Query& q, AggregateKind k) { return execute_aq(d, q, k); });
  m.def("actual_explanation",
        [](const Dataset& d, const Query& q, AggregateKind k, std::size_t n, double theta_min) {
          std::vector<std::tuple<double, double, bool>> out;
          for (const auto& s : actual_explanation(d, q, k, n, theta_min)) out.emplace_back(s.theta, s.y, s.defined);
          return out;
        },
        py::arg("dataset"), py::arg("query"), py::arg("kind"), py::arg("n") = 20, py::arg("theta_min") = 0.02);
  m.def("dataset_access_count", &dataset_access_count);

  py::class_<PlrModel>(m, "PlrModel")
      .def_readonly("beta0", &PlrModel::beta0)
      .def_property_readonly("terms", [](const PlrModel& p) {
        std::vector<std::pair<double, double>> out;
        for (const auto& t : p.terms) out.emplace_back(t.beta, t.knot);
        return out;
      })
      .def("predict", &PlrModel::predict)
      .def("slope", &PlrModel::slope)
      .def("__len__", &PlrModel::size);
  m.def("fit_plr",
        [](const std::vector<double>& theta, const std::vector<double>& y, double gain, std::size_t max_terms) {
          const auto samples = to_samples(theta, y);
          return fit(samples, PlrFitConfig{gain, max_terms}).model;
        },
        py::arg("theta"), py::arg("y"), py::arg("r2_gain_threshold") = 1e-3, py::arg("max_terms") = 10);

  py::class_<XaxaModel>(m, "Model")
      .def_property_readonly("k", &XaxaModel::k)
      .def_property_readonly("dim", &XaxaModel::dim)
      .def_readonly("version", &XaxaModel::version)
      .def("l", &XaxaModel::l)
      .def("location_representatives", [](const XaxaModel& md) {
        std::vector<std::vector<double>> out;
        for (const auto& p : md.location_representatives()) out.push_back(p.values());
        return out;
      })
      .def("radius_representatives", &XaxaModel::radius_representatives)
      .def("predict", [](const XaxaModel& md, const Query& q) { return predict_answer(md, q); })
      .def("explain",
           [](const XaxaModel& md, const Query& q, const std::vector<double>& grid) {
             const auto expl = build_explanation(md, q);
             const auto curve = sample_curve(expl, grid);
             return explanation_json(expl, curve).dump();
           })
      .def("normalize_query", [](const XaxaModel& md, const Query& q) { return normalize_query(md, q); })
      .def("observe",
           [](XaxaModel& md, const Query& q, double y) {
             const auto a = process_pair(md, q, y);
             return py::make_tuple(a.k, a.l_after);
           })
      .def("maybe_retrain", [](XaxaModel& md) { return maybe_retrain(md).triggered; })
      .def("to_json", [](const XaxaModel& md) { return to_json(md).dump(); })
      .def("save", [](const XaxaModel& md, const std::string& path) { save(md, path); });
  m.def("load_model", [](const std::string& path) { return load(path); });
  m.def("model_from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); });
  m.def("default_hyperparams", [] { return to_json(Hyperparams{}).dump(); });
  m.def("preprocess",
        [](const std::vector<Query>& history, const std::string& hyper_json) {
          const Hyperparams h = hyper_json.empty() ? Hyperparams{} : hyper_from_json(nlohmann::json::parse(hyper_json));
          return preprocess(history, h);
        },
        py::arg("history"), py::arg("hyper_json") = "");

  m.def("evaluate",
        [](const XaxaModel& md, const std::vector<Query>& qs, const Dataset& d, AggregateKind k, std::size_t n,
           double theta_min) {
          EvaluationOptions opt;
          opt.n = n;
          opt.theta_min = theta_min;
          return report_summary_json(evaluate(md, qs, d, k, opt)).dump();
        },
        py::arg("model"), py::arg("queries"), py::arg("dataset"), py::arg("kind"), py::arg("n") = 20,
        py::arg("theta_min") = 0.02);

  m.def("make_blobs",
        [](std::size_t n, std::size_t dim, std::size_t blobs, double sigma, std::uint64_t seed) {
          BlobConfig c;
          c.n = n;
          c.dim = dim;
          c.blobs = blobs;
          c.sigma = sigma;
          c.seed = seed;
          return make_blobs(c);
        },
        py::arg("n") = 100000, py::arg("dim") = 2, py::arg("blobs") = 5, py::arg("sigma") = 0.1,
        py::arg("seed") = 0);
  m.def("generate_workload",
        [](const std::string& preset, const Dataset& d, AggregateKind k, std::size_t m_, std::uint64_t seed) {
          return generate(make_workload_spec(preset, d.dim(), m_, seed), d, k).queries;
        },
        py::arg("preset"), py::arg("dataset"), py::arg("kind"), py::arg("m"), py::arg("seed") = 0);
  m.def("split",
        [](const std::vector<Query>& qs, double frac, std::uint64_t seed) { return split(qs, frac, seed); },
        py::arg("queries"), py::arg("eval_fraction") = 0.2, py::arg("seed") = 0);

  py::class_<Service>(m, "Service")
      .def(py::init([](const XaxaModel& md, std::optional<Dataset> d) {
             return std::make_unique<Service>(md, std::move(d));
           }),
           py::arg("model"), py::arg("dataset") = py::none())
      .def("get_model", [](const Service& s) { return response(s.get_model()); })
      .def("explain", [](const Service& s, const std::string& b) { return response(s.explain(b)); })
      .def("predict", [](const Service& s, const std::string& b) { return response(s.predict(b)); })
      .def("observe", [](Service& s, const std::string& b) { return response(s.observe(b)); })
      .def("actual", [](const Service& s, const std::string& b) { return response(s.actual(b)); })
      .def("metrics_latest", [](const Service& s) { return response(s.metrics_latest()); })
      .def("drain", &Service::drain, py::call_guard<py::gil_scoped_release>());

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
