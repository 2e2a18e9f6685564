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

#include "xaxa/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "xaxa/dataset.hpp"
#include "xaxa/errors.hpp"
#include "xaxa/explainer.hpp"
#include "xaxa/metrics.hpp"
#include "xaxa/model.hpp"
#include "xaxa/service.hpp"
#include "xaxa/trainer.hpp"
#include "xaxa/workload.hpp"

namespace xaxa::cli {

using nlohmann::json;

namespace {

struct Options {
  std::uint64_t seed = 0;

  // ingest
  std::string input;
  std::string columns;
  std::string measure;
  std::string scaling_out;
  char delimiter = ',';

  // gendata
  BlobConfig blobs;

  // genwl
  std::string preset = "gauss-gauss";
  std::size_t m = 5000;
  std::size_t c = 5;
  std::size_t j = 3;
  double eval_fraction = 0.0;
  std::string eval_out;

  // shared paths
  std::string dataset;
  std::string workload;
  std::string model;
  std::string out;
  std::string scaling;
  std::string kind;

  // hyperparameters
  std::optional<double> z;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> epsilon_l2;
  std::optional<std::size_t> retrain_every;
  std::optional<std::size_t> n_subradii;
  std::optional<double> theta_min;
  bool alpha_decay = false;

  // explain
  std::optional<double> x;
  std::optional<double> y;
  std::vector<double> center;
  double theta = 0.0;
  bool raw = false;
  std::string curve;

  // evaluate
  bool unrooted_nrmse = false;
  std::string report_csv;
  std::string report_json;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string report;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

class Summary {
 public:
  explicit Summary(std::string_view command) { line_ << "command=" << command << " status=ok"; }
  Summary& add(std::string_view key, const std::string& value) {
    line_ << ' ' << key << '=' << value;
    return *this;
  }
  Summary& add(std::string_view key, double value) { return add(key, fmt(value)); }
  Summary& add(std::string_view key, std::size_t value) { return add(key, std::to_string(value)); }
  std::string str() const { return line_.str(); }

 private:
  std::ostringstream line_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON in " + path);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

Hyperparams hyper_from(const Options& o, Hyperparams h) {
  if (o.z) h.z = *o.z;
  if (o.alpha) h.alpha = *o.alpha;
  if (o.epsilon) {
    h.l1.epsilon = *o.epsilon;
    h.l2.epsilon = *o.epsilon;
  }
  if (o.epsilon_l2) h.l2.epsilon = *o.epsilon_l2;
  if (o.retrain_every) h.retrain_every = *o.retrain_every;
  if (o.n_subradii) h.n_subradii = *o.n_subradii;
  if (o.theta_min) h.theta_min = *o.theta_min;
  if (o.alpha_decay) h.alpha_decay = true;
  h.l1.seed = o.seed;
  h.l2.seed = o.seed;
  h.validate();
  return h;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto cols = split_list(o.columns);
  if (cols.empty()) throw UsageError("--columns needs at least one column name");
  const std::optional<std::string> measure = o.measure.empty() ? std::nullopt : std::optional(o.measure);
  const Dataset raw = load_csv(o.input, cols, measure, CsvOptions{o.delimiter});
  const auto [unit, scaling] = normalize(raw);
  save_csv(unit, o.out);
  write_text(o.scaling_out, to_json(scaling).dump(2) + "\n");
  out << Summary("ingest").add("rows", unit.size()).add("dim", unit.dim()).add("out", o.out).str() << '\n';
  return kExitOk;
}

int cmd_gendata(const Options& o, std::ostream& out) {
  BlobConfig cfg = o.blobs;
  cfg.seed = o.seed;
  const Dataset ds = make_blobs(cfg);
  save_csv(ds, o.out);
  out << Summary("gendata").add("rows", ds.size()).add("dim", ds.dim()).add("out", o.out).str() << '\n';
  return kExitOk;
}

int cmd_genwl(const Options& o, std::ostream& out, std::ostream& err) {
  const Dataset ds = load_normalized_csv(o.dataset);
  const AggregateKind kind = parse_aggregate_kind(o.kind.empty() ? "count" : o.kind);
  const WorkloadSpec spec = make_workload_spec(o.preset, ds.dim(), o.m, o.seed, o.c, o.j);
  Workload wl = generate(spec, ds, kind);
  if (wl.dropped > 0) err << "warning: dropped " << wl.dropped << " queries with empty subspaces\n";
  Summary s("genwl");
  if (o.eval_fraction > 0.0) {
    if (o.eval_out.empty()) throw UsageError("--eval-fraction needs --eval-out");
    auto [train, eval] = split(wl.queries, o.eval_fraction, o.seed);
    Workload evalwl = wl;
    evalwl.queries = std::move(eval);
    evalwl.components.clear();
    wl.queries = std::move(train);
    wl.components.clear();
    save_workload(evalwl, o.eval_out);
    s.add("eval", evalwl.queries.size()).add("eval_out", o.eval_out);
  }
  save_workload(wl, o.out);
  out << s.add("queries", wl.queries.size()).add("dropped", wl.dropped).add("out", o.out).str() << '\n';
  return kExitOk;
}

int cmd_preprocess(const Options& o, std::ostream& out) {
  const Workload wl = load_workload(o.workload);
  Hyperparams h;
  h.kind = o.kind.empty() ? wl.kind : parse_aggregate_kind(o.kind);
  h = hyper_from(o, h);
  ScalingParams scaling;
  if (!o.scaling.empty()) scaling = scaling_from_json(read_json(o.scaling));
  const XaxaModel model = preprocess(wl.queries, h, scaling);
  save(model, o.out);
  Summary s("preprocess");
  s.add("queries", wl.queries.size()).add("K", model.k());
  std::size_t cells = 0;
  for (std::size_t k = 0; k < model.k(); ++k) cells += model.l(k);
  s.add("cells", cells).add("version", static_cast<std::size_t>(model.version)).add("out", o.out);
  out << s.str() << '\n';
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  XaxaModel model = load(o.model);
  Hyperparams h = model.hyper;
  const std::uint64_t keep_seed = h.l1.seed;
  h = hyper_from(o, h);
  h.l1.seed = keep_seed;
  h.l2.seed = keep_seed;
  model.hyper = h;
  const Workload stream = load_workload(o.workload);
  std::size_t retrains = 0, failures = 0, skipped = 0;
  for (const Query& q : stream.queries) {
    if (!q.answer) {
      ++skipped;
      continue;
    }
    process_pair(model, q, *q.answer);
    const RetrainReport r = maybe_retrain(model);
    if (r.triggered) ++retrains;
    failures += r.failures.size();
  }
  save(model, o.out);
  out << Summary("train")
             .add("pairs", stream.queries.size() - skipped)
             .add("retrains", retrains)
             .add("refit_failures", failures)
             .add("version", static_cast<std::size_t>(model.version))
             .add("out", o.out)
             .str()
      << '\n';
  return kExitOk;
}

int cmd_explain(const Options& o, std::ostream& out, std::ostream& err) {
  const XaxaModel model = load(o.model);
  std::vector<double> c = o.center;
  if (c.empty()) {
    if (o.x) c.push_back(*o.x);
    if (o.y) c.push_back(*o.y);
  } else if (o.x || o.y) {
    throw UsageError("use either --center or --x/--y");
  }
  if (c.empty()) throw UsageError("a query center is required (--x/--y or --center)");
  if (c.size() != model.dim()) {
    throw UsageError("query dimension " + std::to_string(c.size()) + " does not match model dimension " +
                     std::to_string(model.dim()));
  }
  Query q{Point(std::move(c)), o.theta, std::nullopt};
  if (!(q.theta > 0.0)) throw UsageError("--theta must be > 0");
  if (o.raw) q = normalize_query(model, q);
  const ExplanationFunction e = build_explanation(model, q);
  const std::size_t n = o.n_subradii.value_or(model.hyper.n_subradii);
  const double tmin = o.theta_min.value_or(model.hyper.theta_min);
  const double lo = tmin < q.theta ? tmin : q.theta / static_cast<double>(n);
  const auto curve = sample_curve(e, evenly_spaced_radii(lo, q.theta, n));
  json j = explanation_json(e, curve);
  j["theta"] = q.theta;
  j["y_hat"] = e.predict(q.theta);
  out << j.dump(2) << '\n';
  if (!o.curve.empty()) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "theta,y_hat,segment,slope\n";
    for (const CurvePoint& p : curve) csv << p.theta << ',' << p.y_hat << ',' << p.segment << ',' << p.slope << '\n';
    write_text(o.curve, csv.str());
  }
  err << Summary("explain")
             .add("lr_index", e.lr_index)
             .add("segment", e.segment_for(q.theta))
             .add("y_hat", e.predict(q.theta))
             .add("version", static_cast<std::size_t>(model.version))
             .str()
      << '\n';
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const XaxaModel model = load(o.model);
  const Workload wl = load_workload(o.workload);
  Dataset ds = load_normalized_csv(o.dataset);
  if (ds.dim() <= 3) ds.build_index();
  EvaluationOptions eo;
  eo.n = o.n_subradii.value_or(model.hyper.n_subradii);
  eo.theta_min = o.theta_min.value_or(model.hyper.theta_min);
  eo.unrooted_nrmse = o.unrooted_nrmse;
  const AggregateKind kind = o.kind.empty() ? model.hyper.kind : parse_aggregate_kind(o.kind);
  const EvaluationReport report = evaluate(model, wl.queries, ds, kind, eo);
  if (!o.report_csv.empty()) save_report_csv(report, o.report_csv);
  if (!o.report_json.empty()) write_text(o.report_json, report_summary_json(report).dump(2) + "\n");
  Summary s("evaluate");
  s.add("kind", std::string(to_string(kind))).add("queries", report.rows.size());
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    const MetricSummary& ms = report.summary[m];
    s.add("mean_" + std::string(kMetricNames[m]), ms.defined ? fmt(ms.mean) : std::string("undefined"));
  }
  s.add("undefined_points", report.undefined_points).add("failed", report.failed_queries);
  out << s.str() << '\n';
  return kExitOk;
}

std::atomic<Service*> g_serving{nullptr};

extern "C" void on_signal(int) {
  if (Service* s = g_serving.load()) s->stop();
}

int cmd_serve(const Options& o, std::ostream& out) {
  XaxaModel model = load(o.model);
  std::optional<Dataset> ds;
  if (!o.dataset.empty()) ds = load_normalized_csv(o.dataset);
  Service service(std::move(model), std::move(ds));
  if (!o.report.empty()) service.set_latest_report(read_json(o.report));
  const int port = service.bind(o.host, o.port);
  out << Summary("serve").add("host", o.host).add("port", static_cast<std::size_t>(port)).str() << std::endl;
  g_serving.store(&service);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.run();
  g_serving.store(nullptr);
  return kExitOk;
}

void add_hyper_flags(CLI::App* app, Options& o) {
  app->add_option("--z", o.z, "Radius/error mixing weight in [0,1]");
  app->add_option("--alpha", o.alpha, "Learning rate in (0,1)");
  app->add_option("--epsilon", o.epsilon, "SSQE improvement threshold for choosing K and L");
  app->add_option("--epsilon-l2", o.epsilon_l2, "Separate threshold for choosing L");
  app->add_option("--retrain-every", o.retrain_every, "Pairs between offline refits");
  app->add_flag("--alpha-decay", o.alpha_decay, "Decay the learning rate with the update count");
}

void add_grid_flags(CLI::App* app, Options& o) {
  app->add_option("--n-subradii", o.n_subradii, "Number of sub-radii on the curve grid");
  app->add_option("--theta-min", o.theta_min, "Smallest sub-radius");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"xaxa: query-driven explanations for aggregate queries", "xaxa"};
  app.require_subcommand(1, 1);
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Normalize a CSV dataset and write its scaling");
  ingest->add_option("--input", o.input, "Raw CSV file")->required();
  ingest->add_option("--columns", o.columns, "Comma-separated coordinate columns")->required();
  ingest->add_option("--measure", o.measure, "Measure column for SUM/AVG");
  ingest->add_option("--out", o.out, "Normalized dataset CSV")->required();
  ingest->add_option("--scaling", o.scaling_out, "Scaling JSON output")->required();
  ingest->add_option("--delimiter", o.delimiter, "Field delimiter");

  auto* gendata = app.add_subcommand("gendata", "Write a synthetic Gaussian-blob dataset");
  gendata->add_option("--out", o.out, "Dataset CSV")->required();
  gendata->add_option("--n", o.blobs.n, "Rows")->capture_default_str();
  gendata->add_option("--dim", o.blobs.dim, "Dimensions")->capture_default_str();
  gendata->add_option("--blobs", o.blobs.blobs, "Number of blobs")->capture_default_str();
  gendata->add_option("--sigma", o.blobs.sigma, "Blob standard deviation")->capture_default_str();
  gendata->add_option("--background", o.blobs.background, "Share of uniform rows")->capture_default_str();

  auto* genwl = app.add_subcommand("genwl", "Generate a labeled query workload");
  genwl->add_option("--dataset", o.dataset, "Normalized dataset CSV")->required();
  genwl->add_option("--preset", o.preset, "gauss-gauss, gauss-uni, uni-gauss, uni-uni or dc-u")->capture_default_str();
  genwl->add_option("--m", o.m, "Number of queries")->capture_default_str();
  genwl->add_option("--components-c", o.c, "Center mixture components")->capture_default_str();
  genwl->add_option("--components-j", o.j, "Radius mixture components")->capture_default_str();
  genwl->add_option("--kind", o.kind, "count, sum or avg");
  genwl->add_option("--eval-fraction", o.eval_fraction, "Share held out for evaluation");
  genwl->add_option("--eval-out", o.eval_out, "Evaluation workload CSV");
  genwl->add_option("--out", o.out, "Workload CSV (training part when splitting)")->required();

  auto* pre = app.add_subcommand("preprocess", "Build a model from a labeled workload");
  pre->add_option("--workload", o.workload, "Workload CSV")->required();
  pre->add_option("--out", o.out, "Model JSON")->required();
  pre->add_option("--scaling", o.scaling, "Scaling JSON from ingest");
  pre->add_option("--kind", o.kind, "Aggregate kind override");
  add_hyper_flags(pre, o);
  add_grid_flags(pre, o);

  auto* train = app.add_subcommand("train", "Stream labeled queries into a model");
  train->add_option("--model", o.model, "Model JSON")->required();
  train->add_option("--stream", o.workload, "Workload CSV of query/answer pairs")->required();
  train->add_option("--out", o.out, "Updated model JSON")->required();
  add_hyper_flags(train, o);

  auto* explain = app.add_subcommand("explain", "Print the explanation of a query");
  explain->add_option("--model", o.model, "Model JSON")->required();
  explain->add_option("--x", o.x, "First center coordinate");
  explain->add_option("--y", o.y, "Second center coordinate");
  explain->add_option("--center", o.center, "Center coordinates")->delimiter(',');
  explain->add_option("--theta", o.theta, "Query radius")->required();
  explain->add_flag("--raw", o.raw, "Center and radius are in raw dataset units");
  explain->add_option("--curve", o.curve, "Also write the sampled curve as CSV");
  add_grid_flags(explain, o);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare model explanations to ground truth");
  evaluate_cmd->add_option("--model", o.model, "Model JSON")->required();
  evaluate_cmd->add_option("--eval", o.workload, "Evaluation workload CSV")->required();
  evaluate_cmd->add_option("--dataset", o.dataset, "Normalized dataset CSV")->required();
  evaluate_cmd->add_option("--kind", o.kind, "Aggregate kind override");
  evaluate_cmd->add_flag("--paper-literal-nrmse", o.unrooted_nrmse, "Report NRMSE without the square root");
  evaluate_cmd->add_option("--report-csv", o.report_csv, "Per-query metrics CSV");
  evaluate_cmd->add_option("--report-json", o.report_json, "Summary JSON");
  add_grid_flags(evaluate_cmd, o);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--model", o.model, "Model JSON")->required();
  serve->add_option("--dataset", o.dataset, "Normalized dataset CSV for /actual");
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port, 0 for any free port")->capture_default_str();
  serve->add_option("--report", o.report, "Evaluation summary JSON for /metrics/latest");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--seed", o.seed, "Random seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (gendata->parsed()) return cmd_gendata(o, out);
    if (genwl->parsed()) return cmd_genwl(o, out, err);
    if (pre->parsed()) return cmd_preprocess(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (explain->parsed()) return cmd_explain(o, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out);
    if (serve->parsed()) return cmd_serve(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace xaxa::cli
