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

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "test_util.hpp"
#include "xaxa/cli.hpp"
#include "xaxa/model.hpp"
#include "xaxa/workload.hpp"

namespace xaxa {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, ExitCodesPerFailureClass) {
  test::TempDir dir;
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"explain", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitUsage);
  const Result missing = run({"genwl", "--dataset", (dir.path() / "none.csv").string(), "--out", "x.csv"});
  EXPECT_EQ(missing.code, cli::kExitData);
  EXPECT_NE(missing.err.find("none.csv"), std::string::npos);
  dir.write("m.json", "{\"schema_version\": 42}");
  const Result bad = run({"explain", "--model", (dir.path() / "m.json").string(), "--x", "0.1", "--y", "0.1", "--theta", "0.1"});
  EXPECT_EQ(bad.code, cli::kExitModel);
  EXPECT_EQ(std::count(bad.err.begin(), bad.err.end(), '\n'), 1);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, ExplainPrintsJson) {
  test::TempDir dir;
  const test::ExactFixture f = test::exact_fixture();
  save(f.model, dir.path() / "m.json");
  const Result r = run({"explain", "--model", (dir.path() / "m.json").string(), "--x", "0.41", "--y", "0.62", "--theta",
                        "0.15", "--curve", (dir.path() / "c.csv").string(), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("lr_index"), 0);
  EXPECT_EQ(j.at("curve").size(), 20u);
  EXPECT_EQ(j.at("theta"), 0.15);
  EXPECT_EQ(r.err.rfind("command=explain status=ok", 0), 0u);
  EXPECT_EQ(test::TempDir::read(dir.path() / "c.csv").rfind("theta,y_hat,segment,slope\n", 0), 0u);
  EXPECT_EQ(run({"explain", "--model", (dir.path() / "m.json").string(), "--x", "0.41", "--theta", "0.15"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"explain", "--model", (dir.path() / "m.json").string(), "--x", "0.41", "--y", "0.6", "--theta", "-1"}).code,
            cli::kExitUsage);
}

TEST(Cli, EvaluateExactFixture) {
  test::TempDir dir;
  const test::ExactFixture f = test::exact_fixture();
  save(f.model, dir.path() / "m.json");
  save_csv(f.dataset, dir.path() / "d.csv");
  Workload wl;
  wl.spec = make_workload_spec("gauss-gauss", 2, 1, 0);
  wl.queries = {f.query};
  save_workload(wl, dir.path() / "e.csv");
  const Result r = run({"evaluate", "--model", (dir.path() / "m.json").string(), "--eval",
                        (dir.path() / "e.csv").string(), "--dataset", (dir.path() / "d.csv").string(), "--report-json",
                        (dir.path() / "r.json").string(), "--report-csv", (dir.path() / "r.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("command=evaluate status=ok", 0), 0u);
  EXPECT_NE(r.out.find(" mean_r2=1 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(" mean_nrmse="), std::string::npos);
  const auto j = nlohmann::json::parse(test::TempDir::read(dir.path() / "r.json"));
  EXPECT_NEAR(j.at("metrics").at("r2").at("mean").get<double>(), 1.0, 1e-9);
}

TEST(Cli, PipelineIsDeterministic) {
  test::TempDir dir;
  auto p = [&](const char* name) { return (dir.path() / name).string(); };
  for (const char* suffix : {"1", "2"}) {
    const std::string s(suffix);
    ASSERT_EQ(run({"gendata", "--out", p("raw.csv"), "--n", "3000", "--seed", "5"}).code, 0);
    const Result ing = run({"ingest", "--input", p("raw.csv"), "--columns", "x1,x2", "--measure", "measure", "--out",
                            p(("d" + s + ".csv").c_str()), "--scaling", p(("s" + s + ".json").c_str())});
    ASSERT_EQ(ing.code, 0) << ing.err;
    const Result g = run({"genwl", "--dataset", p(("d" + s + ".csv").c_str()), "--m", "400", "--seed", "9",
                          "--eval-fraction", "0.2", "--eval-out", p(("e" + s + ".csv").c_str()), "--out",
                          p(("w" + s + ".csv").c_str())});
    ASSERT_EQ(g.code, 0) << g.err;
    EXPECT_NE(g.out.find("queries=320"), std::string::npos) << g.out;
    const Result pre = run({"preprocess", "--workload", p(("w" + s + ".csv").c_str()), "--scaling",
                            p(("s" + s + ".json").c_str()), "--epsilon", "0.5", "--out", p(("m" + s + ".json").c_str())});
    ASSERT_EQ(pre.code, 0) << pre.err;
    const Result tr = run({"train", "--model", p(("m" + s + ".json").c_str()), "--stream", p(("e" + s + ".csv").c_str()),
                           "--retrain-every", "50", "--out", p(("t" + s + ".json").c_str())});
    ASSERT_EQ(tr.code, 0) << tr.err;
    EXPECT_NE(tr.out.find("pairs=80 retrains=1"), std::string::npos) << tr.out;
    const Result ev = run({"evaluate", "--model", p(("t" + s + ".json").c_str()), "--eval", p(("e" + s + ".csv").c_str()),
                           "--dataset", p(("d" + s + ".csv").c_str()), "--report-csv", p(("r" + s + ".csv").c_str())});
    ASSERT_EQ(ev.code, 0) << ev.err;
  }
  for (const char* stem : {"d", "s", "w", "e", "m", "t", "r"}) {
    const std::string ext = std::string(stem) == "s" || std::string(stem) == "m" || std::string(stem) == "t" ? ".json" : ".csv";
    EXPECT_EQ(test::TempDir::read(p((std::string(stem) + "1" + ext).c_str())),
              test::TempDir::read(p((std::string(stem) + "2" + ext).c_str())))
        << stem;
  }
}

}  // namespace
}  // namespace xaxa
