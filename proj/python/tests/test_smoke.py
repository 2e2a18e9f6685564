# Copyright 2026 The xaxa Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import random

import pytest

import xaxa


def scatter(n, seed):
    rng = random.Random(seed)
    coords, measure = [], []
    for _ in range(n):
        coords += [rng.random(), rng.random()]
        measure.append(1 + 9 * rng.random())
    return xaxa.Dataset("scatter", 2, coords, measure)


@pytest.fixture(scope="module")
def trained():
    data = scatter(3000, 5)
    queries = xaxa.generate_workload("gauss-gauss", data, xaxa.AggregateKind.COUNT, 400, seed=3)
    train, test = xaxa.split(queries, 0.2, 3)
    model = xaxa.preprocess(train, {"l1": {"k0": 2, "epsilon": 0.5}, "l2": {"k0": 2, "epsilon": 0.5}})
    return data, model, test


def test_distance_and_similarity():
    assert xaxa.p_norm_distance([0, 0], [3, 4]) == pytest.approx(5.0)
    assert xaxa.p_norm_distance([0, 0], [3, 4], math.inf) == pytest.approx(4.0)
    a = xaxa.Query([0.0, 0.0], 0.1)
    b = xaxa.Query([3.0, 4.0], 0.2)
    assert xaxa.query_similarity(a, b) == pytest.approx(25.01)


def test_execute_aq_counts_inclusive_boundary():
    corners = xaxa.Dataset("c", 2, [0, 0, 1, 0, 0, 1, 1, 1])
    q = xaxa.Query([0.5, 0.5], math.sqrt(0.5))
    assert xaxa.execute_aq(corners, q, xaxa.AggregateKind.COUNT).value == 4
    assert xaxa.parse_aggregate_kind("avg") == xaxa.AggregateKind.AVG
    with pytest.raises(xaxa.UsageError):
        xaxa.execute_aq(corners, xaxa.Query([0.5], 0.1), xaxa.AggregateKind.COUNT)


def test_fit_plr_recovers_single_hinge():
    theta = [i / 50 for i in range(51)]
    y = [2 + 3 * max(0.0, t - 0.5) for t in theta]
    plr = xaxa.fit_plr(theta, y)
    assert plr.beta0 == pytest.approx(2)
    assert len(plr) == 1
    beta, knot = plr.terms[0]
    assert (beta, knot) == (pytest.approx(3), pytest.approx(0.5))


def test_preprocess_predict_explain(trained):
    data, model, test = trained
    assert model.k >= 1
    assert all(model.l(k) >= 1 for k in range(model.k))
    q = test[0]
    doc = xaxa.explain(model, q, [q.theta / 4, q.theta / 2, q.theta])
    assert doc["curve"][-1]["y_hat"] == pytest.approx(model.predict(q))
    assert len(doc["segments"]) >= 1


def test_evaluate_reports_summary(trained):
    data, model, test = trained
    report = xaxa.evaluate(model, test, data, xaxa.AggregateKind.COUNT)
    assert report["failed_queries"] == 0
    assert report["metrics"]["r2"]["mean"] > 0.5


def test_model_roundtrip(tmp_path, trained):
    _, model, test = trained
    path = str(tmp_path / "m.json")
    model.save(path)
    back = xaxa.load_model(path)
    assert back.to_json() == model.to_json()
    assert back.predict(test[1]) == model.predict(test[1])
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(xaxa.ModelError):
        xaxa.load_model(str(tmp_path / "bad.json"))


def test_service_handlers_do_not_touch_dataset(trained):
    data, model, test = trained
    svc = xaxa.Service(model, data)
    body = json.dumps({"x": test[0].center, "theta": test[0].theta})
    before = xaxa.dataset_access_count()
    status, text, version = svc.predict(body)
    assert status == 200
    assert json.loads(text)["y_hat"] == pytest.approx(model.predict(test[0]))
    assert svc.explain(body)[0] == 200
    assert xaxa.dataset_access_count() == before
    assert svc.actual(body)[0] == 200
    assert xaxa.dataset_access_count() == before + 1
    assert svc.predict("not json")[0] == 400


def test_service_observe_publishes_new_version(trained):
    _, model, test = trained
    svc = xaxa.Service(model)
    q = test[2]
    v0 = json.loads(svc.get_model()[1])["version"]
    status, _, _ = svc.observe(json.dumps({"x": q.center, "theta": q.theta, "y": q.answer}))
    assert status == 202
    svc.drain()
    assert json.loads(svc.get_model()[1])["version"] > v0


def test_cli_usage_error():
    code, out, err = xaxa.run_cli(["no-such-command"])
    assert code == 2
    code, out, _ = xaxa.run_cli(["--help"])
    assert code == 0 and "Usage" in out
