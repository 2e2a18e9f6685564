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

"""Query-driven explanations of aggregate answers."""

import json

from ._xaxa import (
    AggregateKind,
    Answer,
    DataError,
    Dataset,
    Error,
    Model,
    ModelError,
    PlrModel,
    Query,
    ScalingParams,
    Service,
    UsageError,
    actual_explanation,
    dataset_access_count,
    execute_aq,
    fit_plr,
    generate_workload,
    load_csv,
    load_model,
    make_blobs,
    model_from_json,
    normalize,
    p_norm_distance,
    parse_aggregate_kind,
    query_similarity,
    run_cli,
    save_csv,
    split,
)
from . import _xaxa

__version__ = "0.1.0"


def default_hyperparams():
    """Default training hyperparameters as a dict."""
    return json.loads(_xaxa.default_hyperparams())


def preprocess(history, hyper=None):
    """Build a model from answered queries. `hyper` overrides default_hyperparams()."""
    merged = default_hyperparams()
    for key, value in (hyper or {}).items():
        if isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return _xaxa.preprocess(list(history), json.dumps(merged))


def evaluate(model, queries, dataset, kind, n=20, theta_min=0.02):
    return json.loads(_xaxa.evaluate(model, list(queries), dataset, kind, n, theta_min))


def explain(model, query, grid):
    return json.loads(model.explain(query, list(grid)))
