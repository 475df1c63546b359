"""Causal discovery on tabular data: simulation, five learners, metrics and tasks."""

import json

import numpy as np

from . import _core

__all__ = [
    "CausalforgeError",
    "acyclicity",
    "dag_to_cpdag",
    "evaluate",
    "is_dag",
    "learn",
    "run_task",
    "simulate",
]

ALGORITHMS = ("pc", "ges", "direct_lingam", "notears", "golem")


class CausalforgeError(Exception):
    """Library failure with a stable ``code`` such as ``"InvalidConfig"``."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def _translate(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _core.Error as e:
        code, _, message = str(e).partition(": ")
        raise CausalforgeError(code, message) from None


def _dumps(value):
    if value is None:
        return ""
    return value if isinstance(value, str) else json.dumps(value)


def _graph_matrix(graph, dtype=float):
    out = np.zeros((graph["d"], graph["d"]), dtype=dtype)
    for edge in graph["edges"]:
        out[edge[0], edge[1]] = edge[2] if len(edge) == 3 else 1
    return out


def simulate(d, e, n, *, model="er", sem="linear", noise="gauss", noise_scale=1.0,
             weight_range=(0.5, 2.0), rank=1, seed=0):
    """Draw a random DAG and n samples from it. Returns a dict with X, W and B."""
    lo, hi = weight_range
    return _translate(_core.simulate, d, e, n, model, sem, noise, noise_scale, lo, hi, rank, seed)


def learn(x, algorithm="notears", *, params=None, prior=None, threshold=None, mask=None):
    """Learn a graph from an (n, d) array.

    ``prior`` is ``{"required": [[i, j], ...], "forbidden": [...]}``. The result
    holds ``graph`` (int adjacency, a symmetric pair is undirected), ``kind``,
    ``converged`` and, when the method produces them, ``weights``,
    ``raw_weights`` and ``causal_order``.
    """
    x = np.ascontiguousarray(x, dtype=float)
    if mask is not None:
        mask = np.asarray(mask, dtype=np.int32)
    out = json.loads(_translate(_core.learn_json, x, algorithm, _dumps(params), _dumps(prior), threshold, mask))
    out["graph"] = _graph_matrix(out["graph"], int)
    for key in ("weights", "raw_weights"):
        if key in out:
            out[key] = _graph_matrix(out[key])
    return out


def evaluate(estimate, truth):
    """The nine structural metrics of an estimate against a true DAG."""
    est = (np.asarray(estimate) != 0).astype(np.int32)
    tru = (np.asarray(truth) != 0).astype(np.int32)
    return json.loads(_translate(_core.evaluate_json, est, tru))


def run_task(config, include_timing=False):
    """Run a task config (dict or JSON text) and return the result as a dict."""
    return json.loads(_translate(_core.run_task_json, _dumps(config), include_timing))


def normalize_config(config):
    """Validate a task config and return it with every default filled in."""
    return json.loads(_translate(_core.normalize_config, _dumps(config)))


def acyclicity(w):
    """h(W) = tr(exp(W o W)) - d and its gradient."""
    return _translate(_core.acyclicity, np.asarray(w, dtype=float))


def dag_to_cpdag(b):
    return _translate(_core.dag_to_cpdag, (np.asarray(b) != 0).astype(np.int32))


def is_dag(w):
    return bool(_core.is_dag(np.asarray(w, dtype=float)))
