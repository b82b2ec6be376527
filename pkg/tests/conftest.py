import io
import os

import numpy as np
import pytest

from deal.datasets import make_attributed_sbm
from deal.graph import AttributedGraph, load_graph


def graph_from_text(edges: str, features: str | None = None) -> AttributedGraph:
    return load_graph(io.StringIO(edges), io.StringIO(features) if features is not None else None)


def random_graph(rng, n, p, m=4):
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    edges = np.column_stack([iu[0][keep], iu[1][keep]])
    x = (rng.random((n, m)) < 0.5).astype(float)
    return AttributedGraph(n, m, edges, x)


@pytest.fixture(scope="session")
def sbm():
    return make_attributed_sbm(num_nodes=300, num_communities=5, num_attrs=100, avg_degree=6.0, seed=3)


@pytest.fixture
def toy_files(tmp_path, sbm):
    from deal.datasets import export
    edges, feats = export(sbm, tmp_path / "data", "toy")
    return str(edges), str(feats)


@pytest.fixture
def in_tmp(tmp_path):
    old = os.getcwd()
    os.chdir(tmp_path)
    yield tmp_path
    os.chdir(old)


# ---- acceptance reporting ----------------------------------------------------

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Call it with the criterion number and a detail string before asserting;
    the verdict comes from the test outcome.
    """
    state = {}

    def record(number, detail):
        state["number"], state["detail"] = number, detail

    yield record
    if "number" in state:
        rep = getattr(request.node, "rep_call", None)
        ok = rep is not None and rep.passed
        _ACCEPTANCE[state["number"]] = f"{'PASS' if ok else 'FAIL'}  {state['detail']}"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE, key=str):
        terminalreporter.write_line(f"criterion {number}: {_ACCEPTANCE[number]}")
