import os
from collections import deque

import numpy as np
import pytest

from wltls.data import Dataset
from wltls.trellis import TrellisGraph


def enumerate_paths(graph: TrellisGraph) -> list[list[int]]:
    """All source-to-sink edge paths by depth-first search over the raw edge list."""
    out = {}
    for e, (t, h) in enumerate(zip(graph.tails.tolist(), graph.heads.tolist())):
        out.setdefault(t, []).append((e, h))
    paths, stack = [], [(graph.source, [])]
    while stack:
        v, path = stack.pop()
        if v == graph.sink:
            paths.append(path)
            continue
        for e, h in out.get(v, []):
            stack.append((h, path + [e]))
    return paths


def bfs_depth(graph: TrellisGraph) -> dict[int, int]:
    adj = {}
    for t, h in zip(graph.tails.tolist(), graph.heads.tolist()):
        adj.setdefault(t, []).append(h)
    depth = {graph.source: 0}
    queue = deque([graph.source])
    while queue:
        v = queue.popleft()
        for h in adj.get(v, []):
            if h not in depth:
                depth[h] = depth[v] + 1
                queue.append(h)
    return depth


def literal_weights(graph: TrellisGraph, f, loss_fn) -> np.ndarray:
    """Edge weights by summing over each edge's exclusion group edge by edge."""
    depth = bfs_depth(graph)
    tails, heads = graph.tails.tolist(), graph.heads.tolist()
    w = np.empty(graph.n_edges)
    for j in range(graph.n_edges):
        dj = depth[tails[j]]
        total = loss_fn(f[j])
        for jp in range(graph.n_edges):
            if jp == j:
                continue
            dp = depth[tails[jp]]
            same = dp >= dj if heads[j] == graph.sink else dp == dj
            if same:
                total += loss_fn(-f[jp])
        w[j] = total
    return w


def make_toy(rows, labels=None, d=None) -> Dataset:
    """Dataset from ``[(class_id, {index: value}), ...]``."""
    indptr, idx, val, y = [0], [], [], []
    for k, feats in rows:
        for j in sorted(feats):
            idx.append(j)
            val.append(float(feats[j]))
        indptr.append(len(idx))
        y.append(k)
    K = max(y) + 1
    labels = labels or tuple(str(k) for k in range(K))
    d = d or (max(idx) + 1)
    return Dataset(np.array(indptr, dtype=np.int64), np.array(idx, dtype=np.int64),
                   np.array(val), np.array(y, dtype=np.int64), d, tuple(labels))


@pytest.fixture(scope="session")
def small_synth():
    from wltls.synthetic import SyntheticSpec, make_train_test
    spec = SyntheticSpec(K=20, d=2000, n_groups=4, class_support=20, group_support=30)
    return make_train_test(800, 400, spec, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sector_paths():
    train = os.environ.get("WLTLS_SECTOR_TRAIN")
    test = os.environ.get("WLTLS_SECTOR_TEST")
    if train and test and os.path.exists(train) and os.path.exists(test):
        return train, test
    return None


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
