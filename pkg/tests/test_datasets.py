import pickle
from collections import defaultdict

import numpy as np
import scipy.sparse as sp

from deal.datasets import convert_linqs, convert_npz, convert_planetoid, export, make_attributed_sbm
from deal.graph import load_graph_files


def edge_set(g):
    return {tuple(e) for e in g.edges.tolist()}


def test_sbm_shape_and_homophily():
    g = make_attributed_sbm(400, 4, 80, avg_degree=6, seed=1)
    assert (g.num_nodes, g.num_attrs, g.num_edges) == (400, 80, 1200)
    same = np.mean([g.communities[u] == g.communities[v] for u, v in g.edges])
    assert same > 0.8
    assert set(np.unique(g.features.data)) == {1.0}
    again = make_attributed_sbm(400, 4, 80, avg_degree=6, seed=1)
    assert np.array_equal(g.edges, again.edges) and (g.features != again.features).nnz == 0


def test_export_round_trip(tmp_path):
    g = make_attributed_sbm(50, 2, 10, seed=0)
    e, f = export(g, tmp_path, "s")
    back = load_graph_files(e, f)
    assert edge_set(back) == edge_set(g) and np.array_equal(back.features.toarray(), g.features.toarray())


def test_linqs(tmp_path):
    (tmp_path / "c.content").write_text("p1 1 0 0 A\np2 0 1 1 B\np3 0 0 1 A\n")
    (tmp_path / "c.cites").write_text("p1 p2\np2 p1\np3 p3\np2 p3\np1 missing\n")
    g = convert_linqs(tmp_path / "c.content", tmp_path / "c.cites")
    assert edge_set(g) == {(0, 1), (1, 2)}
    assert np.array_equal(g.features.toarray(), [[1, 0, 0], [0, 1, 1], [0, 0, 1]])


def test_npz(tmp_path):
    adj = sp.csr_matrix(np.array([[0, 1, 0, 1], [0, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0]], dtype=float))
    x = sp.csr_matrix(np.arange(8, dtype=float).reshape(4, 2))
    np.savez(tmp_path / "g.npz", adj_data=adj.data, adj_indices=adj.indices, adj_indptr=adj.indptr,
             adj_shape=adj.shape, attr_data=x.data, attr_indices=x.indices, attr_indptr=x.indptr,
             attr_shape=x.shape)
    g = convert_npz(tmp_path / "g.npz")
    assert edge_set(g) == {(0, 1), (0, 3), (1, 2)}
    assert np.array_equal(g.features.toarray(), x.toarray())


def test_planetoid_reorders_test_rows(tmp_path):
    # 4 training rows followed by 2 test rows listed out of order
    allx = sp.csr_matrix(np.array([[1.0, 0], [2, 0], [3, 0], [4, 0]]))
    tx = sp.csr_matrix(np.array([[0, 5.0], [0, 6.0]]))
    graph = defaultdict(list, {0: [1, 5], 1: [0], 2: [3], 3: [2], 4: [5], 5: [0, 4]})
    for suffix, obj in (("allx", allx), ("tx", tx), ("graph", graph)):
        with open(tmp_path / f"ind.toy.{suffix}", "wb") as f:
            pickle.dump(obj, f)
    (tmp_path / "ind.toy.test.index").write_text("5\n4\n")
    g = convert_planetoid(tmp_path, "toy")
    assert g.num_nodes == 6 and edge_set(g) == {(0, 1), (0, 5), (2, 3), (4, 5)}
    # the file lists node 5 first, so tx row 0 belongs to node 5
    assert np.array_equal(g.features.toarray()[4:], [[0, 6.0], [0, 5.0]])
