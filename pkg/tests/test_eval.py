import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deal.encoders import AttrEncoderParams, ShapeError, StructEncoderParams
from deal.evaluation import (Metrics, MetricError, SplitRecipe, TrialError, auc, average_precision,
                             evaluate, hop_similarity_profile, link_score, read_metrics_csv, run_trials,
                             score_pairs, write_hop_profile_csv, write_metrics_csv)
from deal.graph import AttributedGraph, SplitSpec
from deal.loss import HyperParams
from deal.model import TrainedModel
from deal.training import TrainConfig


def brute_auc(y, s):
    pos = [b for a, b in zip(y, s) if a == 1]
    neg = [b for a, b in zip(y, s) if a == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def brute_ap(y, s):
    """Precision-at-k sweep; precisions are summed with a correctly rounded sum."""
    order = sorted(range(len(s)), key=lambda i: (-s[i], i))
    precisions = []
    for k in range(1, len(order) + 1):
        if y[order[k - 1]] == 1:
            hits = sum(y[i] for i in order[:k])
            precisions.append(hits / k)
    return math.fsum(precisions) / len(precisions)


def identity_model(z_s, z_a, trained=None):
    """Model whose attribute encoder maps feature row i to z_a[i] (z_a >= 0, elu identity)."""
    z_a = np.asarray(z_a, float)
    n, l = z_a.shape
    attr = AttrEncoderParams([z_a.T.copy()], [np.zeros(l)])
    struct = StructEncoderParams(np.asarray(z_s, float), np.ones(n))
    mask = np.ones(n, bool) if trained is None else np.asarray(trained)
    return TrainedModel(attr, struct, HyperParams(), mask, features=np.eye(n))


# ---- metrics -----------------------------------------------------------------

def test_auc_examples():
    assert auc([1, 0], [0.9, 0.1]) == 1.0
    assert auc([1, 0, 1, 0], [0.3] * 4) == 0.5
    assert auc([1, 1, 0, 0], [0.8, 0.4, 0.6, 0.2]) == 0.75


def test_ap_examples():
    assert average_precision([1, 1, 0, 0], [4, 3, 2, 1]) == 1.0
    assert average_precision([1, 0, 1, 0], [4, 3, 2, 1]) == pytest.approx((1 + 2 / 3) / 2, abs=1e-15)
    assert average_precision([1, 0, 1, 0], [4, 3, 2, 1]) == pytest.approx(0.8333, abs=5e-5)
    assert average_precision([0, 0, 0, 1], [4, 3, 2, 1]) == 0.25


def test_ap_ties_by_index():
    # equal scores keep original order: positive first -> 1.0, positive last -> 0.5
    assert average_precision([1, 0], [0.5, 0.5]) == 1.0
    assert average_precision([0, 1], [0.5, 0.5]) == 0.5


@pytest.mark.parametrize("labels, scores", [([1, 1], [0.1, 0.2]), ([0, 0], [1, 2]), ([1, 0], [1]),
                                            ([1, 2], [0, 1])])
def test_metric_errors(labels, scores):
    with pytest.raises(MetricError):
        auc(labels, scores)
    with pytest.raises(MetricError):
        average_precision(labels, scores)


def test_metrics_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(300):
        k = int(rng.integers(2, 201))
        y = rng.integers(0, 2, size=k)
        y[0], y[1] = 1, 0
        s = rng.integers(0, 8, size=k) / 7 if rng.random() < 0.5 else rng.normal(size=k)
        assert auc(y, s) == brute_auc(y.tolist(), s.tolist())
        assert average_precision(y, s) == brute_ap(y.tolist(), s.tolist())


@settings(max_examples=100)
@given(data=st.lists(st.tuples(st.integers(0, 1), st.integers(-40, 40)), min_size=2, max_size=60))
def test_auc_monotone_invariance(data):
    # scores on a coarse grid so that the transforms stay injective in floating point
    y = np.array([a for a, _ in data])
    if y.min() == y.max():
        return
    s = np.array([b / 8 for _, b in data])
    assert auc(y, s) == auc(y, np.exp(s) * 3 + 1) == auc(y, s ** 3)


def test_aggregate():
    m = Metrics.aggregate([(0.9, 0.8), (0.7, 0.6), (0.8, 0.7)])
    assert m.auc == pytest.approx(0.8, abs=1e-12) and m.ap == pytest.approx(0.7, abs=1e-12)
    assert m.auc_std == pytest.approx(0.1, abs=1e-12)
    single = Metrics.aggregate([(0.9, 0.8)])
    assert (single.auc, single.ap, single.auc_std) == (0.9, 0.8, 0.0)


def test_metrics_csv_round_trip(tmp_path):
    m = Metrics.aggregate([(0.91, 0.88), (0.93, 0.9)])
    path = tmp_path / "m.csv"
    write_metrics_csv(m, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["trial", "auc", "ap"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "mean", "stddev"]
    back = read_metrics_csv(path)
    assert back == m


# ---- link score --------------------------------------------------------------

def test_link_score_examples():
    z_a = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    z_s = np.array([[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    model = identity_model(z_s, np.abs(z_a))
    # two new nodes with identical attributes
    x = np.array([0.3, 0.0])
    assert link_score(model, x, x.copy(), (0, 1, 0)) == pytest.approx(1.0, abs=1e-15)
    # all four embeddings pairwise orthogonal: z_s0 ⊥ z_s1 needs a different table
    orth = identity_model([[0, 0, 1, 0], [0, 0, 0, 1]], [[1, 0, 0, 0], [0, 1, 0, 0]])
    assert link_score(orth, 0, 1, (1, 1, 1)) == 0.0


def test_link_score_weighted_sum():
    # s_ss = 0.8, s_aa = 0.4
    z_s = [[1.0, 2.0], [2.0, 1.0]]
    z_a = [[1.0, 0.0], [0.4, math.sqrt(1 - 0.16)]]
    model = identity_model(z_s, z_a)
    assert link_score(model, 0, 1, (0.5, 0.5, 0)) == pytest.approx(0.6, abs=1e-15)


def test_link_score_drops_terms_for_new_nodes():
    rng = np.random.default_rng(3)
    z_s, z_a = rng.normal(size=(3, 4)), np.abs(rng.normal(size=(3, 4)))
    model = identity_model(z_s, z_a)
    lam = (0.2, 0.5, 0.3)
    full = link_score(model, 0, 1, lam)
    attr_only = link_score(model, 0, np.eye(3)[1], lam)   # q new: lambda_1 dropped
    no_l1 = link_score(model, 0, 1, (0.0, 0.5, 0.3))
    assert attr_only == pytest.approx(no_l1, abs=1e-15)
    cos_ss = link_score(model, 0, 1, (1, 0, 0))
    assert full - no_l1 == pytest.approx(0.2 * cos_ss, abs=1e-15)
    # p new: lambda_1 and lambda_3 both need z_s of p
    assert link_score(model, np.eye(3)[0], 1, lam) == pytest.approx(link_score(model, 0, 1, (0, 0.5, 0)))
    # untrained node ids behave like new nodes
    model.trained_mask[1] = False
    assert link_score(model, 0, 1, lam) == pytest.approx(no_l1, abs=1e-15)


def test_link_score_width_mismatch():
    model = identity_model(np.eye(2), np.eye(2))
    with pytest.raises(ShapeError):
        link_score(model, 0, np.ones(3), (0, 1, 0))


def test_attribute_only_score_ignores_structure():
    rng = np.random.default_rng(4)
    model = identity_model(rng.normal(size=(5, 3)), np.abs(rng.normal(size=(5, 3))))
    before = [link_score(model, i, j, (0, 1, 0)) for i in range(5) for j in range(5) if i != j]
    model.struct.directions[:] = model.struct.directions[rng.permutation(5)]
    model.struct.scales[:] = rng.uniform(0.1, 3, 5)
    after = [link_score(model, i, j, (0, 1, 0)) for i in range(5) for j in range(5) if i != j]
    assert before == after


def test_score_pairs_matches_link_score():
    rng = np.random.default_rng(5)
    model = identity_model(rng.normal(size=(6, 3)), np.abs(rng.normal(size=(6, 3))),
                           trained=[1, 1, 0, 1, 0, 1])
    pairs = np.array([(a, b) for a, b in itertools.permutations(range(6), 2)])
    lam = (0.3, 0.3, 0.4)
    vec = score_pairs(model, pairs, lam)
    ref = [link_score(model, int(a), int(b), lam) for a, b in pairs]
    assert np.allclose(vec, ref, atol=1e-14, rtol=0)
    sym = score_pairs(model, pairs, lam, symmetrize=True)
    rev = score_pairs(model, pairs[:, ::-1], lam)
    assert np.allclose(sym, 0.5 * (vec + rev), atol=1e-15)


# ---- evaluate ------------------------------------------------------------------

def clique_model_and_split():
    """Two disjoint 4-cliques; each clique shares one structure direction."""
    edges = [(a, b) for c in (0, 4) for a in range(c, c + 4) for b in range(a + 1, c + 4)]
    g = AttributedGraph(8, 2, edges, np.tile([1.0, 0.0], (8, 1)))
    z_s = np.array([[1.0, 0.0]] * 4 + [[0.0, 1.0]] * 4)
    model = TrainedModel(AttrEncoderParams([np.eye(2)], [np.zeros(2)]), StructEncoderParams(z_s),
                         HyperParams(lam=(1, 0, 0)), np.ones(8, bool), features=g.features)
    pos = np.array([(0, 1), (4, 5), (2, 3)])
    neg = np.array([(0, 4), (1, 6), (3, 7)])
    split = SplitSpec("transductive", [e for e in edges if tuple(e) not in map(tuple, pos.tolist())],
                      pos, neg, pos, neg)
    return g, model, split


def test_oracle_model_scores_perfectly():
    g, model, split = clique_model_and_split()
    m = evaluate(model, split, (1, 0, 0), "test")
    assert (m.auc, m.ap) == (1.0, 1.0)
    m = evaluate(model, split, None, "val")   # lambda from the model's hp
    assert (m.auc, m.ap) == (1.0, 1.0)


def test_random_scores_near_half():
    rng = np.random.default_rng(0)
    y = np.repeat([1, 0], 250)
    vals = [auc(y, rng.random(500)) for _ in range(1000)]
    assert np.mean([(0.4 <= v <= 0.6) for v in vals]) > 0.99


# ---- hop profile ---------------------------------------------------------------

def test_single_edge_identical_embeddings():
    g = AttributedGraph(2, 2, [(0, 1)], np.ones((2, 2)))
    model = identity_model(np.ones((2, 2)), np.ones((2, 2)))
    for kind in ("structure", "attribute"):
        prof = hop_similarity_profile(model, g, 3, kind)
        assert prof == [(1, pytest.approx(1.0, abs=1e-15), 1)]


def test_profile_counts_and_h1(tmp_path):
    g = AttributedGraph(5, 1, [(0, 1), (1, 2), (2, 3), (3, 4)], np.ones((5, 1)))
    rng = np.random.default_rng(1)
    model = identity_model(rng.normal(size=(5, 8)), np.ones((5, 1)))
    prof = hop_similarity_profile(model, g, 10, "structure")
    assert [(h, c) for h, _, c in prof] == [(1, 4), (2, 3), (3, 2), (4, 1)]
    assert len(hop_similarity_profile(model, g, 1, "structure")) == 1
    write_hop_profile_csv(prof, tmp_path / "h.csv")
    assert open(tmp_path / "h.csv").readline().strip() == "hop,mean_cosine,pair_count"
    with pytest.raises(ValueError):
        hop_similarity_profile(model, g, 0)


def test_random_embeddings_profile_near_zero():
    rng = np.random.default_rng(2)
    n = 400
    edges = {tuple(sorted(rng.choice(n, 2, replace=False))) for _ in range(1200)}
    g = AttributedGraph(n, 1, sorted(edges), np.ones((n, 1)))
    model = identity_model(rng.normal(size=(n, 256)), np.ones((n, 1)))
    for _, s, c in hop_similarity_profile(model, g, 4, "structure", max_pairs=5000):
        # mean of c cosines of random 256-dim vectors has sd about 1/sqrt(256 c)
        assert abs(s) < 5 / math.sqrt(256 * c) + 1e-3


# ---- trials ------------------------------------------------------------------

FAST = dict(epochs=3, hidden_dims=(16,), embed_dim=8, eval_every=1)


def test_run_trials_deterministic(sbm):
    cfg = TrainConfig(hp=HyperParams(batch_size=64), **FAST)
    recipe = SplitRecipe("transductive")
    a = run_trials(sbm, recipe, cfg, trials=2, base_seed=5)
    b = run_trials(sbm, recipe, cfg, trials=2, base_seed=5)
    assert a == b and len(a.trial_values) == 2
    assert a.auc == pytest.approx(np.mean([t[0] for t in a.trial_values]), abs=1e-12)
    one = run_trials(sbm, recipe, cfg, trials=1, base_seed=5)
    assert one.trial_values[0] == a.trial_values[0] and one.auc == a.trial_values[0][0]


def test_run_trials_parallel_matches_sequential(sbm):
    cfg = TrainConfig(hp=HyperParams(batch_size=64), **FAST)
    recipe = SplitRecipe("inductive", hidden_frac=0.2)
    seq = run_trials(sbm, recipe, cfg, trials=2, base_seed=1)
    par = run_trials(sbm, recipe, cfg, trials=2, base_seed=1, workers=2)
    assert seq == par


def test_trial_failure_names_index():
    g = AttributedGraph(20, 1, [(i, i + 1) for i in range(19)], np.ones((20, 1)))
    cfg = TrainConfig(hp=HyperParams(batch_size=8), **FAST)
    with pytest.raises(TrialError) as err:
        run_trials(g, SplitRecipe("inductive", hidden_frac=0.1), cfg, trials=30, base_seed=0)
    assert err.value.trial >= 0 and f"trial {err.value.trial}" in str(err.value)
