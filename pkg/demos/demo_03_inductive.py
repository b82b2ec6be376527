"""
Scoring nodes that were never seen in training
==============================================

In the inductive setting 10% of the nodes are hidden while training, and
the links among them form the test set. They
have no structure embedding, so a new node is scored from its attribute
vector alone and the structure-structure term is dropped.
"""

import numpy as np

from deal import HyperParams, TrainConfig, evaluate, link_score, split_inductive, train
from deal.datasets import make_attributed_sbm

graph = make_attributed_sbm(num_nodes=600, num_communities=6, num_attrs=300, avg_degree=5, seed=1)
split = split_inductive(graph, hidden_frac=0.1, val_frac=0.1, seed=0)
hidden = split.hidden_nodes
print(f"{hidden.size} test nodes and {split.val_nodes.size} validation nodes are unseen in training")
print(f"{len(split.test_pos)} test links join two test nodes")

cfg = TrainConfig(hp=HyperParams(lam=(0.0, 0.7, 0.3)), epochs=60, hidden_dims=(64,), embed_dim=32, seed=0)
model = train(graph, split, cfg)
print(f"test AUC {evaluate(model, split).auc:.4f}")

###############################################################################
# A brand-new node needs nothing but its attribute row. Here we copy a
# hidden node's attributes and score it against its true neighbours and
# against random nodes.

new = hidden[0]
x_new = graph.features[new].toarray()[0]
nbrs = graph.neighbors(new)
others = np.setdiff1d(np.arange(graph.num_nodes), np.append(nbrs, new))[:len(nbrs)]
lam = (0.0, 0.7, 0.3)
print("neighbours", np.round([link_score(model, int(v), x_new, lam) for v in nbrs], 3))
print("others    ", np.round([link_score(model, int(v), x_new, lam) for v in others], 3))
