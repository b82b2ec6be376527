"""
Similarity against graph distance
=================================

After training, node pairs a single hop apart should have more similar
structure embeddings than pairs three hops apart. Before training the
profile is flat near zero.
"""

import numpy as np

from deal import TrainConfig, hop_similarity_profile, split_transductive, train
from deal.datasets import make_attributed_sbm
from deal.model import TrainedModel
from deal.training import init_params

graph = make_attributed_sbm(num_nodes=500, num_communities=5, num_attrs=200, avg_degree=6, seed=2)
split = split_transductive(graph, 0.1, 0.1, seed=0)
cfg = TrainConfig(epochs=50, hidden_dims=(64,), embed_dim=32, seed=0)

attr, struct = init_params(graph, cfg, np.random.default_rng(0)).unpack()
untrained = TrainedModel(attr, struct, cfg.hp, np.ones(graph.num_nodes, bool), features=graph.features)
trained = train(graph, split, cfg)

for name, model in [("untrained", untrained), ("trained", trained)]:
    for kind in ("structure", "attribute"):
        prof = hop_similarity_profile(model, graph, h_max=4, kind=kind)
        print(f"{name:9s} {kind:9s} " + "  ".join(f"h{h}={s:+.3f}" for h, s, _ in prof))
