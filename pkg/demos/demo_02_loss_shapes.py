"""
How the pieces of the objective behave
======================================

The ranking loss pushes positive pairs towards cosine 1 and negative pairs
towards -1 through a generalized logistic function. Its sharpness ``gamma``
sets how fast the penalty fades; ``b`` shifts the margin. Negative pairs
that are close in the graph get a larger weight.
"""

import numpy as np

from deal.loss import generalized_logistic, negative_weight

x = np.linspace(-1, 1, 5)
print("cosine      " + "".join(f"{v:8.2f}" for v in x))
for gamma, b in [(1, 0), (2, 0), (5, 0), (2, 1)]:
    row = generalized_logistic(x, gamma, b)
    print(f"phi g={gamma} b={b} " + "".join(f"{v:8.4f}" for v in row))

###############################################################################
# A larger ``beta`` makes near-miss negatives (two or three hops apart)
# count more than pairs that are far apart or disconnected.

hops = [2, 3, 4, 5, np.inf]
print("\nhops        " + "".join(f"{h:8}" for h in hops))
for beta in (0.5, 1.0, 2.0):
    print(f"beta={beta:<4}   " + "".join(f"{w:8.3f}" for w in negative_weight(np.array(hops), beta)))

# beta=None switches the weighting off
print("off        ", negative_weight(np.array(hops), None))
