"""
The same workflow from the command line
=======================================

Every step is also a ``deal`` subcommand that reads a ``key = value``
config file. This script writes a synthetic graph to ``data/`` and drives
the command-line entry point in-process, so it can run anywhere; the
equivalent shell commands are printed as it goes.
"""

import os
import sys

from deal.cli import main
from deal.datasets import export, make_attributed_sbm

here = os.path.dirname(os.path.abspath(__file__))
os.chdir(os.path.join(here, ".."))

export(make_attributed_sbm(400, 4, 120, avg_degree=5, seed=0), "data", "sbm")


def deal(*args):
    print("$ deal " + " ".join(args))
    code = main(list(args))
    if code:
        sys.exit(code)


deal("split", "--config", "configs/smoke.config")
deal("train", "--config", "configs/smoke.config", "--set", "split=runs/smoke/split.txt",
     "--set", "checkpoint=runs/smoke/model.ckpt")
deal("eval", "--config", "configs/smoke.config", "--set", "split=runs/smoke/split.txt",
     "--set", "checkpoint=runs/smoke/model.ckpt")

# a 2 x 2 grid over the logistic sharpness and the negative weighting
deal("sweep", "--config", "configs/smoke.config", "--set", "grid.gamma=1; 2", "--set", "grid.beta=off; 1")
print(open("runs/smoke/sweep_matrix.csv").read())

deal("predict", "--config", "configs/smoke.config", "--set", "checkpoint=runs/smoke/model.ckpt",
     "--pair", "0:1", "--pair", "0:200")
