"""Objective traces for warm- versus cold-started TV prox (Experiment 1 setting).

For each inner-iteration budget, runs the solver once with the dual field
carried across outer iterations and once with it reset to zero, for a
fixed number of outer iterations.
"""
import argparse

import numpy as np

from midal.experiments import load_configs, make_observation, preset_path
from midal.solver import midal_solve

parser = argparse.ArgumentParser()
parser.add_argument("--outer", type=int, default=60)
parser.add_argument("--budgets", default="5,10,20,50,100")
args = parser.parse_args()

cfg = load_configs(preset_path("experiments_1_7.json"))[0]
_, noisy = make_observation(cfg, cfg.seed)
print(f"{'inner':>6} {'warm final L':>14} {'cold final L':>14} {'warm s':>8} {'cold s':>8}")
for inner in (int(v) for v in args.budgets.split(",")):
    finals = []
    for warm in (True, False):
        # stop_exponent large enough that only max_outer ends the run
        r = midal_solve(noisy, cfg.solver_params(inner_iters=inner, warm_start=warm, stop_exponent=15, max_outer=args.outer))
        finals.append((r.trace.records[-1].objective, r.trace.records[-1].seconds))
    (fw, tw), (fc, tc) = finals
    print(f"{inner:>6} {fw:>14.2f} {fc:>14.2f} {tw:>8.2f} {tc:>8.2f}")
