"""Objective L(u_k) and constraint ||z_k - u_k||^2 along the iterations of Experiment 1.

Writes a CSV trace and, if matplotlib is available, a two-panel plot.
"""
import argparse
from pathlib import Path

from midal.experiments import load_configs, make_observation, preset_path
from midal.imageio import write_trace_csv
from midal.solver import midal_solve

parser = argparse.ArgumentParser()
parser.add_argument("--seed", type=int, default=None)
parser.add_argument("--out", default="results/exp1_trace")
args = parser.parse_args()

cfg = load_configs(preset_path("experiments_1_7.json"))[0]
seed = cfg.seed if args.seed is None else args.seed
_, noisy = make_observation(cfg, seed)
result = midal_solve(noisy, cfg.solver_params())
out = Path(args.out)
out.parent.mkdir(parents=True, exist_ok=True)
write_trace_csv(result.trace, out.with_suffix(".csv"), {"experiment": 1, "seed": seed})

c = result.trace.column("constraint_sq")
print(f"iterations {result.iterations}, constraint {c[0]:.3e} -> {c[-1]:.3e} ({c[0] / c[-1]:.1e}x)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit(0)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
k = result.trace.column("iter")
ax1.plot(k, result.trace.column("objective"))
ax1.set_xlabel("iteration")
ax1.set_ylabel("L(u_k)")
ax2.semilogy(k, c)
ax2.set_xlabel("iteration")
ax2.set_ylabel("||z_k - u_k||^2")
fig.tight_layout()
fig.savefig(out.with_suffix(".png"), dpi=120)
print(f"wrote {out.with_suffix('.png')}")
