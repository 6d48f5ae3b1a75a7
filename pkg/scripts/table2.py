"""Reproduce the quantitative table over several noise seeds.

    python scripts/table2.py --seeds 5 --out results/table2.json

Experiments on images that are not distributed (everything except
Cameraman) run on substitute phantoms, so only rows 1, 2 and 14-16 are
comparable to the published numbers.
"""
import argparse
import logging
from pathlib import Path

from midal.experiments import PRESETS, format_table, load_configs, preset_path, run_benchmark
from midal.imageio import dump_json

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, default=5)
parser.add_argument("--only", help="comma-separated experiment indices")
parser.add_argument("--out", default="results/table2.json")
args = parser.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

configs = [c for name in PRESETS for c in load_configs(preset_path(name))]
if args.only:
    keep = {int(v) for v in args.only.split(",")}
    configs = [c for c in configs if c.index in keep]
rows = run_benchmark(configs, args.seeds)
Path(args.out).parent.mkdir(parents=True, exist_ok=True)
dump_json({"seeds": args.seeds, "experiments": [r.to_dict() for r in rows]}, args.out)
print(format_table(rows))
