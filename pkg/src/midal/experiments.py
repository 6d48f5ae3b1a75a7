"""Experiment configurations, test images and the multi-seed benchmark runner."""
from __future__ import annotations

import logging
import time
import zlib
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .imageio import load_json, read_image
from .metrics import evaluate
from .solver import MidalParams, midal_solve
from .speckle import SpeckleParams, apply_speckle, rescale_image

log = logging.getLogger(__name__)

PRESETS = ("experiments_1_7.json", "experiments_8_16.json")


@dataclass
class ExperimentConfig:
    """One benchmark row.  ``image`` is a file path, ``builtin:cameraman`` or ``phantom:<name>``."""

    name: str
    image: str
    looks: float
    xmin: float
    xmax: float
    lam: float
    mu: float | str = "auto"
    stop_exponent: int = 4
    seed: int = 0
    inner_iters: int = 20
    index: int | None = None
    size: list[int] | None = None
    ref_err: float | None = None
    ref_mae: float | None = None
    ref_iter: int | None = None
    note: str | None = None

    def __post_init__(self):
        if not self.xmax > self.xmin > 0:
            raise ValueError(f"{self.name}: need xmax > xmin > 0")
        if self.mu != "auto" and not float(self.mu) > 0:
            raise ValueError(f"{self.name}: mu must be 'auto' or positive")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["lam"] = d.pop("lambda")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    def solver_params(self, **overrides) -> MidalParams:
        kw = dict(
            looks=self.looks,
            lam=self.lam,
            mu=None if self.mu == "auto" else float(self.mu),
            inner_iters=self.inner_iters,
            stop_exponent=self.stop_exponent,
        )
        kw.update(overrides)
        return MidalParams(**kw)


def load_configs(path) -> list[ExperimentConfig]:
    """Parse a config file: a list of rows or ``{"experiments": [...]}``.

    Relative image paths are resolved against the config file's directory.
    """
    raw = load_json(path)
    rows = raw["experiments"] if isinstance(raw, dict) else raw
    base = Path(path).resolve().parent
    configs = []
    for row in rows:
        cfg = ExperimentConfig.from_dict(row)
        if ":" not in cfg.image and not Path(cfg.image).is_absolute():
            cfg.image = str(base / cfg.image)
        configs.append(cfg)
    return configs


def preset_path(name: str) -> Path:
    return Path(str(resources.files("midal") / "data" / name))


def cameraman() -> np.ndarray:
    """The 256x256 8-bit Cameraman test image as floats in [0, 255]."""
    return read_image(preset_path("cameraman256.pgm"))


def phantom(name: str, height: int, width: int) -> np.ndarray:
    """Piecewise-constant test image of rectangles and ellipses.

    The layout is a deterministic function of ``name`` and the size, so
    every run of the same experiment sees the same phantom.
    """
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    img = np.full((height, width), rng.uniform(0.2, 0.4))
    rows, cols = np.mgrid[0:height, 0:width]
    for _ in range(6):
        r0, r1 = np.sort(rng.integers(0, height, 2))
        c0, c1 = np.sort(rng.integers(0, width, 2))
        img[r0 : r1 + 1, c0 : c1 + 1] = rng.uniform(0.0, 1.0)
    for _ in range(6):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        ry, rx = rng.uniform(0.05, 0.25) * height, rng.uniform(0.05, 0.25) * width
        inside = ((rows - cy) / ry) ** 2 + ((cols - cx) / rx) ** 2 <= 1.0
        img[inside] = rng.uniform(0.0, 1.0)
    return (img - img.min()) / (img.max() - img.min())


def load_source_image(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.image == "builtin:cameraman":
        img = cameraman()
    elif cfg.image.startswith("phantom:"):
        if cfg.size is None:
            raise ValueError(f"{cfg.name}: phantom images need a size")
        img = phantom(cfg.image.split(":", 1)[1], *cfg.size)
    else:
        img = read_image(cfg.image)
    if cfg.size is not None and list(img.shape) != list(cfg.size):
        raise ValueError(f"{cfg.name}: image shape {img.shape} does not match size {cfg.size}")
    return img


def make_observation(cfg: ExperimentConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(clean, noisy)`` for one realization of the experiment."""
    clean = rescale_image(load_source_image(cfg), cfg.xmin, cfg.xmax)
    noisy = apply_speckle(clean, SpeckleParams(cfg.looks, seed))
    return clean, noisy


@dataclass
class SeedRun:
    seed: int
    err: float
    mae: float
    mse: float
    iterations: int
    seconds: float
    converged: bool
    constraint_first: float
    constraint_last: float


@dataclass
class BenchmarkRow:
    index: int | None
    name: str
    config: dict
    runs: list[SeedRun] = field(default_factory=list)
    error: str | None = None

    def stat(self, key: str) -> tuple[float, float]:
        vals = np.array([getattr(r, key) for r in self.runs], dtype=float)
        if vals.size == 0:
            return float("nan"), float("nan")
        return float(vals.mean()), float(vals.std())

    def to_dict(self) -> dict:
        d = {"index": self.index, "name": self.name, "config": self.config, "error": self.error}
        d["runs"] = [asdict(r) for r in self.runs]
        for key in ("err", "mae", "iterations", "seconds"):
            mean, std = self.stat(key)
            d[f"{key}_mean"] = None if np.isnan(mean) else mean
            d[f"{key}_std"] = None if np.isnan(std) else std
        return d


def run_seed(cfg: ExperimentConfig, seed: int, **param_overrides) -> SeedRun:
    clean, noisy = make_observation(cfg, seed)
    t0 = time.perf_counter()
    result = midal_solve(noisy, cfg.solver_params(**param_overrides))
    seconds = time.perf_counter() - t0
    rep = evaluate(result.estimate, clean)
    constraint = result.trace.column("constraint_sq")
    return SeedRun(
        seed=seed,
        err=rep.err,
        mae=rep.mae,
        mse=rep.mse,
        iterations=result.iterations,
        seconds=seconds,
        converged=result.converged,
        constraint_first=float(constraint[0]),
        constraint_last=float(constraint[-1]),
    )


def run_experiment(cfg: ExperimentConfig, n_seeds: int = 1) -> BenchmarkRow:
    """Run ``cfg`` on seeds ``cfg.seed .. cfg.seed + n_seeds - 1``.

    A failure is recorded on the row instead of being raised.
    """
    row = BenchmarkRow(index=cfg.index, name=cfg.name, config=cfg.to_dict())
    try:
        for i in range(n_seeds):
            run = run_seed(cfg, cfg.seed + i)
            log.info("%s seed=%d err=%.4f mae=%.4g iter=%d", cfg.name, run.seed, run.err, run.mae, run.iterations)
            row.runs.append(run)
    except Exception as exc:  # noqa: BLE001 - rows fail independently
        log.warning("%s failed: %s", cfg.name, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_benchmark(configs: list[ExperimentConfig], n_seeds: int = 1) -> list[BenchmarkRow]:
    ordered = sorted(configs, key=lambda c: (c.index is None, c.index or 0))
    return [run_experiment(cfg, n_seeds) for cfg in ordered]


def format_table(rows: list[BenchmarkRow]) -> str:
    header = f"{'#':>3}  {'name':<22} {'Err':>15} {'MAE':>17} {'Iter':>11} {'Time[s]':>8}  {'ref Err/MAE/Iter':<20}"
    lines = [header, "-" * len(header)]
    for row in rows:
        idx = "" if row.index is None else str(row.index)
        if row.error:
            lines.append(f"{idx:>3}  {row.name:<22} FAILED: {row.error}")
            continue
        em, es = row.stat("err")
        mm, ms = row.stat("mae")
        im, is_ = row.stat("iterations")
        tm, _ = row.stat("seconds")
        cfg = row.config
        ref = "/".join("-" if cfg.get(k) is None else f"{cfg[k]:g}" for k in ("ref_err", "ref_mae", "ref_iter"))
        lines.append(
            f"{idx:>3}  {row.name:<22} {em:7.4f}±{es:<7.4f} {mm:8.4g}±{ms:<8.3g} {im:5.1f}±{is_:<5.1f} {tm:8.2f}  {ref:<20}"
        )
    return "\n".join(lines)
