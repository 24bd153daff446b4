"""Command-line entry points.

``craft`` fits one configuration (or a sweep of them) to a CSV file and
writes the result as JSON.  ``craft-synth`` writes a planted-subspace
dataset in the same CSV + schema format.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .baselines import binary_entropy_fit, dpmeans_fit, dprf_fit, one_hot
from .data import DEFAULT_MAX_ITERS, DEFAULT_SIGMA_MIN, DEFAULT_SMOOTHING, Dataset, Hyperparams
from .engine import craft_fit_best
from .errors import ConfigError, CraftError
from .io import atomic_write_text, emit, read_csv, read_schema
from .lambda_select import (
    MEAN,
    BinaryEntropyCost,
    CraftSingletonCost,
    SquaredEuclidean,
    farthest_first_lambda,
)
from .metrics import nmi, purity
from .synth import PRESETS, SubspaceSpec, generate, preset

ALGORITHMS = ("craft", "dpmeans", "dpmeans-r", "dprf", "binary-entropy")
SWEEP_KEYS = ("m", "eps_c", "eps_v", "seed")
DEFAULT_M = 0.5


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    hp: Hyperparams
    lam: Optional[float] = None
    target_k: Optional[int] = None
    probe: str = "expected"
    one_hot: bool = False
    restarts: int = 1

    def __post_init__(self):
        if (self.lam is None) == (self.target_k is None):
            raise ConfigError("give exactly one of --lambda and --target-k")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.restarts < 1:
            raise ConfigError("--restarts must be at least 1")
        if self.restarts > 1 and self.algorithm != "craft":
            raise ConfigError("--restarts applies to the craft algorithm only")


def _probe(cfg: RunConfig, data: Dataset):
    if cfg.algorithm == "craft":
        share = cfg.hp.m if cfg.probe == "expected" else 1.0
        return CraftSingletonCost(cfg.hp.smoothing, mask_share=share)
    if cfg.algorithm == "binary-entropy":
        return BinaryEntropyCost(cfg.hp.smoothing)
    return SquaredEuclidean()


def resolve_lambda(cfg: RunConfig, data: Dataset) -> float:
    if cfg.lam is not None:
        return float(cfg.lam)
    init = MEAN if cfg.algorithm == "dpmeans" else "random"
    return farthest_first_lambda(data, cfg.target_k, _probe(cfg, data), init=init, seed=cfg.hp.seed)


def prepare(data: Dataset, cfg: RunConfig) -> Dataset:
    """Apply one-hot encoding when requested; DP-means style algorithms need it
    for categorical columns."""
    if cfg.one_hot:
        return one_hot(data)
    return data


def fit(data: Dataset, cfg: RunConfig):
    """Run the configured algorithm; returns ``(result, lambda_used)``."""
    lam = resolve_lambda(cfg, data)
    hp = replace(cfg.hp, lam=lam)
    alg = cfg.algorithm
    if alg == "craft":
        res = craft_fit_best(data, hp, cfg.restarts)
    elif alg == "dpmeans":
        res = dpmeans_fit(data, lam, init="mean", seed=hp.seed, max_iters=hp.max_iters)
    elif alg == "dpmeans-r":
        res = dpmeans_fit(data, lam, init="random", seed=hp.seed, max_iters=hp.max_iters)
    elif alg == "dprf":
        res = dprf_fit(data, lam, hp.m, hp.rho, seed=hp.seed, max_iters=hp.max_iters, sigma_min=hp.sigma_min)
    else:
        res = binary_entropy_fit(data, lam, seed=hp.seed, max_iters=hp.max_iters, smoothing=hp.smoothing)
    return res, lam


def result_document(res, lam: float, data: Dataset) -> dict:
    doc = {
        "algorithm": res.algorithm,
        "k": int(res.k),
        "assignments": [int(v) for v in res.assignments],
        "masks": res.masks.astype(int).tolist(),
        "objective": float(res.objective),
        "objective_trace": [float(v) for v in res.objective_trace],
        "iterations": int(res.iterations),
        "converged": bool(res.converged),
        "lambda_used": float(lam),
        "seed": int(res.seed),
        "features": list(data.schema.names),
    }
    if data.labels is not None:
        doc["metrics"] = {
            "purity": purity(res.assignments, data.labels),
            "nmi": nmi(res.assignments, data.labels),
        }
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def masks_csv(res, data: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.schema.names)
    writer.writerows(res.masks.astype(int).tolist())
    return buf.getvalue()


def run_one(data: Dataset, cfg: RunConfig, out: Optional[Path], masks_out: Optional[Path]) -> dict:
    res, lam = fit(data, cfg)
    doc = result_document(res, lam, data)
    if masks_out is not None:
        atomic_write_text(masks_out, masks_csv(res, data))
    if out is None:
        sys.stdout.write(dumps(doc))
    else:
        atomic_write_text(out, dumps(doc))
    return doc


# -- sweeps ------------------------------------------------------------------


def load_sweep(path) -> list:
    """Read a grid ``{"m": [...], "eps_c": [...], "eps_v": [...], "seed": [...]}``
    and expand it to a list of override dicts (cartesian product, keys in
    that fixed order)."""
    try:
        with open(path, encoding="utf-8") as fh:
            grid = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read sweep file {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sweep file {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep must be a nonempty JSON object")
    unknown = sorted(set(grid) - set(SWEEP_KEYS))
    if unknown:
        raise ConfigError(f"unknown sweep keys: {', '.join(unknown)}")
    keys = [k for k in SWEEP_KEYS if k in grid]
    for k in keys:
        if not isinstance(grid[k], list) or not grid[k]:
            raise ConfigError(f"sweep entry {k!r} must be a nonempty list")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def thread_count() -> int:
    raw = os.environ.get("CRAFT_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"CRAFT_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("CRAFT_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def run_sweep(data: Dataset, cfg: RunConfig, entries: list, out_dir: Path, masks_dir: Optional[Path]):
    """Fit every sweep entry concurrently; writes ``run_NNN.json`` per entry
    and an ``index.json`` mapping file names to their overrides."""
    configs = []
    for entry in entries:
        try:
            hp = replace(cfg.hp, **{k: v for k, v in entry.items()})
        except CraftError as exc:
            raise ConfigError(f"sweep entry {entry}: {exc}") from None
        configs.append(replace(cfg, hp=hp))
    width = max(3, len(str(len(configs) - 1)))
    names = [f"run_{i:0{width}d}" for i in range(len(configs))]

    def job(i):
        masks = masks_dir / f"{names[i]}.csv" if masks_dir is not None else None
        run_one(data, configs[i], out_dir / f"{names[i]}.json", masks)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        list(pool.map(job, range(len(configs))))
    index = [{"file": f"{n}.json", **e} for n, e in zip(names, entries)]
    atomic_write_text(out_dir / "index.json", dumps({"runs": index}))


# -- argument parsing --------------------------------------------------------


def _rho(value: str):
    return value if value == "auto" else float(value)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="craft",
        description="Cluster mixed categorical/numeric data with per-cluster feature selection.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--schema", required=True, help="schema JSON file")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="craft")
    lam = p.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=float, help="cluster penalty")
    lam.add_argument("--target-k", type=int, help="pick lambda by farthest-first traversal for this many clusters")
    p.add_argument("--m", type=float, default=DEFAULT_M, help="expected share of selected features")
    p.add_argument("--rho", type=_rho, default="auto", help='prior variance of selection, or "auto"')
    p.add_argument("--mode", choices=("fixed", "approx"), default="fixed", help="feature budget")
    p.add_argument("--eps-c", type=float, default=None, help="categorical gain threshold (approx mode)")
    p.add_argument("--eps-v", type=float, default=None, help="numeric variance threshold (approx mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING)
    p.add_argument("--sigma-min", type=float, default=DEFAULT_SIGMA_MIN)
    p.add_argument("--restarts", type=int, default=1, help="craft only: keep the best of this many seeded runs")
    p.add_argument(
        "--probe",
        choices=("expected", "full"),
        default="expected",
        help="craft cost used by --target-k: expected over random masks with share m, or every feature selected",
    )
    p.add_argument("--one-hot", action="store_true", help="one-hot encode categorical columns first")
    p.add_argument("--out", help="result JSON path (a directory with --sweep); stdout if omitted")
    p.add_argument("--masks-out", help="mask matrix CSV path (a directory with --sweep)")
    p.add_argument("--sweep", help="JSON grid over m, eps_c, eps_v and seed")
    return p


def config_from_args(args) -> RunConfig:
    hp = Hyperparams(
        lam=0.0 if args.lam is None else args.lam,
        m=args.m,
        rho=args.rho,
        mode=args.mode,
        eps_c=args.eps_c,
        eps_v=args.eps_v,
        smoothing=args.smoothing,
        sigma_min=args.sigma_min,
        max_iters=args.max_iters,
        seed=args.seed,
    )
    return RunConfig(
        algorithm=args.algorithm,
        hp=hp,
        lam=args.lam,
        target_k=args.target_k,
        probe=args.probe,
        one_hot=args.one_hot,
        restarts=args.restarts,
    )


def _fail(exc: Exception, code: int) -> int:
    payload = exc.to_dict() if isinstance(exc, CraftError) else {"error": "io_error", "message": str(exc)}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        data = prepare(read_csv(args.data, read_schema(args.schema)), cfg)
        if args.sweep:
            entries = load_sweep(args.sweep)
            if not args.out:
                raise ConfigError("--sweep needs --out naming an output directory")
            out_dir = Path(args.out)
            masks_dir = Path(args.masks_out) if args.masks_out else None
            run_sweep(data, cfg, entries, out_dir, masks_dir)
        else:
            run_one(
                data,
                cfg,
                Path(args.out) if args.out else None,
                Path(args.masks_out) if args.masks_out else None,
            )
    except CraftError as exc:
        return _fail(exc, 1)
    except OSError as exc:
        return _fail(exc, 1)
    return 0


def synth_main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="craft-synth", description="Write a planted-subspace dataset.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--spec", help="JSON file with SubspaceSpec fields")
    p.add_argument("--seed", type=int, default=None, help="replaces the seed given by --spec or --preset")
    p.add_argument("--data", required=True, help="output CSV path")
    p.add_argument("--schema", required=True, help="output schema JSON path")
    p.add_argument("--masks-out", help="optional CSV of planted masks")
    args = p.parse_args(argv)
    try:
        spec = preset(args.preset) if args.preset else SubspaceSpec.from_json(args.spec)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        data, _, masks = generate(spec)
        emit(data, args.data, args.schema)
        if args.masks_out:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(data.schema.names)
            writer.writerows(np.asarray(masks, dtype=int).tolist())
            atomic_write_text(args.masks_out, buf.getvalue())
    except CraftError as exc:
        return _fail(exc, 1)
    except OSError as exc:
        return _fail(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
