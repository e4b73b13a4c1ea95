"""Noise and group-count sweeps comparing SPAHM with k-means baselines."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..fusion import FusionConfig, as_groups, fuse, initial_hyper
from .generate import SimInstance, SimSpec, generate
from .kmeans import baseline_match_kmeans, baseline_pooled, kmeans
from .metrics import hausdorff, rel_error

CSV_FIELDS = ("sweep_var", "value", "repetition", "method", "hausdorff", "L_est",
              "mu0_relerr", "sigma0sq_relerr", "sigmasq_relerr", "wall_ms")
METHODS = ("spahm", "spahm_oracle", "kmeans_matching", "kmeans_pooled")
SWEEP_VARS = ("sigma", "J")
DEFAULT_GRIDS = {
    "sigma": (0.05, 0.1, 0.2, 0.3, 0.5, 0.8),  # sigma / sigma0
    "J": (5, 10, 20, 40),
}


@dataclass(frozen=True)
class SweepConfig:
    kmeans_restarts: int = 3
    alpha: float = 1.0
    gamma0: float = 1.0
    fusion: FusionConfig = field(default_factory=lambda: FusionConfig(max_outer=50))
    record_timing: bool = False


def cell_spec(base: SimSpec, sweep_var: str, value: float, seed: int) -> SimSpec:
    """Generator settings for one sweep cell.

    For ``sigma`` the value is the ratio sigma / sigma0; for ``J`` it is the
    number of groups (sigma^2 stays at the base value).
    """
    if sweep_var == "sigma":
        return base.replace(sigma_sq=(value * math.sqrt(base.sigma0_sq)) ** 2, seed=seed)
    if sweep_var == "J":
        if value != int(value) or value < 1:
            raise ValueError(f"J must be a positive integer, got {value}")
        return base.replace(J=int(value), seed=seed)
    raise ValueError(f"sweep_var must be one of {SWEEP_VARS}")


def _hyper_errors(hyper, spec: SimSpec) -> dict:
    return {
        "mu0_relerr": rel_error(hyper.mu0, spec.mu0_vector()),
        "sigma0sq_relerr": rel_error(hyper.sigma0_sq, spec.sigma0_sq),
        "sigmasq_relerr": rel_error(hyper.sigma_sq, spec.sigma_sq) if spec.sigma_sq > 0 else math.nan,
    }


def evaluate_methods(inst: SimInstance, seeds: np.random.SeedSequence, config: SweepConfig) -> list[dict]:
    """Run all four methods on one instance; returns one row per method."""
    spec = inst.spec
    restarts = config.kmeans_restarts
    k_seed, spahm_seed, oracle_seed, match_seed, pool_seed = (
        int(s.generate_state(1)[0]) for s in seeds.spawn(5))
    rows = []

    def timed(fn):
        t0 = time.perf_counter()
        out = fn()
        return out, (time.perf_counter() - t0) * 1e3

    def local_fits():
        # local k uses each group's true atom count
        ss = np.random.SeedSequence(k_seed).spawn(spec.J)
        return [kmeans(points, size, s, restarts).centroids
                for (points, _), size, s in zip(inst.raw_data, inst.group_sizes, ss)]

    local_est, local_ms = timed(local_fits)

    def run_spahm(atom_sets, seed):
        cfg = replace(config.fusion, seed=seed)
        h0 = initial_hyper(as_groups(atom_sets), config.alpha, config.gamma0)
        return fuse(atom_sets, cfg, h0)

    res, ms = timed(lambda: run_spahm(local_est, spahm_seed))
    rows.append({"method": "spahm", "hausdorff": hausdorff(res.global_atoms, inst.true_global),
                 "L_est": res.n_global, **_hyper_errors(res.hyper, spec), "wall_ms": ms + local_ms})
    res, ms = timed(lambda: run_spahm(inst.local_atoms, oracle_seed))
    rows.append({"method": "spahm_oracle", "hausdorff": hausdorff(res.global_atoms, inst.true_global),
                 "L_est": res.n_global, **_hyper_errors(res.hyper, spec), "wall_ms": ms})
    # with few groups there may be fewer local centroids than true atoms
    k_match = min(spec.L_true, sum(inst.group_sizes))
    cents, ms = timed(lambda: baseline_match_kmeans(local_est, k_match, match_seed, restarts))
    rows.append({"method": "kmeans_matching", "hausdorff": hausdorff(cents, inst.true_global),
                 "L_est": k_match, "wall_ms": ms + local_ms})
    cents, ms = timed(lambda: baseline_pooled([p for p, _ in inst.raw_data], spec.L_true, pool_seed, restarts))
    rows.append({"method": "kmeans_pooled", "hausdorff": hausdorff(cents, inst.true_global),
                 "L_est": spec.L_true, "wall_ms": ms})
    return rows


def _run_cell(args):
    base, sweep_var, value, rep, cell, seed, config = args
    seeds = np.random.SeedSequence(seed, spawn_key=(cell,))
    gen_seed, method_seeds = seeds.spawn(2)
    spec = cell_spec(base, sweep_var, value, int(gen_seed.generate_state(1)[0]))
    if spec.points_per_atom < 1:
        raise ValueError("sweeps need raw data (points_per_atom >= 1)")
    rows = evaluate_methods(generate(spec), method_seeds, config)
    for row in rows:
        row.update(sweep_var=sweep_var, value=value, repetition=rep)
        if not config.record_timing:
            row["wall_ms"] = None
    return rows


def run_sweep(base_spec: SimSpec, sweep_var: str, values, repetitions: int, seed: int = 0,
              config: SweepConfig | None = None, workers: int = 1) -> list[dict]:
    """Every (value, repetition) cell gets its own RNG stream derived from ``(seed, cell)``."""
    if sweep_var not in SWEEP_VARS:
        raise ValueError(f"sweep_var must be one of {SWEEP_VARS}")
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    config = config or SweepConfig()
    tasks = []
    for vi, value in enumerate(values):
        for rep in range(repetitions):
            cell = vi * repetitions + rep
            tasks.append((base_spec, sweep_var, value, rep, cell, seed, config))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    return [row for rows in results for row in rows]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(row.get(name)) for name in CSV_FIELDS])
    return buf.getvalue()


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and standard error of Hausdorff distance and recovered L per (value, method)."""
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault((row["sweep_var"], row["value"], row["method"]), []).append(row)
    out = []
    for (var, value, method), group in cells.items():
        entry = {"sweep_var": var, "value": value, "method": method, "n": len(group)}
        for name in ("hausdorff", "L_est"):
            x = np.array([r[name] for r in group], dtype=np.float64)
            entry[f"{name}_mean"] = float(x.mean())
            entry[f"{name}_se"] = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        out.append(entry)
    return out
