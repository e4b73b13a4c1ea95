from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .. import lsap
from .cost import COST_PATHS, build_cost
from .hypers import HYPER_NAMES, hyper_step
from .objective import eval_objective
from .state import GaussianHyper, GlobalState, LocalGroup, as_groups

log = logging.getLogger(__name__)

MONOTONE_RTOL = 1e-8


class MonotonicityError(RuntimeError):
    """A fusion step lowered the objective beyond tolerance."""


@dataclass(frozen=True)
class FusionConfig:
    """Settings for :func:`fuse`.

    ``inner`` is the number of group re-matches per outer iteration (``None``
    means one per group on average). ``fixed_hypers`` lists hyperparameters
    that keep their initial values when ``learn_hypers`` is on.
    """

    inner: int | None = None
    max_outer: int = 100
    tol: float = 1e-6
    seed: int = 0
    learn_hypers: bool = True
    fixed_hypers: tuple[str, ...] = ()
    cost_path: str = "gaussian"
    rank_penalty: bool = False
    refine_hypers: bool = True
    certify: bool = False
    backend: str | None = None

    def __post_init__(self):
        if self.inner is not None and self.inner < 1:
            raise ValueError("inner must be >= 1")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.cost_path not in COST_PATHS:
            raise ValueError(f"cost_path must be one of {COST_PATHS}")
        bad = set(self.fixed_hypers) - set(HYPER_NAMES)
        if bad:
            raise ValueError(f"unknown hyperparameters in fixed_hypers: {sorted(bad)}")
        object.__setattr__(self, "fixed_hypers", tuple(self.fixed_hypers))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TraceEntry:
    step: int
    kind: str  # "init", "match" or "hyper"
    group: int | None
    objective: float


@dataclass
class FusionTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def record(self, kind: str, group: int | None, objective: float) -> TraceEntry:
        entry = TraceEntry(len(self.entries), kind, group, float(objective))
        self.entries.append(entry)
        return entry

    @property
    def objectives(self) -> np.ndarray:
        return np.array([e.objective for e in self.entries])

    def violations(self, rtol: float = MONOTONE_RTOL) -> list[TraceEntry]:
        """Entries whose objective fell below the previous one beyond tolerance."""
        out = []
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.objective < prev.objective - rtol * (1.0 + abs(prev.objective)):
                out.append(cur)
        return out

    def is_monotone(self, rtol: float = MONOTONE_RTOL) -> bool:
        return not self.violations(rtol)

    def __len__(self):
        return len(self.entries)


@dataclass
class FusionResult:
    state: GlobalState
    global_atoms: np.ndarray
    hyper: GaussianHyper
    trace: FusionTrace
    converged: bool
    n_outer: int

    @property
    def n_global(self) -> int:
        return self.state.n_global

    @property
    def assignments(self) -> list[np.ndarray]:
        return list(self.state.assignments)


def match_group(state: GlobalState, j: int, hyper: GaussianHyper, cost_path: str = "gaussian",
                rank_penalty: bool = False, backend: str | None = None) -> GlobalState:
    """Re-match group ``j`` against all other placed groups (one Hungarian step)."""
    lifted = state.lift(j) if state.assignments[j] is not None else state
    cost = build_cost(lifted, j, hyper, cost_path, rank_penalty)
    rows = lsap.solve_min(cost, backend=backend).col_to_row
    L_rem = lifted.n_global
    new_slots = np.unique(rows[rows >= L_rem])
    local_to_global = rows.copy()
    if new_slots.size:
        rank = np.searchsorted(new_slots, rows[rows >= L_rem])
        local_to_global[rows >= L_rem] = L_rem + rank
    return lifted.place(j, local_to_global, L_rem + new_slots.size)


def global_atoms(state: GlobalState, hyper: GaussianHyper) -> np.ndarray:
    """Posterior-mean estimate of every global atom, shape (L, d)."""
    m = state.counts().astype(np.float64)[:, None]
    s2, s02 = hyper.sigma_sq, hyper.sigma0_sq
    return (hyper.mu0 * s2 + s02 * state.atom_sums()) / (s2 + m * s02)


def initial_hyper(groups: Sequence[LocalGroup], alpha: float = 1.0, gamma0: float = 1.0) -> GaussianHyper:
    """Data-driven starting point: pooled mean and variance of all local atoms."""
    atoms = np.vstack([g.atoms for g in groups])
    mu0 = atoms.mean(axis=0)
    var = float(atoms.var(axis=0).mean()) if atoms.shape[0] > 1 else 0.0
    if not var > 0:
        var = 1.0
    return GaussianHyper(mu0, var, 0.1 * var, alpha, gamma0)


def _same_partition(a: GlobalState, b: GlobalState) -> bool:
    ca, cb = a.canonical(), b.canonical()
    return ca.n_global == cb.n_global and all(
        np.array_equal(x, y) for x, y in zip(ca.assignments, cb.assignments))


def fuse(groups: Sequence, config: FusionConfig | None = None,
         init_hyper: GaussianHyper | None = None) -> FusionResult:
    """Match local atom sets into a global set of inferred size.

    Groups are first placed one at a time in a seeded random order. Each outer
    iteration then re-matches ``inner`` uniformly drawn groups and, if
    ``learn_hypers``, updates the hyperparameters. The run stops once an outer
    iteration changes the objective by less than ``tol`` and every group has
    been re-matched without effect since the last change, or after
    ``max_outer`` iterations.
    """
    config = config or FusionConfig()
    groups = as_groups(groups)
    J = len(groups)
    if init_hyper is None:
        if not config.learn_hypers:
            raise ValueError("init_hyper is required when hyperparameters are not learned")
        init_hyper = initial_hyper(groups)
    if init_hyper.dim != groups[0].dim:
        raise ValueError(f"mu0 has dimension {init_hyper.dim}, atoms have {groups[0].dim}")
    hyper = init_hyper
    inner = config.inner or J
    rng = np.random.default_rng(config.seed)
    trace = FusionTrace()

    def objective(s, h):
        return eval_objective(s, h, config.rank_penalty)

    def check(entry):
        entries = trace.entries
        if len(entries) < 2:
            return
        prev = entries[-2].objective
        if entry.objective < prev - MONOTONE_RTOL * (1.0 + abs(prev)):
            msg = (f"objective decreased at step {entry.step} ({entry.kind}, group {entry.group}): "
                   f"{prev!r} -> {entry.objective!r}")
            if config.certify:
                raise MonotonicityError(msg)
            log.warning(msg)

    def match(s, j):
        return match_group(s, j, hyper, config.cost_path, config.rank_penalty, config.backend)

    state = GlobalState.empty(groups)
    for j in rng.permutation(J):
        state = match(state, int(j))
    current = objective(state, hyper)
    trace.record("init", None, current)

    converged = False
    settled: set[int] = set()
    n_outer = 0
    for n_outer in range(1, config.max_outer + 1):
        start = current
        for _ in range(inner):
            j = int(rng.integers(J))
            new_state = match(state, j)
            if _same_partition(state, new_state):
                settled.add(j)
            else:
                settled = {j}
            state = new_state
            current = objective(state, hyper)
            check(trace.record("match", j, current))
        if config.learn_hypers:
            new_hyper = hyper_step(state, hyper, config.fixed_hypers, config.refine_hypers)
            new_value = objective(state, new_hyper)
            if new_value - current > config.tol:
                settled = set()
            hyper, current = new_hyper, new_value
            check(trace.record("hyper", None, current))
        log.debug("outer %d: L=%d objective=%.6f", n_outer, state.n_global, current)
        if abs(current - start) < config.tol and len(settled) == J:
            converged = True
            break

    state.validate()
    return FusionResult(state, global_atoms(state, hyper), hyper, trace, converged, n_outer)
