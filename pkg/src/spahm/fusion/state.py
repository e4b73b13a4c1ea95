from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..base_measure import GaussianFamily, NaturalParams, gaussian_natural


class StateError(ValueError):
    """A global state violates the one-to-one matching constraints."""


@dataclass(frozen=True)
class LocalGroup:
    """Parameter set of one local model: ``atoms`` has shape (L_j, d)."""

    group_id: int
    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if atoms.ndim != 2 or atoms.shape[0] < 1:
            raise ValueError(f"group {self.group_id}: need at least one atom, got shape {atoms.shape}")
        if not np.all(np.isfinite(atoms)):
            raise ValueError(f"group {self.group_id}: atoms must be finite")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]


def as_groups(atom_sets: Sequence) -> list[LocalGroup]:
    """Wrap raw arrays as groups numbered 0..J-1 (existing groups pass through)."""
    groups = [a if isinstance(a, LocalGroup) else LocalGroup(j, a) for j, a in enumerate(atom_sets)]
    if not groups:
        raise ValueError("need at least one group")
    dims = {g.dim for g in groups}
    if len(dims) != 1:
        raise ValueError(f"groups have mixed atom dimensions {sorted(dims)}")
    return groups


@dataclass(frozen=True)
class GaussianHyper:
    mu0: np.ndarray
    sigma0_sq: float
    sigma_sq: float
    alpha: float = 1.0
    gamma0: float = 1.0

    def __post_init__(self):
        mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=np.float64))
        object.__setattr__(self, "mu0", mu0)
        for name in ("sigma0_sq", "sigma_sq", "alpha", "gamma0"):
            value = float(getattr(self, name))
            if not (value > 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)
        if not np.all(np.isfinite(mu0)):
            raise ValueError("mu0 must be finite")

    @property
    def dim(self) -> int:
        return self.mu0.size

    def family(self) -> GaussianFamily:
        return GaussianFamily(self.sigma_sq, self.dim)

    def natural(self) -> NaturalParams:
        return gaussian_natural(self.mu0, self.sigma0_sq, self.sigma_sq)

    def replace(self, **changes) -> "GaussianHyper":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "mu0": self.mu0.tolist(),
            "sigma0_sq": self.sigma0_sq,
            "sigma_sq": self.sigma_sq,
            "alpha": self.alpha,
            "gamma0": self.gamma0,
        }


@dataclass(frozen=True)
class GlobalState:
    """Matching of every placed local atom to a global atom.

    ``assignments[j][l]`` is the global index of atom ``l`` of group ``j``;
    ``None`` marks a group that is not currently placed (during the initial
    pass, or while it is being re-matched). Global indices run over
    ``0..n_global-1`` and every index is used by at least one placed atom.
    """

    groups: tuple[LocalGroup, ...]
    assignments: tuple[np.ndarray | None, ...]
    n_global: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def empty(cls, groups: Sequence[LocalGroup]) -> "GlobalState":
        groups = tuple(as_groups(groups))
        return cls(groups, (None,) * len(groups), 0)

    @classmethod
    def from_assignments(cls, groups: Sequence[LocalGroup], assignments) -> "GlobalState":
        """Build a state from arbitrary global labels, relabelled to 0..L-1."""
        groups = tuple(as_groups(groups))
        labels = sorted({int(x) for a in assignments if a is not None for x in np.asarray(a)})
        remap = {old: new for new, old in enumerate(labels)}
        new = tuple(
            None if a is None else np.array([remap[int(x)] for x in np.asarray(a)], dtype=np.int64)
            for a in assignments
        )
        state = cls(groups, new, len(labels))
        state.validate()
        return state

    @property
    def J(self) -> int:
        return len(self.groups)

    @property
    def dim(self) -> int:
        return self.groups[0].dim

    @property
    def placed(self) -> list[int]:
        return [j for j, a in enumerate(self.assignments) if a is not None]

    @property
    def complete(self) -> bool:
        return all(a is not None for a in self.assignments)

    def membership(self) -> np.ndarray:
        """Binary (J, L) matrix: group j holds an atom of global i."""
        if "b" not in self._cache:
            b = np.zeros((self.J, self.n_global), dtype=bool)
            for j, a in enumerate(self.assignments):
                if a is not None:
                    b[j, a] = True
            self._cache["b"] = b
        return self._cache["b"]

    def counts(self) -> np.ndarray:
        """``m_i``: number of placed groups (equivalently atoms) matched to global i."""
        return self.membership().sum(axis=0)

    def atom_sums(self) -> np.ndarray:
        """Per global atom, the sum of its assigned local atoms; shape (L, d)."""
        if "sums" not in self._cache:
            sums = np.zeros((self.n_global, self.dim))
            for g, a in zip(self.groups, self.assignments):
                if a is not None:
                    sums[a] += g.atoms  # indices within a group are distinct
            self._cache["sums"] = sums
        return self._cache["sums"]

    def atom_sq_sums(self) -> np.ndarray:
        sq = np.zeros((self.n_global, self.dim))
        for g, a in zip(self.groups, self.assignments):
            if a is not None:
                sq[a] += g.atoms**2
        return sq

    def members(self, i: int) -> list[tuple[int, int]]:
        """The index set ``Z_i`` of (group, local index) pairs."""
        out = []
        for j, a in enumerate(self.assignments):
            if a is not None:
                out.extend((j, int(l)) for l in np.flatnonzero(a == i))
        return out

    def n_local(self) -> int:
        return sum(g.size for g, a in zip(self.groups, self.assignments) if a is not None)

    def validate(self) -> None:
        if len(self.assignments) != len(self.groups):
            raise StateError("one assignment vector per group required")
        used = np.zeros(self.n_global, dtype=bool)
        for g, a in zip(self.groups, self.assignments):
            if a is None:
                continue
            if a.shape != (g.size,):
                raise StateError(f"group {g.group_id}: expected {g.size} assignments, got {a.shape}")
            if a.size and (a.min() < 0 or a.max() >= self.n_global):
                raise StateError(f"group {g.group_id}: global index out of range")
            if np.unique(a).size != a.size:
                raise StateError(f"group {g.group_id}: two local atoms share a global atom")
            used[a] = True
        if not used.all():
            raise StateError(f"global atoms {np.flatnonzero(~used).tolist()} have no assigned atoms")

    def lift(self, j: int) -> "GlobalState":
        """Remove group ``j``'s matches and prune global atoms left empty."""
        assignments = list(self.assignments)
        assignments[j] = None
        keep = np.zeros(self.n_global, dtype=bool)
        for a in assignments:
            if a is not None:
                keep[a] = True
        remap = np.cumsum(keep) - 1
        new = tuple(None if a is None else remap[a] for a in assignments)
        return GlobalState(self.groups, new, int(keep.sum()))

    def place(self, j: int, local_to_global: np.ndarray, n_global: int) -> "GlobalState":
        assignments = list(self.assignments)
        assignments[j] = np.asarray(local_to_global, dtype=np.int64)
        return GlobalState(self.groups, tuple(assignments), n_global)

    def canonical(self) -> "GlobalState":
        """Relabel global atoms in order of first appearance (group order, then local index)."""
        order: dict[int, int] = {}
        for a in self.assignments:
            if a is not None:
                for x in a:
                    order.setdefault(int(x), len(order))
        new = tuple(
            None if a is None else np.array([order[int(x)] for x in a], dtype=np.int64)
            for a in self.assignments
        )
        return GlobalState(self.groups, new, self.n_global)

    def partition(self) -> frozenset:
        """Label-free view: the set of clusters, each a frozenset of (group, local) pairs."""
        clusters: dict[int, set] = {}
        for j, a in enumerate(self.assignments):
            if a is not None:
                for l, i in enumerate(a):
                    clusters.setdefault(int(i), set()).add((j, l))
        return frozenset(frozenset(c) for c in clusters.values())
