from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SimSpec:
    """Generator settings for the synthetic fusion benchmark.

    Global atoms are drawn from ``N(mu0, sigma0_sq I)``; each group keeps each
    atom independently with probability ``subset_prob`` and perturbs it with
    ``N(0, sigma_sq I)`` noise. ``points_per_atom`` raw points with unit
    variance are then drawn around every local atom (0 skips raw data).
    """

    L_true: int = 50
    d: int = 50
    J: int = 20
    mu0: float = 1.0
    sigma0_sq: float = 25.0
    sigma_sq: float = 1.0
    subset_prob: float = 0.5
    points_per_atom: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.L_true < 1 or self.d < 1 or self.J < 1:
            raise ValueError("L_true, d and J must be positive")
        if not 0 < self.subset_prob <= 1:
            raise ValueError("subset_prob must lie in (0, 1]")
        if not (self.sigma0_sq > 0 and self.sigma_sq >= 0):
            raise ValueError("sigma0_sq must be positive and sigma_sq non-negative")
        if self.points_per_atom < 0:
            raise ValueError("points_per_atom must be non-negative")

    def replace(self, **changes) -> "SimSpec":
        return replace(self, **changes)

    def mu0_vector(self) -> np.ndarray:
        return np.full(self.d, float(self.mu0))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SimInstance:
    spec: SimSpec
    true_global: np.ndarray  # (L_true, d)
    local_atoms: list[np.ndarray]  # per group, (L_j, d)
    true_assignments: list[np.ndarray]  # per group, global index of each local atom
    raw_data: list[tuple[np.ndarray, np.ndarray]] | None  # per group, (points, component labels)

    @property
    def group_sizes(self) -> list[int]:
        return [a.shape[0] for a in self.local_atoms]


def generate(spec: SimSpec) -> SimInstance:
    rng = np.random.default_rng(spec.seed)
    theta = spec.mu0_vector() + np.sqrt(spec.sigma0_sq) * rng.standard_normal((spec.L_true, spec.d))
    noise_sd = np.sqrt(spec.sigma_sq)

    local_atoms, assignments, raw = [], [], []
    for _ in range(spec.J):
        included = np.flatnonzero(rng.random(spec.L_true) < spec.subset_prob)
        while included.size == 0:
            included = np.flatnonzero(rng.random(spec.L_true) < spec.subset_prob)
        order = rng.permutation(included)
        atoms = theta[order] + noise_sd * rng.standard_normal((order.size, spec.d))
        local_atoms.append(atoms)
        assignments.append(order.astype(np.int64))
        if spec.points_per_atom:
            labels = np.repeat(np.arange(order.size), spec.points_per_atom)
            labels = rng.permutation(labels)
            points = atoms[labels] + rng.standard_normal((labels.size, spec.d))
            raw.append((points, labels))
    return SimInstance(spec, theta, local_atoms, assignments, raw if spec.points_per_atom else None)
