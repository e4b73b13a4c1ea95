"""Conjugate exponential-family base measures.

A family supplies the local-parameter density ``h(v) exp(theta.T(v) - A(theta))``
and the log normaliser ``log H(tau, n0)`` of its conjugate prior
``H(tau, n0) exp(tau.theta - n0 A(theta))``. Fusion only ever touches a family
through :meth:`suff_stat`, :meth:`log_H`, :func:`posterior_nat` and
:meth:`theta_map`; ``A`` itself is never evaluated.

Only the isotropic Gaussian family is implemented.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NaturalParams:
    """Natural parameter ``tau`` and pseudo-count ``n0`` of a conjugate prior."""

    tau: np.ndarray
    n0: float

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.tau, dtype=np.float64))
        if tau.ndim != 1:
            raise ValueError("tau must be a vector")
        if not np.all(np.isfinite(tau)):
            raise ValueError("tau must be finite")
        if not self.n0 > 0:
            raise ValueError(f"n0 must be positive, got {self.n0}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "n0", float(self.n0))


@dataclass(frozen=True)
class SufficientStat:
    """``T(v)`` together with ``log h(v)``."""

    t: np.ndarray
    log_h: float


class ExponentialFamily(Protocol):
    dim: int

    def suff_stat(self, v) -> SufficientStat: ...

    def log_H(self, params: NaturalParams) -> float: ...

    def theta_map(self, params: NaturalParams, stats: Sequence[SufficientStat]) -> np.ndarray: ...


@dataclass(frozen=True)
class GaussianFamily:
    """Isotropic Gaussian ``v | theta ~ N(theta, sigma2 I_d)``."""

    sigma2: float
    dim: int

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")

    def _check(self, v) -> np.ndarray:
        v = np.atleast_1d(np.asarray(v, dtype=np.float64))
        if v.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("atom contains non-finite entries")
        return v

    def suff_stat(self, v) -> SufficientStat:
        v = self._check(v)
        s2 = self.sigma2
        log_h = float(np.sum(-(v**2) / (2.0 * s2)) - 0.5 * self.dim * (math.log(s2) + LOG_2PI))
        return SufficientStat(v / s2, log_h)

    def log_H(self, params: NaturalParams) -> float:
        tau = params.tau
        if tau.shape != (self.dim,):
            raise ValueError(f"tau has length {tau.size}, family dimension is {self.dim}")
        n0 = params.n0
        quad = float(np.dot(tau, tau)) * self.sigma2 / (2.0 * n0)
        return -quad + 0.5 * self.dim * (math.log(n0) - math.log(self.sigma2) - LOG_2PI)

    def theta_map(self, params: NaturalParams, stats: Sequence[SufficientStat] = ()) -> np.ndarray:
        """Posterior mean of the global atom given the assigned local atoms."""
        post = posterior_nat(params, stats)
        return post.tau * self.sigma2 / post.n0

    # Vectorised forms used by the fast cost path and the objective.

    def log_h_batch(self, atoms: np.ndarray) -> np.ndarray:
        atoms = np.asarray(atoms, dtype=np.float64)
        s2 = self.sigma2
        return np.sum(-(atoms**2), axis=-1) / (2.0 * s2) - 0.5 * self.dim * (math.log(s2) + LOG_2PI)

    def log_H_batch(self, tau: np.ndarray, n0) -> np.ndarray:
        """``log H`` for a stack of natural parameters; ``tau`` has shape (..., d)."""
        tau = np.asarray(tau, dtype=np.float64)
        n0 = np.asarray(n0, dtype=np.float64)
        quad = np.sum(tau * tau, axis=-1) * self.sigma2 / (2.0 * n0)
        return -quad + 0.5 * self.dim * (np.log(n0) - math.log(self.sigma2) - LOG_2PI)


def posterior_nat(params: NaturalParams, stats: Sequence[SufficientStat]) -> NaturalParams:
    """Conjugate update ``(tau + sum T(v), n0 + count)``."""
    tau = params.tau.copy()
    for s in stats:
        t = np.atleast_1d(np.asarray(s.t, dtype=np.float64))
        if t.shape != tau.shape:
            raise ValueError(f"statistic has length {t.size}, expected {tau.size}")
        tau += t
    return NaturalParams(tau, params.n0 + len(stats))


def gaussian_natural(mu0, sigma0_sq: float, sigma_sq: float) -> NaturalParams:
    """Prior ``N(mu0, sigma0_sq I)`` expressed as ``tau = mu0/sigma0_sq, n0 = sigma_sq/sigma0_sq``."""
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=np.float64))
    return NaturalParams(mu0 / sigma0_sq, sigma_sq / sigma0_sq)
