"""Gaussian hyperparameter estimation for fixed assignments."""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.optimize import minimize

from .objective import data_log_marginal
from .state import GaussianHyper, GlobalState

SIGMA0_FLOOR = 1e-6  # sigma0^2 is clamped at SIGMA0_FLOOR * sigma^2
HYPER_NAMES = ("mu0", "sigma0_sq", "sigma_sq")


class DegenerateEstimateWarning(UserWarning):
    """A closed-form estimate was undefined and the previous value was kept."""


def _cluster_moments(state: GlobalState):
    m = state.counts().astype(np.float64)
    means = state.atom_sums() / m[:, None]
    within = 0.0
    for g, a in zip(state.groups, state.assignments):
        if a is not None:
            within += float(np.sum((g.atoms - means[a]) ** 2))
    return m, means, within


def estimate_hypers(state: GlobalState, previous: GaussianHyper) -> GaussianHyper:
    """Closed-form estimates of ``mu0``, ``sigma0^2`` and ``sigma^2`` given the matching.

    Each estimate is computed per coordinate and averaged over coordinates.
    ``alpha`` and ``gamma0`` are copied from ``previous``. When every global
    atom is a singleton ``sigma^2`` is not identifiable; the previous value is
    kept and a :class:`DegenerateEstimateWarning` is issued.
    """
    if not state.complete:
        raise ValueError("every group must be placed to estimate hyperparameters")
    m, means, within = _cluster_moments(state)
    L, d = means.shape
    N = state.n_local()

    mu0 = means.mean(axis=0)
    if N > L:
        sigma_sq = within / ((N - L) * d)
    else:
        warnings.warn("all global atoms are singletons; keeping previous sigma^2",
                      DegenerateEstimateWarning, stacklevel=2)
        sigma_sq = previous.sigma_sq
    if not sigma_sq > 0:
        warnings.warn("within-atom spread is zero; keeping previous sigma^2",
                      DegenerateEstimateWarning, stacklevel=2)
        sigma_sq = previous.sigma_sq
    spread = float(np.sum((means - mu0) ** 2)) / (L * d)
    sigma0_sq = spread - sigma_sq * float(np.sum(1.0 / m)) / L
    sigma0_sq = max(sigma0_sq, SIGMA0_FLOOR * sigma_sq)
    return previous.replace(mu0=mu0, sigma0_sq=sigma0_sq, sigma_sq=sigma_sq)


def data_objective(state: GlobalState, hyper: GaussianHyper) -> float:
    """The hyperparameter-dependent part of the objective."""
    return data_log_marginal(state, hyper.family(), hyper.natural())


def _profile_mu0(m, means, sigma0_sq, sigma_sq):
    w = m / (sigma_sq + m * sigma0_sq)
    return (w[:, None] * means).sum(axis=0) / w.sum()


def optimize_hypers(state: GlobalState, start: GaussianHyper, fixed=()) -> GaussianHyper:
    """Numerically maximise the exact marginal likelihood from ``start``.

    ``mu0`` is profiled out in closed form (a precision-weighted mean of atom
    means); the two variances are optimised on a log scale. Names in
    ``fixed`` keep their values from ``start``.
    """
    fixed = set(fixed)
    m, means, _ = _cluster_moments(state)
    singletons = state.n_local() == state.n_global
    free_s2 = "sigma_sq" not in fixed and not singletons
    free_s02 = "sigma0_sq" not in fixed
    if not (free_s2 or free_s02):
        if "mu0" in fixed:
            return start
        mu0 = _profile_mu0(m, means, start.sigma0_sq, start.sigma_sq)
        return start.replace(mu0=mu0)

    def unpack(x):
        k = 0
        s2 = start.sigma_sq
        if free_s2:
            s2 = math.exp(x[k])
            k += 1
        s02 = start.sigma0_sq
        if free_s02:
            s02 = s2 * math.exp(x[k])
        mu0 = start.mu0 if "mu0" in fixed else _profile_mu0(m, means, s02, s2)
        return start.replace(mu0=mu0, sigma0_sq=s02, sigma_sq=s2)

    def negative(x):
        try:
            return -data_objective(state, unpack(x))
        except (ValueError, OverflowError):
            return np.inf

    x0, bounds = [], []
    if free_s2:
        x0.append(math.log(start.sigma_sq))
        bounds.append((math.log(start.sigma_sq) - 30.0, math.log(start.sigma_sq) + 30.0))
    if free_s02:
        ratio = start.sigma0_sq / start.sigma_sq
        x0.append(math.log(max(ratio, SIGMA0_FLOOR)))
        bounds.append((math.log(SIGMA0_FLOOR), math.log(SIGMA0_FLOOR) + 60.0))
    res = minimize(negative, np.array(x0), method="L-BFGS-B", bounds=bounds)
    return unpack(res.x)


def hyper_step(state: GlobalState, hyper: GaussianHyper, fixed=(), refine: bool = True) -> GaussianHyper:
    """One hyperparameter update that never lowers the objective.

    Candidates are the closed-form estimates and, with ``refine``, their
    numerical polish; the best of these and the current values is returned.
    """
    fixed = set(fixed)
    unknown = fixed - set(HYPER_NAMES)
    if unknown:
        raise ValueError(f"unknown hyperparameter names {sorted(unknown)}")
    closed = estimate_hypers(state, hyper)
    closed = closed.replace(**{name: getattr(hyper, name) for name in fixed})
    if "sigma0_sq" not in fixed:
        # a pinned sigma^2 can move the floor
        closed = closed.replace(sigma0_sq=max(closed.sigma0_sq, SIGMA0_FLOOR * closed.sigma_sq))

    candidates = [hyper, closed]
    if refine:
        candidates.append(optimize_hypers(state, closed, fixed))
    scores = [data_objective(state, h) for h in candidates]
    best = int(np.argmax(scores))
    return candidates[best]
