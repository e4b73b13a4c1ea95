"""Cost matrices for re-matching one group against the rest.

Rows are candidate global slots: the ``L'`` global atoms that remain once the
group is lifted out, followed by ``L_j`` slots for brand-new atoms. Columns are
the group's local atoms. Entries are the *negated* per-assignment gain in the
log posterior of the assignments, so :func:`spahm.lsap.solve_min` maximises it.

The gain of putting local atom ``l`` into existing atom ``i`` is

    log m_i / (alpha + J - 1 - m_i)  -  [log H(post_i + T(v_l)) - log H(post_i)]

and into the ``r``-th new slot

    log alpha gamma0 / (alpha + J - 1)  [- log r]  -  [log H(prior + T(v_l)) - log H(prior)]

where ``J`` counts the placed groups plus the one being matched and ``m_i`` the
other groups sharing atom ``i``. The ``- log r`` ordering penalty is optional
(``rank_penalty``); without it the per-group gains are exact conditionals of
an exchangeable joint posterior (see :mod:`spahm.fusion.objective`).
"""
from __future__ import annotations

import math

import numpy as np

from ..base_measure import ExponentialFamily, NaturalParams, posterior_nat
from .state import GaussianHyper, GlobalState

COST_PATHS = ("general", "gaussian", "eq13-literal")


def _check_lifted(state: GlobalState, j: int) -> None:
    if state.assignments[j] is not None:
        raise ValueError(f"group {j} is still placed; lift it before building its cost")


def prior_gains(state: GlobalState, n_local: int, alpha: float, gamma0: float,
                rank_penalty: bool = False) -> np.ndarray:
    """Log-prior part of the gain, one value per candidate slot."""
    J = len(state.placed) + 1
    denom = alpha + J - 1
    m = state.counts().astype(np.float64)
    free = denom - m
    if np.any(free <= 0):
        raise ValueError("global atom shared by every other group would need alpha + J - 1 - m > 0")
    existing = np.log(m) - np.log(free)
    new = np.full(n_local, math.log(alpha * gamma0 / denom))
    if rank_penalty:
        new -= np.log(np.arange(1, n_local + 1))
    return np.concatenate([existing, new])


def build_cost_general(state: GlobalState, j: int, family: ExponentialFamily,
                       prior: NaturalParams, alpha: float, gamma0: float,
                       rank_penalty: bool = False) -> np.ndarray:
    """Cost matrix built only from ``suff_stat``, ``log_H`` and ``posterior_nat``."""
    _check_lifted(state, j)
    group = state.groups[j]
    stats = [family.suff_stat(v) for v in group.atoms]
    L_rem, L_j = state.n_global, group.size
    gains = np.empty((L_rem + L_j, L_j))

    assigned: list[list] = [[] for _ in range(L_rem)]
    for g, a in zip(state.groups, state.assignments):
        if a is not None:
            for l, i in enumerate(a):
                assigned[i].append(family.suff_stat(g.atoms[l]))

    for i in range(L_rem):
        base = posterior_nat(prior, assigned[i])
        log_H_base = family.log_H(base)
        for l, s in enumerate(stats):
            gains[i, l] = -(family.log_H(posterior_nat(base, [s])) - log_H_base)

    log_H_prior = family.log_H(prior)
    for l, s in enumerate(stats):
        gains[L_rem:, l] = -(family.log_H(posterior_nat(prior, [s])) - log_H_prior)

    gains += prior_gains(state, L_j, alpha, gamma0, rank_penalty)[:, None]
    return -gains


def build_cost_gaussian(state: GlobalState, j: int, hyper: GaussianHyper,
                        rank_penalty: bool = False) -> np.ndarray:
    """Closed-form Gaussian cost.

    The data part of each gain is written as the log posterior-predictive
    density of ``v_l`` under global atom ``i``, i.e.
    ``N(v_l | theta_i, (sigma^2 + sigma^2/n_i) I)`` with ``n_i = n0 + m_i``. This
    differs from the general path only by ``log h(v_l)``, a constant per column,
    and avoids the cancellation between large natural parameters.
    """
    _check_lifted(state, j)
    atoms = state.groups[j].atoms
    L_j, d = atoms.shape
    s2, s02 = hyper.sigma_sq, hyper.sigma0_sq
    m = state.counts().astype(np.float64)
    sums = state.atom_sums()

    # posterior means / predictive variances for existing atoms, then the prior
    means = np.vstack([(hyper.mu0 * s2 + s02 * sums) / (s2 + m[:, None] * s02), hyper.mu0[None, :]])
    pred_var = np.concatenate([s2 + s2 * s02 / (s2 + m * s02), [s2 + s02]])

    sq = np.sum((means[:, None, :] - atoms[None, :, :]) ** 2, axis=-1)
    loglik = -sq / (2.0 * pred_var[:, None]) - 0.5 * d * np.log(2.0 * math.pi * pred_var)[:, None]
    gains = np.vstack([loglik[:-1], np.repeat(loglik[-1:], L_j, axis=0)])
    gains += prior_gains(state, L_j, hyper.alpha, hyper.gamma0, rank_penalty)[:, None]
    return -gains


def build_cost_literal(state: GlobalState, j: int, hyper: GaussianHyper,
                    rank_penalty: bool = True) -> np.ndarray:
    """Closed-form Gaussian cost in its doubled textbook layout.

    Every term carries a factor of two relative to the general path (the
    ``2 log`` prior terms together with un-halved quadratic and log-variance
    terms), so the matrix is exactly twice the general one and yields the same
    assignment. Extended to ``d`` dimensions by summing the quadratic terms and
    multiplying the log-ratio terms by ``d``.
    """
    _check_lifted(state, j)
    atoms = state.groups[j].atoms
    L_j, d = atoms.shape
    s2, s02, mu0 = hyper.sigma_sq, hyper.sigma0_sq, hyper.mu0
    r = s2 / s02
    m = state.counts().astype(np.float64)
    sums = state.atom_sums()
    prior = 2.0 * prior_gains(state, L_j, hyper.alpha, hyper.gamma0, rank_penalty)

    base = mu0 / s02 + sums / s2  # (L', d)
    with_v = base[:, None, :] + atoms[None, :, :] / s2  # (L', L_j, d)
    existing = (
        d * np.log((m + r) / (1.0 + m + r))[:, None]
        + np.sum(with_v**2, axis=-1) * s2 / (1.0 + m + r)[:, None]
        - (np.sum(base**2, axis=-1) * s2 / (m + r))[:, None]
    )
    single = (
        d * math.log(s2 / (s02 + s2))
        + np.sum((mu0 / s02 + atoms / s2) ** 2, axis=-1) * s2 / (1.0 + r)
        - float(np.sum(mu0**2)) / s02
    )
    gains = np.vstack([existing, np.repeat(single[None, :], L_j, axis=0)]) + prior[:, None]
    return -gains


def build_cost(state: GlobalState, j: int, hyper: GaussianHyper, cost_path: str = "gaussian",
               rank_penalty: bool = False) -> np.ndarray:
    if cost_path == "gaussian":
        return build_cost_gaussian(state, j, hyper, rank_penalty)
    if cost_path == "general":
        return build_cost_general(state, j, hyper.family(), hyper.natural(), hyper.alpha,
                                  hyper.gamma0, rank_penalty)
    if cost_path == "eq13-literal":
        return build_cost_literal(state, j, hyper, rank_penalty)
    raise ValueError(f"unknown cost path {cost_path!r}; expected one of {COST_PATHS}")
