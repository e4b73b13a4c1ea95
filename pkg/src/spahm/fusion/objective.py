"""Log posterior of the assignments, up to an assignment-independent constant.

``log P(B)`` is accumulated group by group in index order using the Beta
process predictive: a group sees every earlier atom with probability
``m / (alpha + j - 1)`` and opens each new atom at rate
``alpha gamma0 / (alpha + j - 1)``. Without the optional ``-log(rank)``
ordering terms this is the exchangeable partition probability, so the value
does not depend on group order and each Hungarian step is an exact coordinate
ascent step on it. The Poisson ``exp(-rate)`` factor is constant and omitted.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..base_measure import ExponentialFamily, NaturalParams
from .state import GaussianHyper, GlobalState


def ibp_log_prior(state: GlobalState, alpha: float, gamma0: float, rank_penalty: bool = False) -> float:
    b = state.membership()[state.placed].astype(np.float64)
    if b.shape[0] == 0:
        return 0.0
    seen = np.cumsum(b, axis=0) - b  # counts among earlier groups
    total = 0.0
    for p in range(b.shape[0]):
        denom = alpha + p
        m = seen[p]
        old = m > 0
        took = b[p, old] > 0
        total += float(np.sum(np.where(took, np.log(m[old] / denom), np.log((denom - m[old]) / denom))))
        k = int(np.sum(b[p, ~old]))
        if k:
            total += k * math.log(alpha * gamma0 / denom)
            if rank_penalty:
                total -= float(gammaln(k + 1))
    return total


def data_log_marginal(state: GlobalState, family: ExponentialFamily, prior: NaturalParams) -> float:
    """``sum_i [log H(prior) - log H(posterior_i)] + sum log h(v)`` over placed atoms."""
    m = state.counts().astype(np.float64)
    sigma2 = family.sigma2
    tau_post = prior.tau[None, :] + state.atom_sums() / sigma2
    log_H_prior = family.log_H(prior)
    marg = state.n_global * log_H_prior - float(np.sum(family.log_H_batch(tau_post, prior.n0 + m)))
    log_h = sum(float(np.sum(family.log_h_batch(g.atoms)))
                for g, a in zip(state.groups, state.assignments) if a is not None)
    return marg + log_h


def eval_objective(state: GlobalState, hyper: GaussianHyper, rank_penalty: bool = False) -> float:
    return (ibp_log_prior(state, hyper.alpha, hyper.gamma0, rank_penalty)
            + data_log_marginal(state, hyper.family(), hyper.natural()))


def conditional_objective(lifted: GlobalState, j: int, slots, hyper: GaussianHyper,
                          rank_penalty: bool = False) -> float:
    """Objective of one group's assignment with all other groups held fixed.

    ``slots[l]`` is the candidate row chosen for local atom ``l`` in the cost
    matrix layout (existing atoms first, then new slots). The group is treated
    as the last of ``J`` customers; the prior enumerates every existing atom
    (taken or not) and each used new slot with its ``log(alpha gamma0 / ...)``
    rate and, if requested, ``-log(slot rank)``. The likelihood part is
    ``-sum_i log H(posterior_i)`` over all existing and opened atoms, plus
    ``log H(prior)`` for every opened atom.
    """
    if lifted.assignments[j] is not None:
        raise ValueError("state must have group j lifted")
    slots = np.asarray(slots, dtype=np.int64)
    family, prior = hyper.family(), hyper.natural()
    alpha, gamma0 = hyper.alpha, hyper.gamma0
    atoms = lifted.groups[j].atoms
    L_rem = lifted.n_global
    J = len(lifted.placed) + 1
    denom = alpha + J - 1
    m = lifted.counts().astype(np.float64)

    taken = np.zeros(L_rem, dtype=bool)
    tau = prior.tau[None, :] + lifted.atom_sums() / family.sigma2
    n = prior.n0 + m
    new_tau, new_n = [], []
    log_prior = 0.0
    for l, s in enumerate(slots):
        t = atoms[l] / family.sigma2
        if s < L_rem:
            taken[s] = True
            tau[s] = tau[s] + t
            n[s] += 1
        else:
            log_prior += math.log(alpha * gamma0 / denom)
            if rank_penalty:
                log_prior -= math.log(s - L_rem + 1)
            new_tau.append(prior.tau + t)
            new_n.append(prior.n0 + 1)
    log_prior += float(np.sum(np.where(taken, np.log(m / denom), np.log((denom - m) / denom))))
    log_lik = -float(np.sum(family.log_H_batch(tau, n)))
    if new_tau:
        log_lik -= float(np.sum(family.log_H_batch(np.array(new_tau), np.array(new_n))))
        log_lik += len(new_tau) * family.log_H(prior)
    return log_prior + log_lik
