"""Bayesian nonparametric fusion of permutation-invariant local parameter sets.

Local models each contribute an unordered set of parameter vectors ("atoms").
:func:`spahm.fuse` matches them into a global set of inferred size by
coordinate ascent on the Beta-Bernoulli process posterior, alternating exact
Hungarian matching of one group at a time with hyperparameter updates.
"""
from .fusion import FusionConfig, FusionResult, GaussianHyper, GlobalState, LocalGroup, fuse
from .lsap import BACKEND as LSAP_BACKEND
from .lsap import solve_min

__version__ = "0.1.0"

__all__ = ["FusionConfig", "FusionResult", "GaussianHyper", "GlobalState", "LocalGroup",
           "LSAP_BACKEND", "fuse", "solve_min"]
