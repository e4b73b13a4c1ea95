"""Exact rectangular linear sum assignment.

The solver is a shortest augmenting path (Jonker-Volgenant style) method
that works natively on tall cost matrices: every column (local atom) gets a
distinct row (global slot), rows may stay unused. A compiled kernel is used
when the extension module is importable; otherwise the numpy implementation
in ``_lsap_py`` runs. Both produce identical results.

Set ``SPAHM_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from typing import NamedTuple

import numpy as np

from . import _lsap_py

_ext_solve = None
if not os.environ.get("SPAHM_PURE_PYTHON"):
    try:
        from ._lsap_ext import solve_transposed as _ext_solve
    except ImportError:  # extension not built
        _ext_solve = None

BACKEND = "cython" if _ext_solve is not None else "python"

__all__ = ["Assignment", "solve_min", "BACKEND", "available_backends"]


class Assignment(NamedTuple):
    """Column-to-row map and its total cost."""

    col_to_row: np.ndarray
    total_cost: float


def available_backends() -> list[str]:
    return ["cython", "python"] if _ext_solve is not None else ["python"]


def solve_min(cost, backend: str | None = None) -> Assignment:
    """Minimise ``sum_l cost[row(l), l]`` over injective maps ``l -> row(l)``.

    Parameters
    ----------
    cost : array_like, shape (R, L)
        Finite cost matrix with ``R >= L >= 1``.
    backend : {"cython", "python"}, optional
        Force a specific kernel; defaults to the fastest available.

    Raises
    ------
    ValueError
        If ``R < L``, the matrix is empty or not 2-D, or any entry is not finite.
    """
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    n_rows, n_cols = c.shape
    if n_rows < 1 or n_cols < 1:
        raise ValueError(f"cost matrix must be non-empty, got shape {c.shape}")
    if n_rows < n_cols:
        raise ValueError(
            f"cost matrix needs at least as many rows as columns, got {n_rows}x{n_cols}"
        )
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix contains non-finite entries")

    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _ext_solve is None:
            raise RuntimeError("compiled LSAP kernel is not available")
        solver = _ext_solve
    elif backend == "python":
        solver = _lsap_py.solve_transposed
    else:
        raise ValueError(f"unknown backend {backend!r}")

    col_to_row = solver(np.ascontiguousarray(c.T))
    total = float(c[col_to_row, np.arange(n_cols)].sum())
    return Assignment(col_to_row, total)
