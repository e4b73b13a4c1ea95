import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from scipy.optimize import linear_sum_assignment

from spahm import lsap
from oracles import brute_force_lsap

BACKENDS = lsap.available_backends()


@st.composite
def tall_matrices(draw, max_side=6, integer=False):
    L = draw(st.integers(1, max_side))
    R = draw(st.integers(L, max_side + 1))
    if integer:
        elems = st.integers(-20, 20).map(float)
    else:
        elems = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
    return draw(hnp.arrays(np.float64, (R, L), elements=elems))


def _cost(c, rows):
    return c[rows, np.arange(c.shape[1])].sum()


@pytest.mark.parametrize("backend", BACKENDS)
def test_small_examples(backend):
    res = lsap.solve_min([[0.0, 1.0], [1.0, 0.0]], backend=backend)
    assert res.col_to_row.tolist() == [0, 1] and res.total_cost == 0.0
    res = lsap.solve_min([[4.0]], backend=backend)
    assert res.col_to_row.tolist() == [0] and res.total_cost == 4.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_seeded_5x4_matches_enumeration(backend):
    c = np.random.default_rng(5).normal(size=(5, 4))
    best, rows = brute_force_lsap(c)
    res = lsap.solve_min(c, backend=backend)
    assert res.col_to_row.tolist() == rows.tolist()
    assert res.total_cost == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=150, deadline=None)
@given(c=tall_matrices())
def test_optimal_against_enumeration(backend, c):
    best, _ = brute_force_lsap(c)
    res = lsap.solve_min(c, backend=backend)
    rows = res.col_to_row
    assert np.unique(rows).size == rows.size
    assert rows.min() >= 0 and rows.max() < c.shape[0]
    assert _cost(c, rows) == pytest.approx(best, rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(c=tall_matrices(integer=True))
def test_integer_costs_exact(c):
    best, _ = brute_force_lsap(c)
    assert lsap.solve_min(c).total_cost == best


@settings(max_examples=60, deadline=None)
@given(c=tall_matrices(max_side=6), data=st.data())
def test_column_permutation_equivariance(c, data):
    perm = np.array(data.draw(st.permutations(range(c.shape[1]))))
    a = lsap.solve_min(c)
    b = lsap.solve_min(c[:, perm])
    assert b.total_cost == pytest.approx(a.total_cost, rel=1e-12, abs=1e-9)
    # the permuted problem's solution is optimal for the original one when un-permuted
    back = np.empty_like(b.col_to_row)
    back[perm] = b.col_to_row
    assert _cost(c, back) == pytest.approx(a.total_cost, rel=1e-12, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(c=tall_matrices(integer=True), col=st.integers(0, 10), shift=st.integers(-50, 50))
def test_column_shift_invariance(c, col, shift):
    col %= c.shape[1]
    shifted = c.copy()
    shifted[:, col] += shift
    a = lsap.solve_min(c)
    b = lsap.solve_min(shifted)
    assert b.total_cost == a.total_cost + shift
    assert _cost(c, b.col_to_row) == a.total_cost


@settings(max_examples=60, deadline=None)
@given(c=tall_matrices(max_side=8))
def test_backends_agree(c):
    results = [lsap.solve_min(c, backend=b) for b in BACKENDS]
    for r in results[1:]:
        assert r.col_to_row.tolist() == results[0].col_to_row.tolist()
        assert r.total_cost == results[0].total_cost


@pytest.mark.parametrize("shape", [(40, 20), (120, 60), (300, 100)])
def test_agrees_with_scipy_on_larger_problems(shape):
    c = np.random.default_rng(shape[0]).normal(size=shape)
    rows, cols = linear_sum_assignment(c)
    for backend in BACKENDS:
        assert lsap.solve_min(c, backend=backend).total_cost == pytest.approx(c[rows, cols].sum(), rel=1e-12)


def test_deterministic_ties():
    c = np.zeros((4, 3))
    first = lsap.solve_min(c).col_to_row.tolist()
    for _ in range(3):
        assert lsap.solve_min(c.copy()).col_to_row.tolist() == first
    if len(BACKENDS) > 1:
        assert lsap.solve_min(c, backend="python").col_to_row.tolist() == first


@pytest.mark.parametrize("bad, match", [
    (np.zeros((2, 3)), "at least as many rows"),
    (np.zeros((0, 0)), "non-empty"),
    (np.zeros(3), "2-D"),
    (np.array([[1.0, np.nan], [0.0, 1.0]]), "non-finite"),
    (np.array([[np.inf]]), "non-finite"),
])
def test_invalid_input(bad, match):
    with pytest.raises(ValueError, match=match):
        lsap.solve_min(bad)


def test_unknown_backend():
    with pytest.raises(ValueError):
        lsap.solve_min([[1.0]], backend="fortran")


def test_backend_selection():
    assert lsap.BACKEND in BACKENDS
    assert "python" in BACKENDS
