import logging
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spahm.fusion import (DegenerateEstimateWarning, FusionConfig, GaussianHyper, GlobalState,
                          LocalGroup, MonotonicityError, StateError, eval_objective, fuse,
                          global_atoms, initial_hyper, match_group)
from oracles import log_posterior, random_instance

pytestmark = pytest.mark.filterwarnings("ignore::spahm.fusion.DegenerateEstimateWarning")


def _wide(d=1, sigma_sq=1.0):
    return GaussianHyper(np.zeros(d), 1e12, sigma_sq)


def test_single_group_is_returned_unchanged():
    atoms = np.array([[0.5, 1.0], [3.0, -2.0], [-1.0, 4.0]])
    res = fuse([atoms], FusionConfig(learn_hypers=False, seed=3), _wide(2))
    assert res.n_global == 3
    assert sorted(res.assignments[0].tolist()) == [0, 1, 2]
    assert np.allclose(res.global_atoms[res.assignments[0]], atoms, rtol=1e-9)
    assert np.all(res.state.counts() == 1)
    obj = res.trace.objectives
    assert np.all(obj == obj[0])
    assert res.converged


def test_identical_groups_pair_up():
    rng = np.random.default_rng(1)
    atoms = rng.normal(0, 3, (5, 2))
    other = atoms[rng.permutation(5)]
    h = GaussianHyper(np.zeros(2), 9.0, 1e-6)
    res = fuse([atoms, other], FusionConfig(learn_hypers=False, max_outer=2), h)
    assert res.n_global == 5
    assert np.all(res.state.counts() == 2)
    paired = log_posterior([atoms, other], res.assignments, 0.0, 9.0, 1e-6)
    apart = log_posterior([atoms, other], [np.arange(5), np.arange(5, 10)], 0.0, 9.0, 1e-6)
    assert paired > apart


def test_far_separated_groups_stay_apart():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 1, (3, 2))
    b = rng.normal(0, 1, (4, 2)) + 1000.0
    h = GaussianHyper(np.full(2, 500.0), 1.0, 0.1)
    res = fuse([a, b], FusionConfig(learn_hypers=False), h)
    assert res.n_global == 7
    together = log_posterior([a, b], [[0, 1, 2], [0, 1, 2, 3]], 500.0, 1.0, 0.1)
    assert log_posterior([a, b], res.assignments, 500.0, 1.0, 0.1) > together


def test_rematch_is_idempotent():
    rng = np.random.default_rng(3)
    groups = random_instance(rng, J_max=5, L_max=6, d_max=3, J_min=3)
    h = initial_hyper([LocalGroup(k, g) for k, g in enumerate(groups)])
    state = GlobalState.empty(groups)
    for j in range(len(groups)):
        state = match_group(state, j, h)
    for j in range(len(groups)):
        once = match_group(state, j, h)
        twice = match_group(once, j, h)
        assert once.partition() == twice.partition()
        assert [a.tolist() for a in once.assignments] == [a.tolist() for a in twice.assignments]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), path=st.sampled_from(["gaussian", "general"]))
def test_trace_is_monotone(seed, path):
    rng = np.random.default_rng(seed)
    groups = random_instance(rng)
    res = fuse(groups, FusionConfig(seed=seed, cost_path=path, max_outer=20, certify=True))
    assert res.trace.is_monotone()
    res.state.validate()
    assert res.trace.entries[-1].objective == pytest.approx(eval_objective(res.state, res.hyper), abs=1e-9)


def test_certify_raises_on_decrease():
    # with the rank penalty on, this instance has a step that lowers the objective
    rng = np.random.default_rng(1)
    groups = random_instance(rng)
    cfg = FusionConfig(seed=1, rank_penalty=True, max_outer=30)
    logging.disable(logging.WARNING)
    try:
        res = fuse(groups, cfg)
    finally:
        logging.disable(logging.NOTSET)
    assert not res.trace.is_monotone()
    with pytest.raises(MonotonicityError):
        fuse(groups, FusionConfig(seed=1, rank_penalty=True, max_outer=30, certify=True))


def test_cost_paths_reach_the_same_result():
    rng = np.random.default_rng(4)
    groups = random_instance(rng, J_max=5, L_max=6, d_max=3, J_min=4)
    results = [fuse(groups, FusionConfig(seed=0, cost_path=p)) for p in ("gaussian", "general", "eq13-literal")]
    parts = [r.state.partition() for r in results]
    assert parts[0] == parts[1] == parts[2]


def test_deterministic_for_fixed_seed():
    rng = np.random.default_rng(5)
    groups = random_instance(rng, J_max=5, L_max=6, d_max=2, J_min=4)
    a = fuse(groups, FusionConfig(seed=11))
    b = fuse(groups, FusionConfig(seed=11))
    assert [x.tolist() for x in a.assignments] == [x.tolist() for x in b.assignments]
    assert a.global_atoms.tobytes() == b.global_atoms.tobytes()
    assert a.trace.objectives.tobytes() == b.trace.objectives.tobytes()


def test_max_outer_reports_non_convergence():
    rng = np.random.default_rng(6)
    groups = random_instance(rng, J_max=5, L_max=6, d_max=2, J_min=5)
    res = fuse(groups, FusionConfig(seed=0, max_outer=1, inner=1))
    assert not res.converged and res.n_outer == 1


def test_fixed_hypers_respected():
    rng = np.random.default_rng(7)
    groups = random_instance(rng, J_max=4, L_max=4, d_max=2, J_min=3)
    h = initial_hyper([LocalGroup(k, g) for k, g in enumerate(groups)]).replace(sigma_sq=0.123)
    res = fuse(groups, FusionConfig(fixed_hypers=("sigma_sq",)), h)
    assert res.hyper.sigma_sq == 0.123
    res = fuse(groups, FusionConfig(learn_hypers=False), h)
    assert res.hyper == h


def test_global_atoms_are_posterior_means():
    rng = np.random.default_rng(8)
    groups = random_instance(rng, J_max=4, L_max=4, d_max=2, J_min=3)
    res = fuse(groups)
    h = res.hyper
    for i in range(res.n_global):
        members = np.array([groups[j][l] for j, l in res.state.members(i)])
        m = members.shape[0]
        expect = (h.mu0 * h.sigma_sq + h.sigma0_sq * members.sum(axis=0)) / (h.sigma_sq + m * h.sigma0_sq)
        assert np.allclose(res.global_atoms[i], expect, rtol=1e-12)
    assert np.array_equal(global_atoms(res.state, h), res.global_atoms)


def test_input_validation():
    with pytest.raises(ValueError):
        fuse([np.zeros((2, 2)), np.zeros((2, 3))])
    with pytest.raises(ValueError):
        fuse([np.zeros((0, 2))])
    with pytest.raises(ValueError):
        fuse([np.array([[np.nan]])])
    with pytest.raises(ValueError):
        fuse([np.zeros((1, 2))], FusionConfig(learn_hypers=False))
    with pytest.raises(ValueError):
        fuse([np.zeros((1, 2))], None, GaussianHyper(np.zeros(3), 1.0, 1.0))
    with pytest.raises(ValueError):
        FusionConfig(tol=0)
    with pytest.raises(ValueError):
        FusionConfig(cost_path="fast")
    with pytest.raises(ValueError):
        FusionConfig(fixed_hypers=("alpha",))


def test_state_validation():
    g = [np.zeros((2, 1)), np.zeros((1, 1))]
    with pytest.raises(StateError):
        GlobalState(tuple(GlobalState.empty(g).groups), (np.array([0, 0]), np.array([1])), 2).validate()
    with pytest.raises(StateError):
        GlobalState(tuple(GlobalState.empty(g).groups), (np.array([0, 1]), np.array([0])), 3).validate()
    state = GlobalState.from_assignments(g, [[5, 9], [9]])
    assert state.n_global == 2 and state.counts().tolist() == [1, 2]
    lifted = state.lift(0)
    assert lifted.n_global == 1 and lifted.assignments[1].tolist() == [0]


def test_degenerate_warning_surfaces():
    groups = [np.array([[0.0], [10.0]]), np.array([[20.0]])]
    h = GaussianHyper(np.array([0.0]), 1.0, 1e-4)
    with pytest.warns(DegenerateEstimateWarning):
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            fuse(groups, FusionConfig(max_outer=2), h)
