import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monotone_mdp import (
    GeneratorSpec,
    InvalidProbability,
    check_monotone_assumptions,
    dp_solve,
    is_monotone,
    machine_replacement_model,
    random_monotone_mdp,
)
from monotone_mdp.generator import with_random_constraints
from monotone_mdp.mdp import constraint_values


def test_single_state_single_action():
    m = random_monotone_mdp(GeneratorSpec(1, 1, 3, 0))
    assert check_monotone_assumptions(m).passed
    assert np.all(m.P == 1.0)


@pytest.mark.parametrize("seed", [0, 1, 2**63 + 5])
def test_full_scale_model_passes(seed):
    m = random_monotone_mdp(GeneratorSpec(10, 3, 365, seed))
    assert (m.X, m.U, m.N, m.x0) == (10, 3, 365, 10)
    assert check_monotone_assumptions(m).passed


def test_same_seed_bit_identical():
    a = random_monotone_mdp(GeneratorSpec(6, 3, 5, 42))
    b = random_monotone_mdp(GeneratorSpec(6, 3, 5, 42))
    for f in ("P", "c", "cN"):
        assert getattr(a, f).tobytes() == getattr(b, f).tobytes()
    c = random_monotone_mdp(GeneratorSpec(6, 3, 5, 43))
    assert not np.array_equal(a.c, c.c)


def test_cost_scale():
    a = random_monotone_mdp(GeneratorSpec(4, 2, 3, 8))
    b = random_monotone_mdp(GeneratorSpec(4, 2, 3, 8, cost_scale=2.0))
    assert np.allclose(b.c, 2 * a.c, rtol=1e-15)
    assert np.array_equal(a.P, b.P)


def _replay(seed, X, U, N):
    """Rebuild the first attempt from the documented stream order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    cN = np.sort(rng.random(X))[::-1]
    c = np.empty((N, X, U))
    P = np.empty((N, U, X, X))
    for k in range(N):
        a = np.sort(rng.random(X))[::-1]
        s = np.sort(rng.random(X))[::-1]
        m = np.sort(rng.random(U))
        c[k] = a[:, None] + s[:, None] * m[None, :]
        g = rng.random(X) + 1e-3
        g = g / g.sum()
        table = rng.random((X, X - 1))
        tails = np.sort(np.sort(table, axis=1)[:, ::-1], axis=0)
        T = np.hstack([np.ones((X, 1)), tails, np.zeros((X, 1))])
        H = T[:, :-1] - T[:, 1:]
        e = np.sort(rng.random(U))
        for u in range(U):
            row = (1 - e[u]) * g[None, :] + e[u] * H
            P[k, u] = row / row.sum(axis=1, keepdims=True)
    return P, c, cN


@pytest.mark.parametrize("seed", [0, 17])
def test_documented_stream_order(seed):
    m = random_monotone_mdp(GeneratorSpec(4, 3, 3, seed))
    P, c, cN = _replay(seed, 4, 3, 3)
    assert np.allclose(m.cN, cN, rtol=0, atol=1e-15)
    assert np.allclose(m.c, c, rtol=0, atol=1e-15)
    assert np.allclose(m.P, P, rtol=0, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 10), st.integers(2, 3), st.integers(2, 10), st.integers(0, 2**64 - 1))
def test_generated_models_pass_and_dp_is_monotone(X, U, N, seed):
    m = random_monotone_mdp(GeneratorSpec(X, U, N, seed))
    assert check_monotone_assumptions(m).passed
    assert is_monotone(dp_solve(m)[0])


@pytest.mark.parametrize(
    "kw", [{"X": 0}, {"U": -1}, {"N": 1.5}, {"seed": -1}, {"seed": 2**64}, {"cost_scale": 0.0}]
)
def test_spec_validation(kw):
    args = {"X": 2, "U": 2, "N": 2, **kw}
    with pytest.raises(ValueError):
        GeneratorSpec(**args)


# ----------------------------------------------------- machine replacement


def test_machine_replacement_matrices():
    m = machine_replacement_model(0.3, 1.2, 0.5, 3)
    assert np.array_equal(m.P[0, 0], [[0, 1], [0, 1]])
    assert np.array_equal(m.P[2, 1], [[1, 0], [0.3, 0.7]])
    assert np.array_equal(m.c[1, :, 0], [1.2, 1.2])
    assert np.array_equal(m.c[1, :, 1], [0.5, 0.0])
    assert np.array_equal(m.cN, [0, 0]) and m.x0 == 2


def test_never_breaking_machine_continues():
    m = machine_replacement_model(0.0, 1.0, 0.5, 6)
    theta, J = dp_solve(m)
    assert np.all(theta[:-1, 1, 1] == 1.0)
    assert J == 0.0


@pytest.mark.parametrize("bad", [-0.1, 1.5])
def test_machine_replacement_rejects_bad_probability(bad):
    with pytest.raises(InvalidProbability):
        machine_replacement_model(bad, 1.0, 0.5, 2)


def test_machine_replacement_grid_passes_checker():
    for t, R, g in itertools.product(np.linspace(0, 1, 5), np.linspace(0, 2, 5), np.linspace(0, 2, 5)):
        assert check_monotone_assumptions(machine_replacement_model(t, R, g, 3)).passed


def test_random_constraints_keep_optimum_feasible():
    base = random_monotone_mdp(GeneratorSpec(4, 2, 3, 1))
    m = with_random_constraints(base, 3, seed=5)
    assert m.L == 3
    theta, _ = dp_solve(base)
    spent = constraint_values(m, theta)
    gammas = np.array([c.gamma for c in m.constraints])
    assert np.allclose(gammas, 1.1 * spent, rtol=1e-14)
    assert all(np.all(c.beta >= 0) for c in m.constraints)
