"""Seeded MDP instances satisfying (A1)-(A4), and the machine-replacement model.

Random stream
-------------
All draws come from ``numpy.random.Generator(numpy.random.PCG64(seed))``.
Each attempt consumes, in this order:

1. terminal cost: ``X`` uniforms on [0, 1)
2. for k = 0..N-1:
   a. ``X`` uniforms (cost offset ``a_k``), ``X`` uniforms (cost slope ``s_k``),
      ``U`` uniforms (action weights ``m_k``)
   b. ``X`` uniforms (reset distribution ``g_k``), ``X*(X-1)`` uniforms
      (tail-sum table ``H_k``, row-major), ``U`` uniforms (mixing weights ``e_k``)

Costs are ``c(x,u,k) = a_k(x) + m_k(u) s_k(x)`` with ``a_k, s_k`` sorted
decreasing in x and ``m_k`` sorted increasing in u, which gives (A1) and (A3).
Transition rows are ``P_i(u,k) = (1 - e_k(u)) g_k + e_k(u) H_k(i)`` where
``g_k`` does not depend on the state, ``H_k(i)`` is stochastically increasing
in ``i`` and ``e_k`` is increasing in ``u``; this gives (A2) and (A4).
The result is verified with the checker and redrawn on failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import dp_solve
from .errors import GenerationFailed, InvalidProbability
from .mdp import Constraint, MdpModel, constraint_values
from .structure import check_monotone_assumptions

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class GeneratorSpec:
    X: int
    U: int
    N: int
    seed: int = 0
    cost_scale: float = 1.0

    def __post_init__(self):
        for name in ("X", "U", "N"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not self.cost_scale > 0:
            raise ValueError(f"cost_scale must be positive, got {self.cost_scale!r}")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _stochastic_increasing_rows(rng: np.random.Generator, X: int) -> np.ndarray:
    """Rows H[i] whose tail sums increase in i; shape (X, X)."""
    T = np.ones((X, X + 1))
    T[:, X] = 0.0
    if X > 1:
        V = rng.random((X, X - 1))
        # rows decreasing in l, then columns increasing in i; sorting the
        # columns keeps the rows sorted
        V = -np.sort(-V, axis=1)
        V = np.sort(V, axis=0)
        T[:, 1:X] = V
    H = T[:, :-1] - T[:, 1:]
    return np.maximum(H, 0.0)


def _draw(rng: np.random.Generator, spec: GeneratorSpec) -> MdpModel:
    X, U, N, s = spec.X, spec.U, spec.N, spec.cost_scale
    cN = -np.sort(-rng.random(X)) * s
    c = np.empty((N, X, U))
    P = np.empty((N, U, X, X))
    for k in range(N):
        a = -np.sort(-rng.random(X)) * s
        slope = -np.sort(-rng.random(X)) * s
        m = np.sort(rng.random(U))
        c[k] = a[:, None] + slope[:, None] * m[None, :]

        g = rng.random(X) + 1e-3
        g /= g.sum()
        H = _stochastic_increasing_rows(rng, X)
        e = np.sort(rng.random(U))
        P[k] = (1.0 - e)[:, None, None] * g[None, None, :] + e[:, None, None] * H[None]
        P[k] /= P[k].sum(axis=-1, keepdims=True)
    return MdpModel(X=X, U=U, N=N, x0=X, P=P, c=c, cN=cN)


def random_monotone_mdp(spec: GeneratorSpec) -> MdpModel:
    """Random model passing all four structural checks; ``x0 = X``."""
    rng = make_rng(spec.seed)
    for _ in range(MAX_ATTEMPTS):
        model = _draw(rng, spec)
        if check_monotone_assumptions(model).passed:
            return model
    raise GenerationFailed(f"no valid model after {MAX_ATTEMPTS} attempts for {spec}")


def machine_replacement_model(
    theta_break: float, R_cost: float, gamma: float, N: int
) -> MdpModel:
    """Two-state machine: state 1 broken, 2 working; action 1 replace, 2 continue.

    Starts in the working state; terminal cost is zero.
    """
    if not 0.0 <= theta_break <= 1.0:
        raise InvalidProbability(f"theta_break must lie in [0, 1], got {theta_break!r}")
    P1 = np.array([[0.0, 1.0], [0.0, 1.0]])
    P2 = np.array([[1.0, 0.0], [theta_break, 1.0 - theta_break]])
    P = np.broadcast_to(np.stack([P1, P2]), (N, 2, 2, 2))
    cost = np.array([[R_cost, gamma], [R_cost, 0.0]])  # [x, u]
    c = np.broadcast_to(cost, (N, 2, 2))
    return MdpModel(X=2, U=2, N=N, x0=2, P=P, c=c, cN=np.zeros(2))


def with_random_constraints(
    model: MdpModel, n_constraints: int, seed: int, slack_factor: float = 1.1
) -> MdpModel:
    """Attach nonnegative random constraints that the unconstrained optimum satisfies.

    Each threshold is ``slack_factor`` times the unconstrained optimal
    policy's expected expenditure.
    """
    rng = make_rng(seed)
    theta_star, _ = dp_solve(model)
    cons = []
    for _ in range(n_constraints):
        beta = rng.random(model.policy_shape)
        cons.append(Constraint(beta, 0.0))
    spent = constraint_values(
        MdpModel(model.X, model.U, model.N, model.x0, model.P, model.c, model.cN, tuple(cons)),
        theta_star,
    )
    cons = tuple(Constraint(con.beta, slack_factor * v) for con, v in zip(cons, spent))
    return MdpModel(model.X, model.U, model.N, model.x0, model.P, model.c, model.cN, cons)
