"""Backward-induction oracle for unconstrained finite-horizon MDPs."""

from __future__ import annotations

import numpy as np

from .errors import ConstrainedModelError
from .mdp import MdpModel

# Relative slack used when collecting the set of minimizing actions, so that
# floating-point noise does not hide genuine ties.
TIE_RTOL = 1e-12


def q_values(model: MdpModel, k: int, V_next: np.ndarray) -> np.ndarray:
    """Q[x, u] = c(x, u, k) + sum_j P_xj(u, k) V_next(j)."""
    return model.c[k] + np.einsum("uij,j->iu", model.P[k], V_next)


def largest_minimizer(Q: np.ndarray) -> np.ndarray:
    """Index of the largest action attaining the row minimum of ``Q``."""
    qmin = Q.min(axis=1, keepdims=True)
    tol = TIE_RTOL * np.maximum(1.0, np.abs(qmin))
    is_min = Q <= qmin + tol
    U = Q.shape[1]
    return U - 1 - np.argmax(is_min[:, ::-1], axis=1)


def dp_solve(model: MdpModel) -> tuple[np.ndarray, float]:
    """Deterministic optimal policy and optimal cost from ``x0``.

    Ties are broken toward the largest minimizing action. The terminal
    action is cost-irrelevant and set to action ``U``.
    """
    if model.constraints:
        raise ConstrainedModelError(
            f"dp_solve handles unconstrained models only (L = {model.L})"
        )
    X, U, N = model.X, model.U, model.N
    theta = np.zeros((N + 1, X, U))
    theta[N, :, U - 1] = 1.0
    V = model.cN.copy()
    for k in range(N - 1, -1, -1):
        Q = q_values(model, k, V)
        best = largest_minimizer(Q)
        theta[k, np.arange(X), best] = 1.0
        V = Q[np.arange(X), best]
    return theta, float(V[model.x0 - 1])


def value_functions(model: MdpModel) -> np.ndarray:
    """Optimal cost-to-go ``V[k, x]`` for k = 0..N (no constraints)."""
    V = np.empty((model.N + 1, model.X))
    V[model.N] = model.cN
    for k in range(model.N - 1, -1, -1):
        V[k] = q_values(model, k, V[k + 1]).min(axis=1)
    return V
