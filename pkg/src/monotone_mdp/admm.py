"""Scaled-dual ADMM for standard-form LPs with a cached KKT factorization.

One step, with penalty ``rho``::

    [rho I  A'] [alpha]   [rho (z - eta) - q]
    [A      0 ] [nu   ] = [b                ]

    z   <- max(alpha + eta, 0)
    eta <- eta + alpha - z
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem
from .lp import StandardFormLp

REFINE_TOL = 1e-10
# Smallest |pivot| relative to the largest before the KKT matrix is
# treated as singular.
PIVOT_RTOL = 1e-13


@dataclass
class AdmmState:
    alpha: np.ndarray
    z: np.ndarray
    eta: np.ndarray
    rho: float
    kkt: Any  # scipy SuperLU handle
    kkt_matrix: sp.csc_matrix


def factor_kkt(lp: StandardFormLp, rho: float):
    D, M = lp.D, lp.M
    K = sp.bmat(
        [[rho * sp.identity(D, format="csc"), lp.A.T], [lp.A, None]], format="csc"
    )
    try:
        lu = spla.splu(K, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularSystem(f"KKT factorization failed: {exc}") from exc
    piv = np.abs(lu.U.diagonal())
    if piv.size != D + M or not np.all(np.isfinite(piv)) or piv.min() <= PIVOT_RTOL * piv.max():
        raise SingularSystem("KKT matrix is numerically singular; A is rank deficient")
    return lu, K


def admm_setup(lp: StandardFormLp, rho: float) -> AdmmState:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    lu, K = factor_kkt(lp, float(rho))
    D = lp.D
    return AdmmState(
        alpha=np.zeros(D), z=np.zeros(D), eta=np.zeros(D), rho=float(rho), kkt=lu, kkt_matrix=K
    )


def set_rho(state: AdmmState, lp: StandardFormLp, rho: float) -> None:
    """Change the penalty and re-factor."""
    state.kkt, state.kkt_matrix = factor_kkt(lp, float(rho))
    state.rho = float(rho)


def _solve_kkt(state: AdmmState, rhs: np.ndarray) -> np.ndarray:
    sol = state.kkt.solve(rhs)
    resid = rhs - state.kkt_matrix @ sol
    if np.max(np.abs(resid)) > REFINE_TOL:
        sol += state.kkt.solve(resid)
    return sol


def admm_step(state: AdmmState, lp: StandardFormLp) -> AdmmState:
    rhs = np.concatenate([state.rho * (state.z - state.eta) - lp.q, lp.b])
    sol = _solve_kkt(state, rhs)
    alpha = sol[: lp.D]
    z = np.maximum(alpha + state.eta, 0.0)
    state.eta = state.eta + alpha - z
    state.alpha = alpha
    state.z = z
    return state


def primal_residual(state: AdmmState) -> float:
    """Infinity norm of ``alpha - z``."""
    return float(np.max(np.abs(state.alpha - state.z))) if state.alpha.size else 0.0
