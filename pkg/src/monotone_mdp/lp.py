"""Standard-form LP ``min q'a  s.t.  A a = b, a >= 0`` over occupation measures.

Vectorization is time-major: ``pi[k, x, u]`` sits at
``k*X*U + (x-1)*U + (u-1)``, i.e. a C-order ravel of the ``(N+1, X, U)``
array. One slack column per average-type constraint follows the decision
block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, IndexOutOfRange
from .mdp import MdpModel


@dataclass(frozen=True)
class StandardFormLp:
    q: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    n_decision: int
    n_slack: int

    @property
    def D(self) -> int:
        return self.n_decision + self.n_slack

    @property
    def M(self) -> int:
        return self.A.shape[0]


def flat_index(x: int, u: int, k: int, X: int, U: int, N: int) -> int:
    if not (1 <= x <= X and 1 <= u <= U and 0 <= k <= N):
        raise IndexOutOfRange(f"(x={x}, u={u}, k={k}) outside X={X}, U={U}, N={N}")
    return k * X * U + (x - 1) * U + (u - 1)


def vectorize(pi: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(pi, dtype=float).ravel()


def devectorize(alpha: np.ndarray, model: MdpModel) -> np.ndarray:
    n = (model.N + 1) * model.X * model.U
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size < n:
        raise DimensionMismatch(f"alpha has shape {alpha.shape}, need at least {n} entries")
    return alpha[:n].reshape(model.policy_shape).copy()


def build_lp(model: MdpModel) -> StandardFormLp:
    X, U, N, L = model.X, model.U, model.N, model.L
    XU = X * U
    n_dec = XU * (N + 1)
    M = X + X * N + L

    q = np.zeros(n_dec + L)
    q[: N * XU] = model.c.ravel()
    q[N * XU : n_dec] = np.repeat(model.cN, U)

    rows, cols, vals = [], [], []
    xs = np.repeat(np.arange(X), U)  # state of each column inside a time block
    block = np.arange(XU)

    # initial distribution: sum_u pi(x, u, 0) = 1{x = x0}
    rows.append(xs)
    cols.append(block)
    vals.append(np.ones(XU))

    # flow: sum_u pi(j,u,k) - sum_{i,u} P_ij(u,k-1) pi(i,u,k-1) = 0
    for k in range(1, N + 1):
        r0 = X + (k - 1) * X
        rows.append(r0 + xs)
        cols.append(k * XU + block)
        vals.append(np.ones(XU))
        # coefficient of pi(i, u, k-1) in row j is -P[k-1, u, i, j]
        Pk = model.P[k - 1].transpose(1, 0, 2)  # [i, u, j]
        i_idx, u_idx, j_idx = np.nonzero(Pk)
        rows.append(r0 + j_idx)
        cols.append((k - 1) * XU + i_idx * U + u_idx)
        vals.append(-Pk[i_idx, u_idx, j_idx])

    for l, con in enumerate(model.constraints):
        beta = con.beta.ravel()
        nz = np.nonzero(beta)[0]
        r = X + X * N + l
        rows.append(np.full(nz.size + 1, r))
        cols.append(np.append(nz, n_dec + l))
        vals.append(np.append(beta[nz], 1.0))

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(M, n_dec + L),
    ).tocsc()
    A.sum_duplicates()
    A.eliminate_zeros()

    b = np.zeros(M)
    b[model.x0 - 1] = 1.0
    b[X + X * N :] = [con.gamma for con in model.constraints]
    return StandardFormLp(q=q, A=A, b=b, n_decision=n_dec, n_slack=L)
