"""Finite-horizon MDP model, policy representations and policy evaluation.

Array conventions (all 0-based numpy arrays):

* ``P[k, u, i, j]``  transition probability i -> j under action u at time k,
  shape ``(N, U, X, X)``.
* ``c[k, x, u]``     stage cost, shape ``(N, X, U)``.
* ``cN[x]``          terminal cost, shape ``(X,)``.
* ``theta[k, x, u]`` conditional policy, shape ``(N + 1, X, U)``.
* ``pi[k, x, u]``    occupation measure, same shape as ``theta``.
* ``p[k, x]``        state distribution, shape ``(N + 1, X)``.

Scalar state/action arguments in the public API (``x0``, ``x``, ``u``) are
1-based, as states and actions are numbered ``1..X`` and ``1..U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidModel

ROW_SUM_TOL = 1e-12
EPS_MASS = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Constraint:
    """Average-type constraint ``E[sum_k beta(x_k, u_k, k)] <= gamma``.

    ``beta`` has shape ``(N + 1, X, U)``.
    """

    beta: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _frozen(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass(frozen=True)
class MdpModel:
    X: int
    U: int
    N: int
    x0: int
    P: np.ndarray
    c: np.ndarray
    cN: np.ndarray
    constraints: tuple[Constraint, ...] = field(default=())

    def __post_init__(self):
        for name in ("X", "U", "N"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidModel(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        X, U, N = self.X, self.U, self.N
        if int(self.x0) != self.x0 or not 1 <= self.x0 <= X:
            raise InvalidModel(f"x0 must be in 1..{X}, got {self.x0!r}")
        object.__setattr__(self, "x0", int(self.x0))

        P, c, cN = _frozen(self.P), _frozen(self.c), _frozen(self.cN)
        if P.shape != (N, U, X, X):
            raise DimensionMismatch(f"P has shape {P.shape}, expected {(N, U, X, X)}")
        if c.shape != (N, X, U):
            raise DimensionMismatch(f"c has shape {c.shape}, expected {(N, X, U)}")
        if cN.shape != (X,):
            raise DimensionMismatch(f"cN has shape {cN.shape}, expected {(X,)}")
        for name, arr in (("P", P), ("c", c), ("cN", cN)):
            if not np.all(np.isfinite(arr)):
                raise InvalidModel(f"{name} contains non-finite entries")
        if np.any(P < 0):
            k, u, i, j = np.argwhere(P < 0)[0]
            raise InvalidModel(f"P[{k}][{u}][{i}][{j}] is negative")
        row_err = np.abs(P.sum(axis=-1) - 1.0)
        if np.any(row_err > ROW_SUM_TOL):
            k, u, i = np.argwhere(row_err > ROW_SUM_TOL)[0]
            raise InvalidModel(
                f"P[{k}][{u}][{i}] sums to {P[k, u, i].sum()!r}, expected 1"
            )

        cons = tuple(
            con if isinstance(con, Constraint) else Constraint(*con)
            for con in self.constraints
        )
        for l, con in enumerate(cons):
            if con.beta.shape != (N + 1, X, U):
                raise DimensionMismatch(
                    f"constraints[{l}].beta has shape {con.beta.shape}, "
                    f"expected {(N + 1, X, U)}"
                )
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "cN", cN)
        object.__setattr__(self, "constraints", cons)

    @property
    def L(self) -> int:
        return len(self.constraints)

    @property
    def policy_shape(self) -> tuple[int, int, int]:
        return (self.N + 1, self.X, self.U)


def action_values(U: int) -> np.ndarray:
    """The row vector ``[1, 2, ..., U]``."""
    return np.arange(1, U + 1, dtype=float)


def mean_action(theta: np.ndarray) -> np.ndarray:
    """Expected action E[u_k | x_k = x] for every (k, x); shape ``(N + 1, X)``."""
    theta = np.asarray(theta, dtype=float)
    return theta @ action_values(theta.shape[-1])


def policy_expectation(theta: np.ndarray, k: int) -> np.ndarray:
    """Expected action at time ``k`` as a function of the state."""
    theta = np.asarray(theta, dtype=float)
    return theta[k] @ action_values(theta.shape[-1])


def is_monotone(theta: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff the expected action is weakly increasing in x at every time."""
    mu = mean_action(theta)
    return bool(np.all(np.diff(mu, axis=1) >= -tol))


def uniform_policy(shape: tuple[int, int, int]) -> np.ndarray:
    return np.full(shape, 1.0 / shape[-1])


def occupation_to_conditional(
    pi: np.ndarray,
    previous: np.ndarray | None = None,
    eps_mass: float = EPS_MASS,
) -> tuple[np.ndarray, np.ndarray]:
    """Split an occupation measure into ``(theta, p)``.

    Negative entries (mid-iteration ADMM noise) are clamped to zero first.
    States whose mass is at most ``eps_mass`` get the corresponding row of
    ``previous`` when given, otherwise the uniform distribution.
    """
    pi = np.maximum(np.asarray(pi, dtype=float), 0.0)
    p = pi.sum(axis=-1)
    live = p > eps_mass
    theta = np.empty_like(pi)
    theta[live] = pi[live] / p[live][:, None]
    dead = ~live
    if np.any(dead):
        if previous is not None:
            theta[dead] = np.asarray(previous, dtype=float)[dead]
        else:
            theta[dead] = 1.0 / pi.shape[-1]
    return theta, p


def conditional_to_occupation(theta: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.asarray(theta, dtype=float) * np.asarray(p, dtype=float)[..., None]


def repair_policy(theta: np.ndarray) -> np.ndarray:
    """Clamp negatives to zero and renormalize each (k, x) row.

    Rows with no positive entry become uniform.
    """
    t = np.maximum(np.asarray(theta, dtype=float), 0.0)
    s = t.sum(axis=-1, keepdims=True)
    out = np.divide(t, s, out=np.full_like(t, 1.0 / t.shape[-1]), where=s > 0)
    return out


def propagate_distribution(model: MdpModel, theta: np.ndarray) -> np.ndarray:
    """Forward state distribution ``p[k, x]`` under ``theta`` from ``x0``."""
    theta = np.asarray(theta, dtype=float)
    p = np.zeros((model.N + 1, model.X))
    p[0, model.x0 - 1] = 1.0
    for k in range(model.N):
        # weight[u, i] = theta(i, u, k) p(i, k)
        weight = (theta[k] * p[k][:, None]).T
        p[k + 1] = np.einsum("ui,uij->j", weight, model.P[k])
    return p


def evaluate_expected_cost(
    model: MdpModel, theta: np.ndarray, p: np.ndarray | None = None
) -> float:
    """Expected cumulative cost of ``theta`` started from ``x0``."""
    theta = np.asarray(theta, dtype=float)
    if p is None:
        p = propagate_distribution(model, theta)
    N = model.N
    stage = np.sum(model.c * theta[:N] * p[:N, :, None])
    return float(stage + model.cN @ p[N])


def constraint_values(
    model: MdpModel, theta: np.ndarray, p: np.ndarray | None = None
) -> np.ndarray:
    """Expected value of each constraint functional under ``theta``."""
    if p is None:
        p = propagate_distribution(model, theta)
    pi = conditional_to_occupation(theta, p)
    return np.array([float(np.sum(con.beta * pi)) for con in model.constraints])


def occupation_constraint_values(model: MdpModel, pi: np.ndarray) -> np.ndarray:
    return np.array([float(np.sum(con.beta * pi)) for con in model.constraints])
