"""Nearly-isotonic regularized problem in the conditional policy ``theta``.

With the state distribution ``p`` held fixed, the relaxed problem is::

    min_theta  sum c(x,u,k) theta(x,u,k) p(x,k)            (linear cost, f1)
             + lam * sum_k sum_x { mu_k(x) - mu_k(x+1) }_+  (penalty, f2)
    s.t.       sum_u theta(x,u,k) = 1,   theta >= 0

where ``mu_k(x) = sum_u u theta(x,u,k)``. It is attacked with a switching
projected subgradient method: step on the objective when the worst negative
entry is small relative to the step size, otherwise step on the constraint
``max(-theta) <= 0``; then project onto the sum-to-one hyperplanes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroDirection
from .mdp import MdpModel, action_values, mean_action

ZERO_DIRECTION_TOL = 1e-15


def diameter_bound(X: int, N: int) -> float:
    """Upper bound on ||theta1 - theta2||_2 over row-stochastic policies."""
    return math.sqrt(2 * X * (N + 1))


@dataclass(frozen=True)
class RegularizedProblem:
    model: MdpModel
    p_fixed: np.ndarray
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam!r}")
        p = np.array(self.p_fixed, dtype=float)
        if p.shape != (self.model.N + 1, self.model.X):
            raise ValueError(f"p_fixed has shape {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "p_fixed", p)

    @property
    def R(self) -> float:
        return diameter_bound(self.model.X, self.model.N)

    def cost_weights(self) -> np.ndarray:
        """Gradient of the linear cost: c(x,u,k) p(x,k), with cN for k = N."""
        m = self.model
        w = np.empty(m.policy_shape)
        w[: m.N] = m.c * self.p_fixed[: m.N, :, None]
        w[m.N] = np.outer(self.p_fixed[m.N] * m.cN, np.ones(m.U))
        return w


def _violations(theta: np.ndarray) -> np.ndarray:
    """mu_k(x) - mu_k(x+1), shape (N+1, X-1)."""
    mu = mean_action(theta)
    return mu[:, :-1] - mu[:, 1:]


def penalty(theta: np.ndarray, lam: float) -> float:
    return float(lam * np.maximum(_violations(theta), 0.0).sum())


def objective(prob: RegularizedProblem, theta: np.ndarray) -> float:
    theta = np.asarray(theta, dtype=float)
    f1 = float(np.sum(prob.cost_weights() * theta))
    return f1 + penalty(theta, prob.lam)


def subgradient_objective(prob: RegularizedProblem, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = prob.cost_weights()
    if prob.lam == 0 or theta.shape[1] < 2:
        return g
    active = (_violations(theta) > 0).astype(float)  # [k, x] for x = 1..X-1
    # +1 where (x', x'+1) is violated, -1 where (x'-1, x') is violated
    coef = np.zeros(theta.shape[:2])
    coef[:, :-1] += active
    coef[:, 1:] -= active
    return g + prob.lam * coef[:, :, None] * action_values(theta.shape[-1])


def constraint_value_and_subgradient(theta: np.ndarray) -> tuple[float, np.ndarray]:
    """``max(-theta)`` and the indicator subgradient at its first argmax.

    The argmax is taken in C order over (k, x, u), so ties resolve to the
    smallest k, then x, then u.
    """
    theta = np.asarray(theta, dtype=float)
    flat = -theta.ravel()
    idx = int(np.argmax(flat))
    g = np.zeros(flat.size)
    g[idx] = -1.0
    return float(flat[idx]), g.reshape(theta.shape)


def project_affine(theta: np.ndarray) -> np.ndarray:
    """Euclidean projection of every (k, x) row onto ``sum_u theta = 1``."""
    theta = np.asarray(theta, dtype=float)
    return theta - (theta.sum(axis=-1, keepdims=True) - 1.0) / theta.shape[-1]


def step_size(R: float, n: int) -> float:
    return R / math.sqrt(n + 0.5)


def sg_step(prob: RegularizedProblem, theta: np.ndarray, n: int) -> np.ndarray:
    """One switching projected-subgradient step at global step counter ``n``.

    Raises ZeroDirection if the chosen direction vanishes.
    """
    if n < 1:
        raise ValueError(f"step counter must be >= 1, got {n}")
    theta = np.asarray(theta, dtype=float)
    h = step_size(prob.R, n)
    fbar, gbar = constraint_value_and_subgradient(theta)
    # ||gbar||_2 == 1: a single -1 entry
    if fbar < h:
        d = subgradient_objective(prob, theta)
        norm = float(np.linalg.norm(d))
    else:
        d, norm = gbar, 1.0
    if norm < ZERO_DIRECTION_TOL:
        raise ZeroDirection(f"subgradient norm {norm:.3g} at step {n}")
    return project_affine(theta - (h / norm) * d)


def uses_constraint_branch(theta: np.ndarray, R: float, n: int) -> bool:
    fbar, _ = constraint_value_and_subgradient(theta)
    return fbar >= step_size(R, n)

