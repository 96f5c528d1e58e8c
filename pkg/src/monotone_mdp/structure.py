"""Checker for the sufficient conditions (A1)-(A4) of a monotone optimal policy.

(A1) costs weakly decreasing in the state,
(A2) transition rows first-order stochastically increasing in the state,
(A3) costs submodular in (state, action),
(A4) transition tail sums supermodular in (state, action).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mdp import MdpModel

CHECK_TOL = 1e-10


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    violation: dict | None = None  # first violating index tuple, 1-based states/actions
    description: str = ""

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        line = f"{self.name}: {status}"
        if self.violation is not None:
            where = ", ".join(f"{k}={v}" for k, v in self.violation.items())
            line += f" (first violation at {where})"
        return line


@dataclass(frozen=True)
class MonotoneReport:
    conditions: tuple[ConditionResult, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.conditions)


def tail_sums(P: np.ndarray) -> np.ndarray:
    """T[..., l] = sum_{j >= l} P[..., j]."""
    return np.cumsum(P[..., ::-1], axis=-1)[..., ::-1]


def _first(mask: np.ndarray, names: tuple[str, ...], one_based: tuple[bool, ...]):
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None
    return {n: int(v) + (1 if ob else 0) for n, v, ob in zip(names, hits[0], one_based)}


def check_monotone_assumptions(model: MdpModel, tol: float = CHECK_TOL) -> MonotoneReport:
    c, cN, P = model.c, model.cN, model.P

    # A1: c(x+1,u,k) <= c(x,u,k) and cN(x+1) <= cN(x)
    v = _first(c[:, 1:, :] > c[:, :-1, :] + tol, ("k", "x", "u"), (False, True, True))
    if v is None:
        vt = _first(cN[1:] > cN[:-1] + tol, ("x",), (True,))
        if vt is not None:
            v = {"k": model.N, **vt}
    a1 = ConditionResult("A1", v is None, v, "costs decreasing in x")

    T = tail_sums(P)  # [k, u, i, l]
    v = _first(
        T[:, :, :-1, :] > T[:, :, 1:, :] + tol, ("k", "u", "i", "l"), (False, True, True, True)
    )
    a2 = ConditionResult("A2", v is None, v, "rows stochastically increasing in i")

    D = c[:, :, 1:] - c[:, :, :-1]  # [k, x, u]
    v = _first(D[:, 1:, :] > D[:, :-1, :] + tol, ("k", "x", "u"), (False, True, True))
    a3 = ConditionResult("A3", v is None, v, "costs submodular in (x, u)")

    E = T[:, 1:, :, :] - T[:, :-1, :, :]  # [k, u, i, l]
    v = _first(
        E[:, :, :-1, :] > E[:, :, 1:, :] + tol, ("k", "u", "i", "l"), (False, True, True, True)
    )
    a4 = ConditionResult("A4", v is None, v, "tail sums supermodular in (i, u)")

    return MonotoneReport((a1, a2, a3, a4))
