"""Alternating ADMM / regularized-subgradient solver and the rho sweep.

Regularized mode repeats:

1. ``i_admm`` ADMM steps on the occupation-measure LP;
2. split the z-iterate into ``(theta, p)``;
3. ``i_sg`` switching subgradient steps on the regularized problem in
   ``theta`` with ``p`` frozen, using one step counter for the whole run;
4. repair ``theta`` and reload ``alpha = z = theta * p``, keeping ``eta``.

Every ADMM step and every subgradient step advances the iteration index by
one. Plain mode only runs step 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .admm import AdmmState, admm_setup, admm_step, primal_residual
from .dp import dp_solve
from .errors import ConfigError, ZeroDirection
from .isotonic import RegularizedProblem, sg_step
from .lp import StandardFormLp, build_lp, devectorize, vectorize
from .mdp import (
    MdpModel,
    conditional_to_occupation,
    evaluate_expected_cost,
    occupation_to_conditional,
    repair_policy,
)


class Mode(str, enum.Enum):
    PLAIN = "plain_admm"
    REGULARIZED = "regularized"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolverConfig:
    rho: float = 5.0
    lam: float | str = "auto"
    i_admm: int = 10
    i_sg: int = 5
    max_iter: int = 1000
    eps_cost: float = 0.01
    eps_res: float = 1e-4
    boost_iter: int = 0
    mode: Mode = Mode.REGULARIZED
    reference_cost: float | None = None
    # Run the full budget even after both thresholds hold (used by the sweep).
    stop_early: bool = True
    # Alternatives for the choices the algorithm leaves open.
    theta_source: str = "z"  # or "alpha"
    keep_dual: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho!r}")
        if isinstance(self.lam, str):
            if self.lam != "auto":
                raise ConfigError(f"lambda must be a number or 'auto', got {self.lam!r}")
        elif not self.lam >= 0:
            raise ConfigError(f"lambda must be nonnegative, got {self.lam!r}")
        for name in ("i_admm", "i_sg", "max_iter"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.boost_iter < 0:
            raise ConfigError("boost_iter must be nonnegative")
        if not (self.eps_cost > 0 and self.eps_res > 0):
            raise ConfigError("thresholds must be positive")
        if self.theta_source not in ("z", "alpha"):
            raise ConfigError(f"theta_source must be 'z' or 'alpha', got {self.theta_source!r}")


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    phase: str  # "admm" or "sg"
    cost: float
    cost_gap: float | None = None
    primal_res: float | None = None


@dataclass
class SolveResult:
    theta: np.ndarray
    trace: list[IterationRecord]
    status: Status
    pi: np.ndarray  # occupation measure of the final z-iterate
    state: AdmmState

    @property
    def iterations(self) -> int:
        return self.trace[-1].iter if self.trace else 0


def default_lambda(model: MdpModel) -> float:
    """Mean over (x, u) of the cost summed over the horizon, terminal included.

    Costs may be negative, so this can be negative; ``solve`` uses its
    magnitude as the weight.
    """
    total = model.c.sum(axis=0) + model.cN[:, None]
    return float(total.sum() / (model.X * model.U))


def relative_gap(cost: float, reference: float) -> float:
    """|c - c*| / |c*|; falls back to the absolute gap when c* == 0."""
    gap = abs(cost - reference)
    return gap / abs(reference) if reference != 0 else gap


def _record_admm(state, model, config, it, previous):
    pi = devectorize(state.z if config.theta_source == "z" else state.alpha, model)
    theta, p = occupation_to_conditional(pi, previous)
    cost = evaluate_expected_cost(model, theta)
    gap = None if config.reference_cost is None else abs(cost - config.reference_cost)
    rec = IterationRecord(it, "admm", cost, gap, primal_residual(state))
    return rec, theta, p


def _converged(rec: IterationRecord, config: SolverConfig) -> bool:
    if rec.primal_res is None or not rec.primal_res < config.eps_res:
        return False
    if config.reference_cost is None:
        return True
    return relative_gap(rec.cost, config.reference_cost) < config.eps_cost


def solve(
    model: MdpModel, config: SolverConfig, lp: StandardFormLp | None = None
) -> SolveResult:
    lp = build_lp(model) if lp is None else lp
    state = admm_setup(lp, config.rho)
    lam = abs(default_lambda(model)) if config.lam == "auto" else float(config.lam)
    regularized = config.mode is Mode.REGULARIZED
    boost = config.boost_iter

    trace: list[IterationRecord] = []
    it = 0
    n_sg = 0
    theta = p = None
    status = Status.MAX_ITER

    def sg_allowed(i: int) -> bool:
        return regularized and (boost == 0 or i < boost)

    while it < config.max_iter:
        # ADMM phase; once subgradient phases are over it runs to the end
        n_admm = config.i_admm if sg_allowed(it) else config.max_iter - it
        for _ in range(min(n_admm, config.max_iter - it)):
            admm_step(state, lp)
            it += 1
            rec, theta, p = _record_admm(state, model, config, it, theta)
            trace.append(rec)
            if config.stop_early and _converged(rec, config):
                status = Status.CONVERGED
                break
        if status is Status.CONVERGED:
            break
        if it >= config.max_iter or not sg_allowed(it):
            continue

        prob = RegularizedProblem(model, p, lam)
        for _ in range(config.i_sg):
            if it >= config.max_iter or not sg_allowed(it):
                break
            n_sg += 1
            try:
                theta = sg_step(prob, theta, n_sg)
            except ZeroDirection:
                pass
            it += 1
            cost = evaluate_expected_cost(model, repair_policy(theta))
            gap = None if config.reference_cost is None else abs(cost - config.reference_cost)
            trace.append(IterationRecord(it, "sg", cost, gap, None))

        theta = repair_policy(theta)
        alpha = state.z.copy()
        alpha[: lp.n_decision] = vectorize(conditional_to_occupation(theta, p))
        state.alpha = alpha
        state.z = np.maximum(alpha, 0.0)
        if not config.keep_dual:
            state.eta = np.zeros_like(state.eta)

    pi = np.maximum(devectorize(state.z, model), 0.0)
    theta_final, _ = occupation_to_conditional(pi, theta)
    return SolveResult(theta_final, trace, status, pi, state)


def long_run_reference(model: MdpModel, config: SolverConfig) -> float:
    """Cost of a plain-ADMM run with ten times the iteration budget."""
    cfg = replace(
        config,
        mode=Mode.PLAIN,
        max_iter=10 * config.max_iter,
        reference_cost=None,
        stop_early=False,
    )
    res = solve(model, cfg)
    return evaluate_expected_cost(model, res.theta)


def reference_cost(model: MdpModel, config: SolverConfig) -> float:
    if not model.constraints:
        return dp_solve(model)[1]
    return long_run_reference(model, config)


def definitive_iteration(records, holds) -> int | None:
    """First ADMM iterate from which ``holds(record)`` is true for good.

    Returns None when the last recorded ADMM iterate fails (budget exceeded).
    """
    admm = [r for r in records if r.phase == "admm"]
    start = None
    for r in admm:
        if holds(r):
            if start is None:
                start = r.iter
        else:
            start = None
    return start


@dataclass(frozen=True)
class SweepRow:
    rho: float
    mode: Mode
    iters_res: int | None
    iters_cost: int | None


def iterations_to_thresholds(
    trace: list[IterationRecord], config: SolverConfig
) -> tuple[int | None, int | None]:
    it_res = definitive_iteration(
        trace, lambda r: r.primal_res is not None and r.primal_res < config.eps_res
    )
    if config.reference_cost is None:
        return it_res, None
    it_cost = definitive_iteration(
        trace, lambda r: relative_gap(r.cost, config.reference_cost) < config.eps_cost
    )
    return it_res, it_cost


def rho_sweep(
    model: MdpModel,
    rhos,
    config: SolverConfig,
    modes=(Mode.PLAIN, Mode.REGULARIZED),
) -> list[SweepRow]:
    """Iterations needed to definitively reach each threshold, per rho and mode.

    Each run uses the full ``max_iter`` budget; ``None`` marks a threshold
    not held at the end of the budget.
    """
    ref = config.reference_cost
    if ref is None:
        ref = reference_cost(model, config)
    lp = build_lp(model)
    rows = []
    for rho in rhos:
        for mode in modes:
            cfg = replace(
                config, rho=float(rho), mode=Mode(mode), reference_cost=ref, stop_early=False
            )
            res = solve(model, cfg, lp=lp)
            rows.append(SweepRow(float(rho), Mode(mode), *iterations_to_thresholds(res.trace, cfg)))
    return rows
