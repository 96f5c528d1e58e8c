import numpy as np
import pytest

from monotone_mdp import (
    ConfigError,
    Constraint,
    GeneratorSpec,
    IterationRecord,
    MdpModel,
    Mode,
    SolverConfig,
    Status,
    default_lambda,
    dp_solve,
    evaluate_expected_cost,
    machine_replacement_model,
    random_monotone_mdp,
    rho_sweep,
    solve,
)
from monotone_mdp.generator import with_random_constraints
from monotone_mdp.io import dumps_trace
from monotone_mdp.mdp import occupation_constraint_values
from monotone_mdp.solver import definitive_iteration, iterations_to_thresholds, relative_gap


def _mr(N=2):
    return machine_replacement_model(0.3, 1.0, 0.5, N)


def _suite():
    yield machine_replacement_model(0.3, 1.0, 0.5, 5)
    for seed in range(3):
        yield random_monotone_mdp(GeneratorSpec(4, 3, 5, seed))


# ------------------------------------------------------------------- config


def test_config_defaults():
    cfg = SolverConfig()
    assert (cfg.i_admm, cfg.i_sg, cfg.eps_cost, cfg.eps_res) == (10, 5, 0.01, 1e-4)
    assert cfg.boost_iter == 0 and cfg.mode is Mode.REGULARIZED


@pytest.mark.parametrize(
    "kw",
    [{"rho": 0.0}, {"rho": -1.0}, {"lam": -1.0}, {"lam": "big"}, {"i_admm": 0},
     {"i_sg": 0}, {"max_iter": 0}, {"boost_iter": -1}, {"eps_res": 0.0}, {"theta_source": "x"}],
)
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        SolverConfig(**kw)


def test_mode_accepts_strings():
    assert SolverConfig(mode="plain_admm").mode is Mode.PLAIN


# ------------------------------------------------------------ default_lambda


def test_default_lambda_unit_costs():
    m = _mr(4)
    m = MdpModel(2, 2, 4, 2, m.P, np.ones((4, 2, 2)), np.zeros(2))
    assert default_lambda(m) == 4.0


def test_default_lambda_zero_costs():
    m = _mr(3)
    m = MdpModel(2, 2, 3, 2, m.P, np.zeros((3, 2, 2)), np.zeros(2))
    assert default_lambda(m) == 0.0


def test_default_lambda_machine_replacement():
    # pairs (x,u): (1,1) 2R = 2, (1,2) 2 gamma = 1, (2,1) 2R = 2, (2,2) 0
    assert default_lambda(_mr(2)) == pytest.approx(5.0 / 4.0, abs=1e-15)


def test_relative_gap():
    assert relative_gap(1.01, 1.0) == pytest.approx(0.01)
    assert relative_gap(-0.99, -1.0) == pytest.approx(0.01)
    assert relative_gap(0.003, 0.0) == 0.003


# --------------------------------------------------------------------- solve


def test_plain_machine_replacement():
    m = _mr(2)
    J = dp_solve(m)[1]
    res = solve(m, SolverConfig(rho=5.0, mode="plain_admm", reference_cost=J))
    assert res.status is Status.CONVERGED
    assert relative_gap(evaluate_expected_cost(m, res.theta), J) < 0.01
    assert all(r.phase == "admm" for r in res.trace)


def test_regularized_has_sg_phases_and_matches_dp():
    m = _mr(5)
    J = dp_solve(m)[1]
    res = solve(m, SolverConfig(rho=5.0, reference_cost=J))
    assert any(r.phase == "sg" for r in res.trace)
    assert relative_gap(evaluate_expected_cost(m, res.theta), J) < 0.01


def test_trace_records():
    m = _mr(3)
    res = solve(m, SolverConfig(rho=5.0, max_iter=60, reference_cost=dp_solve(m)[1], stop_early=False))
    iters = [r.iter for r in res.trace]
    assert iters == list(range(1, 61))
    for r in res.trace:
        assert (r.primal_res is None) == (r.phase == "sg")
        assert r.cost_gap is not None


def test_trace_block_structure():
    m = random_monotone_mdp(GeneratorSpec(4, 3, 5, 0))
    cfg = SolverConfig(rho=5.0, max_iter=100, i_admm=7, i_sg=3, stop_early=False)
    phases = "".join("a" if r.phase == "admm" else "s" for r in solve(m, cfg).trace)
    assert phases == ("a" * 7 + "s" * 3) * 10


def test_boost_cuts_subgradient_phases():
    m = random_monotone_mdp(GeneratorSpec(4, 3, 5, 1))
    cfg = SolverConfig(rho=5.0, max_iter=200, boost_iter=40, stop_early=False)
    trace = solve(m, cfg).trace
    phases = "".join("a" if r.phase == "admm" else "s" for r in trace)
    assert phases[:40] == ("a" * 10 + "s" * 5) * 2 + "a" * 10
    assert set(phases[40:]) == {"a"}
    assert max(r.iter for r in trace if r.phase == "sg") <= 40


def test_boost_truncates_inside_a_phase():
    m = random_monotone_mdp(GeneratorSpec(4, 3, 5, 1))
    cfg = SolverConfig(rho=5.0, max_iter=50, boost_iter=12, stop_early=False)
    phases = "".join("a" if r.phase == "admm" else "s" for r in solve(m, cfg).trace)
    assert phases == "a" * 10 + "ss" + "a" * 38


def test_budget_exceeded_status():
    m = _mr(3)
    res = solve(m, SolverConfig(rho=5.0, max_iter=1, reference_cost=dp_solve(m)[1]))
    assert res.status is Status.MAX_ITER and res.iterations == 1


def test_final_policy_is_valid():
    m = random_monotone_mdp(GeneratorSpec(5, 3, 6, 2))
    res = solve(m, SolverConfig(rho=5.0, max_iter=77))
    assert np.allclose(res.theta.sum(axis=-1), 1.0, atol=1e-9)
    assert np.all(res.theta >= -1e-12)


def test_alternative_choices_run():
    m = random_monotone_mdp(GeneratorSpec(4, 3, 4, 3))
    J = dp_solve(m)[1]
    res = solve(m, SolverConfig(rho=5.0, max_iter=300, theta_source="alpha", keep_dual=False, reference_cost=J))
    assert relative_gap(evaluate_expected_cost(m, res.theta), J) < 0.05


def test_zero_lambda_still_alternates():
    m = _mr(3)
    res = solve(m, SolverConfig(rho=5.0, lam=0.0, max_iter=30, stop_early=False))
    assert [r.phase for r in res.trace].count("sg") == 10


@pytest.mark.parametrize("mode", ["plain_admm", "regularized"])
def test_deterministic_traces(mode):
    m = random_monotone_mdp(GeneratorSpec(5, 3, 8, 4))
    cfg = SolverConfig(rho=10.0, mode=mode, max_iter=150, reference_cost=dp_solve(m)[1])
    a, b = solve(m, cfg), solve(m, cfg)
    assert dumps_trace(a.trace) == dumps_trace(b.trace)
    assert a.theta.tobytes() == b.theta.tobytes()


@pytest.mark.parametrize("mode", ["plain_admm", "regularized"])
def test_final_cost_matches_dp_on_suite(mode):
    for m in _suite():
        J = dp_solve(m)[1]
        res = solve(m, SolverConfig(rho=5.0, mode=mode, max_iter=1000, reference_cost=J))
        assert relative_gap(evaluate_expected_cost(m, res.theta), J) < 0.01


def test_residual_settles_in_regularized_mode():
    # Convergence behaviour of the alternating scheme: with no boost cutoff
    # the residual at ADMM iterates must still drop below eps_res.
    failures = []
    for i, m in enumerate(_suite()):
        for rho in (1.0, 5.0, 30.0, 100.0):
            res = solve(m, SolverConfig(rho=rho, max_iter=2000, stop_early=False))
            best = min(r.primal_res for r in res.trace if r.phase == "admm")
            if not best < 1e-4:
                failures.append((i, rho, best))
    assert not failures, f"residual never below 1e-4 for (instance, rho, min residual): {failures}"


def test_constrained_solution_is_feasible():
    base = random_monotone_mdp(GeneratorSpec(3, 2, 3, 5))
    m = with_random_constraints(base, 2, seed=9, slack_factor=1.1)
    res = solve(m, SolverConfig(rho=5.0, mode="plain_admm", max_iter=3000, eps_res=1e-9,
                                reference_cost=dp_solve(base)[1]))
    viol = occupation_constraint_values(m, res.pi) - np.array([c.gamma for c in m.constraints])
    assert np.all(viol <= 1e-6)
    # the constraints are slack at the unconstrained optimum, so it stays optimal
    assert relative_gap(evaluate_expected_cost(m, res.theta), dp_solve(base)[1]) < 0.01


# ------------------------------------------------------- definitive / sweep


def _rec(i, ok, phase="admm"):
    return IterationRecord(i, phase, 1.0, 0.0, 1e-5 if ok else 1e-3)


def test_definitive_iteration_semantics():
    recs = [_rec(i, i >= 50 and i != 60) for i in range(1, 101)]
    assert definitive_iteration(recs, lambda r: r.primal_res < 1e-4) == 61
    recs[-1] = _rec(100, False)
    assert definitive_iteration(recs, lambda r: r.primal_res < 1e-4) is None


def test_definitive_iteration_ignores_sg_records():
    recs = [_rec(1, True), IterationRecord(2, "sg", 9.0), _rec(3, True)]
    assert definitive_iteration(recs, lambda r: r.primal_res < 1e-4) == 1


def test_iterations_to_thresholds_without_reference():
    recs = [_rec(i, i > 3) for i in range(1, 6)]
    assert iterations_to_thresholds(recs, SolverConfig()) == (4, None)


def test_sweep_tiny_budget_exceeds():
    m = random_monotone_mdp(GeneratorSpec(4, 3, 5, 0))
    rows = rho_sweep(m, [5.0], SolverConfig(max_iter=2))
    assert [(r.mode, r.iters_res, r.iters_cost) for r in rows] == [
        (Mode.PLAIN, None, None),
        (Mode.REGULARIZED, None, None),
    ]


def test_sweep_reproducible():
    m = random_monotone_mdp(GeneratorSpec(5, 3, 8, 11))
    cfg = SolverConfig(max_iter=120)
    assert rho_sweep(m, [5.0, 10.0, 30.0], cfg) == rho_sweep(m, [5.0, 10.0, 30.0], cfg)


def test_sweep_definitive_counts_match_trace():
    m = _mr(4)
    cfg = SolverConfig(max_iter=300, mode="plain_admm", reference_cost=dp_solve(m)[1], stop_early=False)
    row = rho_sweep(m, [5.0], cfg, modes=(Mode.PLAIN,))[0]
    assert (row.iters_res, row.iters_cost) == iterations_to_thresholds(solve(m, cfg).trace, cfg)
