"""Model, policy, trace and benchmark file formats.

Model and policy files are JSON documents with explicit nested arrays; reals
are written with 17 significant digits so they read back bit-for-bit.
Traces and benchmark tables are CSV with an empty field for undefined values.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InvalidModel, ModelFileError
from .mdp import Constraint, MdpModel

TRACE_HEADER = ("iter", "phase", "cost", "cost_gap", "primal_res")
BENCH_HEADER = ("rho", "seed", "mode", "iters_res", "iters_cost")


def fmt_real(v: float) -> str:
    return format(float(v), ".17g")


def _nested(arr: np.ndarray, indent: int = 0) -> str:
    if arr.ndim == 1:
        return "[" + ", ".join(fmt_real(v) for v in arr) + "]"
    pad = "  " * (indent + 1)
    inner = (",\n" + pad).join(_nested(a, indent + 1) for a in arr)
    return "[\n" + pad + inner + "\n" + "  " * indent + "]"


def dumps_model(model: MdpModel) -> str:
    parts = [
        f'  "X": {model.X}',
        f'  "U": {model.U}',
        f'  "N": {model.N}',
        f'  "x0": {model.x0}',
        '  "P": ' + _nested(model.P, 1),
        '  "cost": ' + _nested(model.c, 1),
        '  "terminal_cost": ' + _nested(model.cN, 1),
    ]
    cons = [
        "    {\n"
        '      "beta": ' + _nested(con.beta, 3) + ",\n"
        '      "gamma": ' + fmt_real(con.gamma) + "\n    }"
        for con in model.constraints
    ]
    if cons:
        parts.append('  "constraints": [\n' + ",\n".join(cons) + "\n  ]")
    else:
        parts.append('  "constraints": []')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_model(model: MdpModel, path) -> None:
    Path(path).write_text(dumps_model(model))


def _parse(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _int_field(doc: dict, key: str, source: str) -> int:
    if key not in doc:
        raise ModelFileError(f"{source}: missing member '{key}'")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelFileError(f"{source}: {key}: expected an integer, got {v!r}")
    return v


def _array(value, shape: tuple[int, ...], path: str) -> np.ndarray:
    """Check nesting depth/lengths with path-qualified errors, then convert."""

    def walk(v, depth: int, where: str):
        if depth == len(shape):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ModelFileError(f"{where}: expected a number, got {v!r}")
            return
        if not isinstance(v, list):
            raise ModelFileError(f"{where}: expected an array of length {shape[depth]}")
        if len(v) != shape[depth]:
            raise ModelFileError(
                f"{where}: expected {shape[depth]} entries, got {len(v)}"
            )
        for i, item in enumerate(v):
            walk(item, depth + 1, f"{where}[{i}]")

    walk(value, 0, path)
    return np.array(value, dtype=float).reshape(shape)


def loads_model(text: str, source: str = "<model>") -> MdpModel:
    doc = _parse(text, source)
    if not isinstance(doc, dict):
        raise ModelFileError(f"{source}: top level must be an object")
    X, U, N = (_int_field(doc, k, source) for k in ("X", "U", "N"))
    x0 = _int_field(doc, "x0", source)
    for key, v in (("X", X), ("U", U), ("N", N)):
        if v < 1:
            raise ModelFileError(f"{source}: {key}: must be positive, got {v}")
    if not 1 <= x0 <= X:
        raise ModelFileError(f"{source}: x0: must lie in 1..{X}, got {x0}")
    for key in ("P", "cost", "terminal_cost"):
        if key not in doc:
            raise ModelFileError(f"{source}: missing member '{key}'")
    P = _array(doc["P"], (N, U, X, X), f"{source}: P")
    c = _array(doc["cost"], (N, X, U), f"{source}: cost")
    cN = _array(doc["terminal_cost"], (X,), f"{source}: terminal_cost")

    bad = np.argwhere(P < 0)
    if bad.size:
        k, u, i, j = bad[0]
        raise ModelFileError(f"{source}: P[{k}][{u}][{i}][{j}]: negative probability")
    err = np.abs(P.sum(axis=-1) - 1.0)
    bad = np.argwhere(err > 1e-12)
    if bad.size:
        k, u, i = bad[0]
        raise ModelFileError(
            f"{source}: P[{k}][{u}][{i}]: row sums to {fmt_real(P[k, u, i].sum())}, expected 1"
        )

    raw = doc.get("constraints", [])
    if not isinstance(raw, list):
        raise ModelFileError(f"{source}: constraints: expected an array")
    cons = []
    for l, item in enumerate(raw):
        where = f"{source}: constraints[{l}]"
        if not isinstance(item, dict) or "beta" not in item or "gamma" not in item:
            raise ModelFileError(f"{where}: expected an object with 'beta' and 'gamma'")
        beta = _array(item["beta"], (N + 1, X, U), f"{where}.beta")
        gamma = item["gamma"]
        if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
            raise ModelFileError(f"{where}.gamma: expected a number")
        cons.append(Constraint(beta, gamma))
    try:
        return MdpModel(X=X, U=U, N=N, x0=x0, P=P, c=c, cN=cN, constraints=tuple(cons))
    except InvalidModel as exc:
        raise ModelFileError(f"{source}: {exc}") from exc


def read_model(path) -> MdpModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelFileError(f"{path}: {exc.strerror or exc}") from exc
    return loads_model(text, str(path))


def dumps_policy(theta: np.ndarray, cost: float | None = None) -> str:
    theta = np.asarray(theta, dtype=float)
    n1, X, U = theta.shape
    parts = [f'  "X": {X}', f'  "U": {U}', f'  "N": {n1 - 1}']
    if cost is not None:
        parts.append(f'  "expected_cost": {fmt_real(cost)}')
    parts.append('  "theta": ' + _nested(theta, 1))
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_policy(theta: np.ndarray, path, cost: float | None = None) -> None:
    Path(path).write_text(dumps_policy(theta, cost))


def read_policy(path) -> np.ndarray:
    path = Path(path)
    doc = _parse(path.read_text(), str(path))
    X, U, N = (_int_field(doc, k, str(path)) for k in ("X", "U", "N"))
    return _array(doc.get("theta"), (N + 1, X, U), f"{path}: theta")


def _cell(v) -> str:
    return "" if v is None else fmt_real(v)


def dumps_trace(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in records:
        w.writerow([r.iter, r.phase, _cell(r.cost), _cell(r.cost_gap), _cell(r.primal_res)])
    return buf.getvalue()


def write_trace(records, path) -> None:
    Path(path).write_text(dumps_trace(records))


def read_trace(path):
    from .solver import IterationRecord

    def opt(s: str):
        return None if s == "" else float(s)

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_HEADER:
            raise ModelFileError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            IterationRecord(
                int(row["iter"]), row["phase"], float(row["cost"]),
                opt(row["cost_gap"]), opt(row["primal_res"]),
            )
            for row in reader
        ]


def dumps_bench(rows) -> str:
    """``rows`` are (rho, seed, mode, iters_res, iters_cost) tuples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for rho, seed, mode, it_res, it_cost in rows:
        w.writerow([
            fmt_real(rho),
            "" if seed is None else seed,
            mode,
            "" if it_res is None else it_res,
            "" if it_cost is None else it_cost,
        ])
    return buf.getvalue()


def read_bench(path) -> list[tuple]:
    def opt_int(s: str):
        return None if s == "" else int(s)

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            (float(r["rho"]), opt_int(r["seed"]), r["mode"], opt_int(r["iters_res"]),
             opt_int(r["iters_cost"]))
            for r in reader
        ]
