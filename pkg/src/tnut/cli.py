"""Command-line front end: ``tnut <command> [options]``.

JSON outputs carry ``"schema": "tnut/1"``.  CSV outputs with a summary end
in one ``# {json}`` comment line.  Domain errors exit with status 2 and a
JSON error object on stderr; ``verify`` exits 1 when a suite fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    PhasePoint,
    admits_bound_orbits,
    conserved_history,
    integrate,
    sample_phase,
)
from .geometry import (
    DomainError,
    MetricParams,
    ParameterError,
    cartesian_field,
    check_theta,
    curvature_at,
    extended_field,
    flat_field,
)
from .spectral import SCHEMA, S_function, hitchin_T, index_annulus, index_ball
from .suites import DEFAULT_TOLERANCES, make_rng, relative_ricci, run_all, sample_points
from .symmetry import (
    KAPPA_CAL,
    anomaly_vector,
    appendix_anomaly_coeff,
    appendix_k3,
    runge_lenz_field,
    runge_lenz_sk,
    sk_residual,
)

GEODESIC_COLUMNS = [
    "tau", "r", "theta", "phi", "chi", "p_r", "p_theta", "p_phi", "p_chi",
    "E", "q", "J1", "J2", "J3", "K1", "K2", "K3",
]
ANOMALY_COLUMNS = ["r", "theta", "A_r_engine", "A_r_appendix", "residual"]
SPECTRUM_COLUMNS = ["t", "p", "q", "T"]


@dataclass(frozen=True)
class RunConfig:
    params: MetricParams
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: str | None = None
    fmt: str = "json"

    def tol(self, name: str) -> float:
        return self.tolerances[name]


class UsageError(ValueError):
    pass


# parsing ------------------------------------------------------------------


def _floats(text: str, n: int | tuple, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    allowed = (n,) if isinstance(n, int) else n
    if len(vals) not in allowed:
        raise UsageError(f"{what}: expected {' or '.join(map(str, allowed))} values, got {len(vals)}")
    return vals


def parse_params(text: str) -> MetricParams:
    v = _floats(text, (4, 5), "--params")
    return MetricParams(*v)


def parse_tolerances(items: list[str]) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for item in items or []:
        name, sep, val = item.partition("=")
        if not sep or name not in tol:
            raise UsageError(f"--tol expects NAME=VAL with NAME in {sorted(tol)}, got {item!r}")
        tol[name] = float(val)
    return tol


def parse_range(text: str, what: str) -> tuple[float, float, int]:
    """``start:stop:count`` (inclusive)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what}: expected start:stop:count, got {text!r}")
    try:
        n = int(parts[2])
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"{what}: bad range {text!r}") from None
    if n < 0:
        raise UsageError(f"{what}: count must be >= 0")
    return lo, hi, n


def _linspace(rng_spec) -> np.ndarray:
    lo, hi, n = rng_spec
    return np.linspace(lo, hi, n)


# output -------------------------------------------------------------------


def _json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(columns: list[str], rows, summary: dict | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if summary is not None:
        buf.write("# " + json.dumps(summary, sort_keys=True, allow_nan=False) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header(cfg: RunConfig, command: str) -> dict:
    return {"schema": SCHEMA, "command": command, "params": cfg.params.as_dict(), "seed": cfg.seed}


def _nested(a) -> list:
    return np.vectorize(float, otypes=[float])(np.asarray(a)).tolist()


# commands -----------------------------------------------------------------


def cmd_curvature(cfg: RunConfig, point, chart: str = "spherical", metric: str = "extended") -> dict:
    if metric == "flat":
        field_ = flat_field(4)
    elif chart == "cartesian":
        field_ = cartesian_field(cfg.params)
    else:
        field_ = extended_field(cfg.params)
    if chart == "spherical" and metric != "flat":
        if not point[0] > 0:
            raise DomainError("r must be positive")
        check_theta(point[1])
    cb = curvature_at(field_, point)
    rel = relative_ricci(cb)
    rep = _header(cfg, "curvature")
    rep.update(
        {
            "chart": chart,
            "metric": metric,
            "point": list(map(float, point)),
            "g": _nested(cb.g),
            "christoffel": _nested(cb.gamma),
            "riemann": _nested(cb.riemann),
            "ricci": _nested(cb.ricci),
            "scalar": float(cb.scalar),
            "max_abs_ricci": float(np.max(np.abs(_nested(cb.ricci)))),
            "max_abs_riemann": float(np.max(np.abs(_nested(cb.riemann)))),
            "relative_ricci": rel,
            "ricci_flat": bool(rel <= cfg.tol("ricci")),
        }
    )
    return rep


def cmd_anomaly(cfg: RunConfig, r_spec, theta_spec, axis: int = 3) -> tuple[list, dict]:
    """Rows (r, theta, A^r engine, A^r closed form, residual) and a summary."""
    rows, skipped = [], 0
    for r in _linspace(r_spec):
        for th in _linspace(theta_spec):
            try:
                if not r > 0:
                    raise DomainError("r must be positive")
                check_theta(th)
                eng = float(anomaly_vector(cfg.params, axis, (r, th, 0.0, 0.0))[0])
                ref = appendix_anomaly_coeff(cfg.params, r, th) if axis == 3 else float("nan")
            except DomainError:
                skipped += 1
                continue
            resid = abs(eng - KAPPA_CAL * ref) if axis == 3 else 0.0
            rows.append((float(r), float(th), eng, ref if axis == 3 else 0.0, resid))
    summary = {
        "schema": SCHEMA,
        "axis": axis,
        "kappa_cal": KAPPA_CAL,
        "max_residual": max((row[4] for row in rows), default=0.0),
        "max_abs_engine": max((abs(row[2]) for row in rows), default=0.0),
        "rows": len(rows),
        "skipped": skipped,
    }
    return rows, summary


def cmd_sk_check(cfg: RunConfig, samples: int, axes=(1, 2, 3)) -> dict:
    rng = make_rng(cfg.seed)
    metric = extended_field(cfg.params)
    out = []
    worst, worst_k3 = 0.0, 0.0
    for x in sample_points(rng, samples):
        entry = {"point": list(x)}
        for i in axes:
            res = sk_residual(runge_lenz_field(cfg.params, i), metric, x)
            entry[f"k{i}"] = res
            worst = max(worst, res)
        if 3 in axes:
            a = runge_lenz_sk(3, cfg.params, x)
            b = appendix_k3(cfg.params, x)
            dev = float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float))) / np.max(np.abs(np.asarray(b, float))))
            entry["k3_vs_closed_form"] = dev
            worst_k3 = max(worst_k3, dev)
        out.append(entry)
    rep = _header(cfg, "sk-check")
    rep.update(
        {
            "samples": out,
            "max_residual": worst,
            "max_k3_deviation": worst_k3,
            "passed": bool(worst <= cfg.tol("sk") and worst_k3 <= cfg.tol("k3")),
        }
    )
    return rep


def cmd_geodesic(cfg: RunConfig, initial: PhasePoint | None, horizon: float) -> tuple[list, dict]:
    if initial is None:
        initial = sample_phase(cfg.params, make_rng(cfg.seed), bound=admits_bound_orbits(cfg.params))
    traj = integrate(cfg.params, initial, horizon, cfg.tol("ode"))
    hist = conserved_history(cfg.params, traj.states)
    rows = [(t, *y, *c) for t, y, c in zip(traj.tau, traj.states, hist)]
    summary = {
        "schema": SCHEMA,
        "initial": initial.as_array().tolist(),
        "horizon": horizon,
        "tol": cfg.tol("ode"),
        "drift": traj.drift,
        "drift_ok": bool(max(traj.drift.values()) <= cfg.tol("drift")),
        "steps": traj.steps,
        "rejected": traj.rejected,
        "truncated": traj.truncated,
        "message": traj.message,
    }
    return rows, summary


def cmd_spectrum(cfg: RunConfig, t_spec, cap: int) -> list:
    rows = []
    ts = _linspace(t_spec)
    if len(ts) and ts.min() <= 0:
        raise DomainError("t must be positive")
    for p in range(1, cap + 1):
        for q in range(1, cap + 1):
            for t in ts:
                rows.append((float(t), p, q, hitchin_T(float(t), p, q)))
    return rows


def cmd_flow(cfg: RunConfig, l1: float, l2: float) -> dict:
    for v in (l1, l2):
        if not v > 0:
            raise DomainError("Berger parameters must be positive")
    s1, _ = S_function(l1)
    s2, modes = S_function(l2)
    rep = _header(cfg, "flow")
    rep.update({"lambda1": l1, "lambda2": l2, "S1": s1, "S2": s2, "flow": s2 - s1})
    return rep


def cmd_index(cfg: RunConfig, ball: float | None = None, annulus=None) -> dict:
    if (ball is None) == (annulus is None):
        raise UsageError("give exactly one of --ball or --annulus")
    if ball is not None:
        if not ball > 0:
            raise DomainError("ball radius must be positive")
        rep = index_ball(cfg.params, ball)
    else:
        l1, l2 = annulus
        if not 0 < l1 <= l2:
            raise DomainError("annulus needs 0 < l1 <= l2")
        rep = index_annulus(cfg.params, l1, l2)
    return rep.to_dict()


def cmd_verify(cfg: RunConfig) -> dict:
    rep = run_all(cfg.params, cfg.seed, cfg.tolerances)
    rep["command"] = "verify"
    return rep


# argument handling --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", default="1,1,0,1", help="a,b,c,d[,mu] (default 1,1,0,1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VAL")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)

    ap = argparse.ArgumentParser(prog="tnut", description="Extended Taub-NUT geometry, symmetries and index tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", parents=[common], help="Christoffel, Riemann, Ricci at a point")
    p.add_argument("--point", default="1,1,0,0", help="four coordinates")
    p.add_argument("--chart", choices=("spherical", "cartesian"), default="spherical")
    p.add_argument("--metric", choices=("extended", "flat"), default="extended")

    p = sub.add_parser("anomaly", parents=[common], help="anomaly coefficient on an (r, theta) grid")
    p.add_argument("--r", dest="r_range", default="0.5:5:10", help="start:stop:count")
    p.add_argument("--theta", dest="theta_range", default="0.3:2.8:6", help="start:stop:count")
    p.add_argument("--axis", type=int, choices=(1, 2, 3), default=3)

    p = sub.add_parser("sk-check", parents=[common], help="Killing residuals of the Runge-Lenz tensors")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--axis", type=int, choices=(1, 2, 3), default=None)

    p = sub.add_parser("geodesic", parents=[common], help="integrate one geodesic")
    p.add_argument("--initial", default=None, help="r,theta,phi,chi,p_r,p_theta,p_phi,p_chi")
    p.add_argument("--horizon", type=float, default=100.0)

    p = sub.add_parser("spectrum", parents=[common], help="small Berger eigenvalue branches")
    p.add_argument("--t", dest="t_range", default="0.5:20:40", help="start:stop:count")
    p.add_argument("--cap", type=int, default=3, help="p, q range 1..cap")

    p = sub.add_parser("flow", parents=[common], help="spectral flow between two Berger parameters")
    p.add_argument("--lambdas", required=True, help="l1,l2")

    p = sub.add_parser("index", parents=[common], help="APS index on a ball or annulus")
    p.add_argument("--ball", type=float, default=None)
    p.add_argument("--annulus", default=None, help="l1,l2")

    sub.add_parser("verify", parents=[common], help="run every invariant suite")
    return ap


_CSV_COMMANDS = {"anomaly": "csv", "geodesic": "csv", "spectrum": "csv"}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        fmt = args.fmt or _CSV_COMMANDS.get(args.command, "json")
        if fmt == "csv" and args.command not in _CSV_COMMANDS:
            raise UsageError(f"{args.command} only writes JSON")
        cfg = RunConfig(parse_params(args.params), args.seed, parse_tolerances(args.tol), args.out, fmt)
        status = 0
        if args.command == "curvature":
            text = _json_text(cmd_curvature(cfg, _floats(args.point, 4, "--point"), args.chart, args.metric))
        elif args.command == "anomaly":
            rows, summary = cmd_anomaly(
                cfg, parse_range(args.r_range, "--r"), parse_range(args.theta_range, "--theta"), args.axis
            )
            text = _tabular(cfg, "anomaly", ANOMALY_COLUMNS, rows, summary)
        elif args.command == "sk-check":
            axes = (args.axis,) if args.axis else (1, 2, 3)
            rep = cmd_sk_check(cfg, args.samples, axes)
            text = _json_text(rep)
        elif args.command == "geodesic":
            initial = None
            if args.initial is not None:
                initial = PhasePoint.from_array(_floats(args.initial, 8, "--initial"))
            rows, summary = cmd_geodesic(cfg, initial, args.horizon)
            text = _tabular(cfg, "geodesic", GEODESIC_COLUMNS, rows, summary)
        elif args.command == "spectrum":
            rows = cmd_spectrum(cfg, parse_range(args.t_range, "--t"), args.cap)
            text = _tabular(cfg, "spectrum", SPECTRUM_COLUMNS, rows, None)
        elif args.command == "flow":
            l1, l2 = _floats(args.lambdas, 2, "--lambdas")
            text = _json_text(cmd_flow(cfg, l1, l2))
        elif args.command == "index":
            ann = _floats(args.annulus, 2, "--annulus") if args.annulus else None
            text = _json_text(cmd_index(cfg, args.ball, ann))
        else:
            rep = cmd_verify(cfg)
            status = 0 if rep["all_passed"] else 1
            text = _json_text(rep)
    except (DomainError, ValueError) as exc:
        kind = "usage" if isinstance(exc, UsageError) else type(exc).__name__
        err = {"schema": SCHEMA, "error": {"type": kind, "message": str(exc),
                                           "parameter": isinstance(exc, ParameterError)}}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 2
    _emit(cfg, text)
    return status


def _tabular(cfg: RunConfig, command: str, columns, rows, summary) -> str:
    if cfg.fmt == "csv":
        return _csv_text(columns, rows, summary)
    rep = _header(cfg, command)
    rep["columns"] = columns
    rep["rows"] = [[float(v) if not isinstance(v, (int, np.integer)) else int(v) for v in row] for row in rows]
    if summary is not None:
        rep["summary"] = {k: v for k, v in summary.items() if k != "schema"}
    if any(not math.isfinite(v) for row in rep["rows"] for v in row):
        raise DomainError("non-finite value in output")
    return _json_text(rep)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
