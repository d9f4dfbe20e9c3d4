"""Invariant suites behind ``tnut verify``.

Each suite returns a :class:`SuiteResult` made of named checks
``value <= threshold``.  Sampling goes through a Philox generator keyed by
the run seed, so a fixed seed gives byte-identical reports.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dual
from .dynamics import (
    admits_bound_orbits,
    angular_momentum,
    conserved_set,
    energy,
    hamiltonian,
    integrate_batch,
    poisson_bracket,
    runge_lenz,
    sample_phase,
)
from .geometry import (
    MetricParams,
    berger_form_metric,
    berger_scalar_curvature,
    cartesian_field,
    cartesian_potentials,
    curvature_at,
    dirac_apply,
    dirac_closed_form,
    extended_field,
    extended_metric,
    gamma_matrices,
    metric_jet1,
    spin_connection_at,
    spin_connection_from_christoffel,
    tetrad_at,
)
from .spectral import (
    S_bruteforce,
    S_value,
    hitchin_T,
    index_annulus,
    index_ball,
    kernel_dim,
    mode_lambda,
    modes_upto,
    vanishing_criterion,
)
from .symmetry import (
    anomaly_vector,
    appendix_anomaly_coeff,
    appendix_k3,
    runge_lenz_field,
    runge_lenz_sk,
    sk_residual,
)

DEFAULT_TOLERANCES = {
    "identity": 1e-8,
    "ricci": 1e-8,
    "mkb": 1e-12,
    "fd": 1e-5,
    "sk": 1e-7,
    "k3": 1e-9,
    "anomaly": 1e-6,
    "anomaly_zero": 1e-9,
    "bracket": 1e-7,
    "drift": 1e-6,
    "ode": 1e-10,
    "root": 1e-12,
    "spin": 1e-10,
}


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def sample_points(rng: np.random.Generator, n: int, r_range=(0.3, 5.0), margin=0.2) -> list:
    pts = []
    for _ in range(n):
        pts.append(
            (
                rng.uniform(*r_range),
                rng.uniform(margin, math.pi - margin),
                rng.uniform(0, 2 * math.pi),
                rng.uniform(0, 4 * math.pi),
            )
        )
    return pts


def sample_params(rng: np.random.Generator, bound: bool = False) -> MetricParams:
    """Random admissible constants; with ``bound`` also a d > b c."""
    while True:
        a = rng.uniform(0.2, 2.0)
        b = rng.uniform(0.2, 2.0)
        d = rng.uniform(0.2, 2.0)
        c = rng.uniform(-1.9 * math.sqrt(d), 2.0)
        p = MetricParams(a, b, c, d)
        if not bound or admits_bound_orbits(p):
            return p


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value: float, threshold: float, *, below: bool = True) -> None:
        value = float(value)
        ok = value <= threshold if below else value >= threshold
        self.checks.append(Check(name, value, threshold, bool(ok)))

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checks": [asdict(c) for c in self.checks],
                "info": self.info}


def _f(a) -> np.ndarray:
    return np.vectorize(lambda v: float(dual.value(v)), otypes=[float])(np.asarray(a))


# geometry -----------------------------------------------------------------


def relative_ricci(cb) -> float:
    """max |R_ab| over max |R^a_bcd| (0 for a flat bundle)."""
    ric = float(np.max(np.abs(_f(cb.ricci))))
    riem = float(np.max(np.abs(_f(cb.riemann))))
    return ric / riem if riem > 0 else ric


def curvature_identities(cb) -> dict:
    """Relative defects of the algebraic identities of a curvature bundle."""
    gam, R, ric = _f(cb.gamma), _f(cb.riemann), _f(cb.ricci)
    scale_g = max(np.max(np.abs(gam)), 1e-300)
    scale_r = max(np.max(np.abs(R)), 1e-300)
    bianchi = R + np.einsum("abcd->acdb", R) + np.einsum("abcd->adbc", R)
    return {
        "gamma_symmetry": np.max(np.abs(gam - gam.transpose(0, 2, 1))) / scale_g,
        "riemann_antisymmetry": np.max(np.abs(R + R.transpose(0, 1, 3, 2))) / scale_r,
        "first_bianchi": np.max(np.abs(bianchi)) / scale_r,
        "ricci_symmetry": np.max(np.abs(ric - ric.T)) / scale_r,
    }


def metric_compatibility(cb) -> float:
    """max |nabla_c g_ab| relative to the size of its terms."""
    g, dg, gam = _f(cb.g), _f(cb.dg), _f(cb.gamma)
    t1 = np.einsum("eca,eb->cab", gam, g)
    t2 = np.einsum("ecb,ae->cab", gam, g)
    scale = max(np.max(np.abs(dg)), 1e-300)
    return float(np.max(np.abs(dg - t1 - t2)) / scale)


def fd_agreement(params: MetricParams, point, h: float = 1e-5) -> float:
    """Dual first derivatives of g against central differences (relative)."""
    _, dg = metric_jet1(extended_field(params), point)
    dg = _f(dg)
    worst = 0.0
    for c in range(4):
        xp = list(point)
        xm = list(point)
        xp[c] += h
        xm[c] -= h
        fd = (extended_metric(params, xp) - extended_metric(params, xm)) / (2 * h)
        scale = max(np.max(np.abs(dg[c])), 1.0)
        worst = max(worst, float(np.max(np.abs(fd - dg[c])) / scale))
    return worst


def suite_geometry(params: MetricParams, rng, tol: dict, n: int = 10) -> SuiteResult:
    res = SuiteResult("geometry")
    worst = dict.fromkeys(("gamma_symmetry", "riemann_antisymmetry", "first_bianchi", "ricci_symmetry"), 0.0)
    compat = mkb = fd = 0.0
    for x in sample_points(rng, n):
        cb = curvature_at(extended_field(params), x)
        for k, v in curvature_identities(cb).items():
            worst[k] = max(worst[k], float(v))
        compat = max(compat, metric_compatibility(cb))
        g1 = extended_metric(params, x)
        g2 = berger_form_metric(params, x)
        mkb = max(mkb, float(np.max(np.abs(g1 - g2)) / np.max(np.abs(g1))))
        fd = max(fd, fd_agreement(params, x))
    for k, v in worst.items():
        res.add(k, v, tol["identity"])
    res.add("metric_compatibility", compat, tol["identity"])
    res.add("berger_form_agreement", mkb, tol["mkb"])
    res.add("dual_vs_finite_difference", fd, tol["fd"])
    return res


def suite_standard(rng, tol: dict, n: int = 20) -> SuiteResult:
    res = SuiteResult("standard_taub_nut")
    p = MetricParams.standard(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
    worst_ric = worst_uv = 0.0
    for x in sample_points(rng, n):
        cb = curvature_at(extended_field(p), x)
        worst_ric = max(worst_ric, relative_ricci(cb))
        U, V, _, _ = cartesian_potentials(p, (x[0] * math.sin(x[1]), 0.1, x[0] * math.cos(x[1])))
        worst_uv = max(worst_uv, abs(U * V - 1.0))
    res.add("max_abs_ricci", worst_ric, tol["ricci"])
    res.add("UV_minus_1", worst_uv, tol["identity"])
    return res


def berger_sign_change(tol: float = 1e-6) -> tuple[float, float]:
    """Bisect the sign change of scal(g_lambda) and fit scal / (4 - lambda^2)."""
    lo, hi = 1.0, 3.0
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if berger_scalar_curvature(mid) > 0:
            lo = mid
        else:
            hi = mid
    lams = np.linspace(0.3, 3.5, 9)
    lams = lams[np.abs(lams - 2.0) > 0.1]
    ratios = [berger_scalar_curvature(l) / (4 - l * l) for l in lams]
    return 0.5 * (lo + hi), float(np.mean(ratios))


def suite_berger(tol: dict) -> SuiteResult:
    res = SuiteResult("berger_curvature")
    root, ratio = berger_sign_change()
    res.add("sign_change_minus_2", abs(root - 2.0), 1e-6)
    res.add("scal_over_(4-l^2)_minus_2", abs(ratio - 2.0), tol["identity"])
    res.add("scal_g1_minus_6", abs(berger_scalar_curvature(1.0) - 6.0), tol["identity"])
    return res


# symmetry -----------------------------------------------------------------


def suite_killing(params: MetricParams, rng, tol: dict, n: int = 10) -> SuiteResult:
    res = SuiteResult("stackel_killing")
    metric = extended_field(params)
    worst = [0.0, 0.0, 0.0]
    k3 = 0.0
    for x in sample_points(rng, n):
        for i in (1, 2, 3):
            worst[i - 1] = max(worst[i - 1], sk_residual(runge_lenz_field(params, i), metric, x))
        a = runge_lenz_sk(3, params, x)
        b = appendix_k3(params, x)
        k3 = max(k3, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    for i in (1, 2, 3):
        res.add(f"sk_residual_k{i}", worst[i - 1], tol["sk"])
    res.add("k3_vs_closed_form", k3, tol["k3"])
    return res


def anomaly_calibration(samples) -> tuple[float, float]:
    """Global constant between engine A^r and the closed form, and worst relative residual.

    ``samples`` is a list of (params, point).
    """
    eng, ref = [], []
    for p, x in samples:
        eng.append(anomaly_vector(p, 3, x)[0])
        ref.append(appendix_anomaly_coeff(p, x[0], x[1]))
    eng, ref = np.array(eng), np.array(ref)
    ratios = eng / ref
    kappa = float(np.median(ratios))
    rel = np.abs(eng - kappa * ref) / np.maximum(np.abs(eng), 1e-300)
    return kappa, float(np.max(rel))


def suite_anomaly(params: MetricParams, rng, tol: dict, n: int = 10) -> SuiteResult:
    res = SuiteResult("anomaly")
    pts = [x for x in sample_points(rng, n) if abs(math.cos(x[1])) > 0.05]
    samples = [(params, x) for x in pts] + [(sample_params(rng), x) for x in pts]
    kappa, rel = anomaly_calibration(samples)
    res.add("relative_residual", rel, tol["anomaly"])
    res.info["kappa_cal"] = kappa
    std = MetricParams.standard(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
    worst = 0.0
    for x in pts[:4]:
        for i in (1, 2, 3):
            worst = max(worst, float(np.max(np.abs(anomaly_vector(std, i, x)))))
    res.add("standard_max_abs_anomaly", worst, tol["anomaly_zero"])
    return res


# dynamics -----------------------------------------------------------------


def suite_dynamics(params: MetricParams, rng, tol: dict, n_traj: int = 5, horizon: float = 100.0,
                   n_phase: int = 5) -> SuiteResult:
    res = SuiteResult("dynamics")
    bound = admits_bound_orbits(params)
    phases = [sample_phase(params, rng, bound=bound) for _ in range(max(n_traj, n_phase))]
    worst_e = 0.0
    worst_j = worst_k = worst_hk = 0.0
    for ph in phases[:n_phase]:
        worst_e = max(worst_e, abs(float(conserved_set(params, ph).E) - float(hamiltonian(params, ph)))
                      / abs(float(hamiltonian(params, ph))))
        cs = conserved_set(params, ph)
        J = np.array([float(v) for v in cs.J])
        K = np.array([float(v) for v in cs.K])
        sj = max(np.max(np.abs(J)), 1e-300)
        sk = max(np.max(np.abs(K)), 1e-300)
        for i, j in itertools.product((1, 2, 3), repeat=2):
            eps = _eps3(i, j)
            jj = float(poisson_bracket(params, angular_momentum(i), angular_momentum(j), ph))
            jk = float(poisson_bracket(params, angular_momentum(i), runge_lenz(j), ph))
            worst_j = max(worst_j, abs(jj - sum(eps[k] * J[k] for k in range(3))) / sj)
            worst_k = max(worst_k, abs(jk - sum(eps[k] * K[k] for k in range(3))) / sk)
        for i in (1, 2, 3):
            worst_hk = max(worst_hk, abs(float(poisson_bracket(params, energy, runge_lenz(i), ph))) / sk)
    res.add("energy_identity", worst_e, 1e-12)
    res.add("bracket_JJ", worst_j, tol["bracket"])
    res.add("bracket_JK", worst_k, tol["bracket"])
    res.add("bracket_HK", worst_hk, tol["bracket"])
    traj = integrate_batch(params, phases[:n_traj], horizon, tol["ode"])
    res.add("truncated", float(traj.truncated), 0.0)
    for name, v in traj.drift.items():
        res.add(f"drift_{name}", v, tol["drift"])
    return res


def _eps3(i: int, j: int) -> list:
    out = [0.0, 0.0, 0.0]
    for k in (1, 2, 3):
        perm = (i, j, k)
        if len(set(perm)) == 3:
            out[k - 1] = 1.0 if perm in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1.0
    return out


def levi_civita(i: int, j: int, k: int) -> float:
    return _eps3(i, j)[k - 1]


# spectral -----------------------------------------------------------------


def spectral_mismatches(l_max: float = 20.0) -> int:
    """Grid of l values (every mode value, midpoints, uniform grid) where closed form != oracle."""
    crit = sorted({m.lambda_crit for m in modes_upto(l_max)})
    grid = set(np.linspace(0.05, l_max, 97).tolist()) | set(crit)
    grid |= {0.5 * (u + v) for u, v in zip(crit, crit[1:])}
    return sum(S_value(l) != S_bruteforce(l) for l in sorted(grid))


def suite_spectral(rng, tol: dict) -> SuiteResult:
    res = SuiteResult("spectral")
    res.add("N(4)_minus_2", abs(kernel_dim(4.0) - 2), 0)
    res.add("S(1)", S_value(1.0), 0)
    res.add("S(5)_minus_2", abs(S_value(5.0) - 2), 0)
    res.add("S(6)_minus_8", abs(S_value(6.0) - 8), 0)
    res.add("closed_form_vs_oracle_mismatches", spectral_mismatches(20.0), 0)
    worst = 0.0
    for p in range(1, 51):
        for q in range(1, 51):
            worst = max(worst, abs(hitchin_T(mode_lambda(p, q).lambda_crit, p, q)))
    res.add("root_consistency", worst, tol["root"])
    min_slope = math.inf
    for m in modes_upto(20.0):
        t = np.linspace(0.05, 25.0, 1000)
        T = np.array([hitchin_T(v, m.p, m.q) for v in t])
        min_slope = min(min_slope, float(np.min(np.diff(T))))
    res.add("min_branch_increment", min_slope, 0.0, below=False)
    return res


def suite_index(params: MetricParams, rng, tol: dict, n: int = 50) -> SuiteResult:
    res = SuiteResult("index")
    bad = 0
    for _ in range(n):
        p = sample_params(rng)
        l1, l2 = sorted(rng.uniform(0.05, 10.0, 2))
        ann = index_annulus(p, l1, l2).index
        if ann != index_ball(p, l2).index - index_ball(p, l1).index:
            bad += 1
        cert = vanishing_criterion(p)
        if cert.holds and (ann != 0 or index_ball(p, l2).index != 0):
            bad += 1
    res.add("consistency_failures", bad, 0)
    std = MetricParams.standard(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
    res.add("standard_ball_index", abs(index_ball(std, rng.uniform(0.1, 20.0)).index), 0)
    res.add("example_ball_index_minus_2", abs(index_ball(MetricParams(1, 1, -1.95, 1), 0.975).index - 2), 0)
    cert = vanishing_criterion(params)
    res.add("config_vanishing_consistent",
            float(cert.holds and cert.lambda_max >= 4.0), 0.0)
    return res


# spinors ------------------------------------------------------------------


def polynomial_spinor(rng):
    C = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))

    def psi(x):
        return [
            C[k, 0] + C[k, 1] * x[0] + C[k, 2] * x[1] * x[2] + C[k, 3] * x[3] * x[0]
            + C[k, 4] * x[3] * x[3] + C[k, 5] * x[2] * x[2] * x[1]
            for k in range(4)
        ]

    return psi


def sample_cartesian(rng, n: int) -> list:
    pts = []
    while len(pts) < n:
        x = rng.uniform(-2.0, 2.0, 3)
        r = np.linalg.norm(x)
        if r > 0.2 and (r + x[2]) > 0.2 * r:
            pts.append((*x, rng.uniform(-3.0, 3.0)))
    return pts


def suite_spin(params: MetricParams, rng, tol: dict, n: int = 5) -> SuiteResult:
    res = SuiteResult("spin")
    g = gamma_matrices()
    alg = max(
        np.max(np.abs(g[a] @ g[b] + g[b] @ g[a] - 2.0 * (a == b) * np.eye(4)))
        for a in range(4) for b in range(4)
    )
    res.add("gamma_algebra", alg, tol["spin"])
    recon = dual_err = conn = 0.0
    for x in sample_cartesian(rng, n):
        t = tetrad_at(params, x)
        gm = np.asarray(cartesian_field(params)(x), dtype=float)
        eh, e = np.asarray(t.e_hat, dtype=float), np.asarray(t.e, dtype=float)
        recon = max(recon, float(np.max(np.abs(eh.T @ eh - gm)) / np.max(np.abs(gm))))
        dual_err = max(dual_err, float(np.max(np.abs(eh @ e - np.eye(4)))))
        a = spin_connection_at(params, x)
        b = spin_connection_from_christoffel(params, x)
        conn = max(conn, float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)))
    res.add("tetrad_reconstruction", recon, tol["spin"])
    res.add("tetrad_duality", dual_err, tol["spin"])
    res.add("spin_connection_vs_christoffel", conn, tol["spin"])
    std = MetricParams.standard(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0))
    psi = polynomial_spinor(rng)
    worst = 0.0
    for x in sample_cartesian(rng, n):
        a = dirac_apply(std, psi, x)
        b = dirac_closed_form(std, psi, x)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    res.add("dirac_closed_form_standard", worst, tol["spin"])
    return res


def run_all(params: MetricParams, seed: int, tolerances: dict | None = None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    rng = make_rng(seed)
    suites = [
        suite_geometry(params, rng, tol),
        suite_standard(rng, tol),
        suite_berger(tol),
        suite_killing(params, rng, tol),
        suite_anomaly(params, rng, tol),
        suite_dynamics(params, rng, tol),
        suite_spectral(rng, tol),
        suite_index(params, rng, tol),
        suite_spin(params, rng, tol),
    ]
    return {
        "schema": "tnut/1",
        "params": params.as_dict(),
        "seed": int(seed),
        "tolerances": tol,
        "suites": [s.as_dict() for s in suites],
        "all_passed": all(s.passed for s in suites),
    }
