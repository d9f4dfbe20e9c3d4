"""Acceptance criteria, one test each.

Each criterion prints a ``[PASS]``/``[FAIL]`` line (visible with ``pytest -s``
or by running this file directly).
"""

import itertools
import math
import time

import numpy as np
import pytest

from tnut.dynamics import (
    admits_bound_orbits,
    angular_momentum,
    conserved_set,
    integrate_batch,
    poisson_bracket,
    runge_lenz,
    sample_phase,
)
from tnut.geometry import MetricParams, berger_scalar_curvature, curvature_at, extended_field
from tnut.spectral import S_bruteforce, S_value, index_annulus, index_ball, kernel_dim, vanishing_criterion
from tnut.suites import (
    anomaly_calibration,
    berger_sign_change,
    levi_civita,
    make_rng,
    relative_ricci,
    sample_params,
    sample_points,
    spectral_mismatches,
)
from tnut.symmetry import anomaly_vector, appendix_k3, runge_lenz_field, runge_lenz_sk, sk_residual

SEED = 20261015


def _report(n, title, ok, detail, elapsed, budget=None):
    timing = f"{elapsed:.2f}s" + (f" (budget {budget:g}s)" if budget else "")
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} | {detail} | {timing}")


def criterion_1():
    t0 = time.perf_counter()
    rng = make_rng(SEED + 1)
    worst = 0.0
    for x in sample_points(rng, 100):
        p = MetricParams.standard(rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0))
        worst = max(worst, relative_ricci(curvature_at(extended_field(p), x)))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10
    return ok, f"max |Ric|/max |Riem| = {worst:.2e} over 100 points", dt, 10


def criterion_2():
    t0 = time.perf_counter()
    rng = make_rng(SEED + 2)
    samples = []
    while len(samples) < 50:
        x = sample_points(rng, 1)[0]
        if abs(math.cos(x[1])) > 0.05:  # keep A^r away from its zero line for relative residuals
            samples.append((sample_params(rng), x))
    kappa, rel = anomaly_calibration(samples)
    std_worst = 0.0
    for x in sample_points(rng, 10):
        p = MetricParams.standard(rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0))
        for i in (1, 2, 3):
            std_worst = max(std_worst, float(np.max(np.abs(anomaly_vector(p, i, x)))))
    dt = time.perf_counter() - t0
    ok = rel <= 1e-6 and std_worst <= 1e-9 and dt < 30
    detail = f"kappa_cal = {kappa:.15f}, max rel residual = {rel:.2e}, standard max |A| = {std_worst:.2e}"
    return ok, detail, dt, 30


def criterion_3():
    t0 = time.perf_counter()
    rng = make_rng(SEED + 3)
    worst = [0.0, 0.0, 0.0]
    k3 = 0.0
    for _ in range(50):
        p = sample_params(rng)
        x = sample_points(rng, 1)[0]
        metric = extended_field(p)
        for i in (1, 2, 3):
            worst[i - 1] = max(worst[i - 1], sk_residual(runge_lenz_field(p, i), metric, x))
        a, b = runge_lenz_sk(3, p, x), appendix_k3(p, x)
        k3 = max(k3, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    dt = time.perf_counter() - t0
    ok = max(worst) <= 1e-7 and k3 <= 1e-9
    detail = "S-K residuals k1..k3 = " + ", ".join(f"{w:.1e}" for w in worst) + f"; k3 vs closed form = {k3:.1e}"
    return ok, detail, dt, None


def criterion_4():
    t0 = time.perf_counter()
    vals = {
        "N(4)": (kernel_dim(4.0), 2),
        "S(1)": (S_value(1.0), 0),
        "S(5)": (S_value(5.0), 2),
        "S(6)": (S_value(6.0), 8),
        "oracle S(5)": (S_bruteforce(5.0), 2),
        "oracle S(6)": (S_bruteforce(6.0), 8),
    }
    mismatches = spectral_mismatches(20.0)
    dt = time.perf_counter() - t0
    ok = all(v == w for v, w in vals.values()) and mismatches == 0 and dt < 5
    detail = ", ".join(f"{k}={v}" for k, (v, _) in vals.items()) + f"; mismatches for l <= 20: {mismatches}"
    return ok, detail, dt, 5


def criterion_5():
    t0 = time.perf_counter()
    rng = make_rng(SEED + 5)
    failures = []
    for _ in range(20):
        p = MetricParams.standard(rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0))
        if index_ball(p, rng.uniform(0.01, 50.0)).index != 0:
            failures.append("standard ball")
    vanishing = 0
    for _ in range(100):
        d = rng.uniform(0.2, 2.0)
        p = MetricParams(rng.uniform(0.0, 2.0), rng.uniform(0.2, 2.0), rng.uniform(-1.999, -1.85) * math.sqrt(d), d)
        if vanishing_criterion(p).holds:
            vanishing += 1
            if index_ball(p, rng.uniform(0.01, 50.0)).index != 0:
                failures.append("criterion ball")
    example = index_ball(MetricParams(1, 1, -1.95, 1), 0.975).index
    if example != 2:
        failures.append("example")
    inconsistent = 0
    for _ in range(100):
        p = sample_params(rng)
        if rng.uniform() < 0.5:  # also exercise constants with lambda_max above 4
            d = rng.uniform(0.2, 2.0)
            p = MetricParams(rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0), -rng.uniform(1.94, 1.999) * math.sqrt(d), d)
        l1, l2 = sorted(rng.uniform(0.01, 10.0, 2))
        if index_annulus(p, l1, l2).index != index_ball(p, l2).index - index_ball(p, l1).index:
            inconsistent += 1
    dt = time.perf_counter() - t0
    ok = not failures and inconsistent == 0 and dt < 5
    detail = f"example ball index = {example}, vanishing-criterion cases = {vanishing}/100, consistency failures = {inconsistent}"
    return ok, detail, dt, 5


def criterion_6():
    t0 = time.perf_counter()
    rng = make_rng(SEED + 6)
    worst_drift = {"E": 0.0, "q": 0.0, "J": 0.0, "K": 0.0}
    worst_bracket = 0.0
    truncated = False
    for _ in range(5):
        p = sample_params(rng)
        bound = admits_bound_orbits(p)
        phases = [sample_phase(p, rng, bound=bound) for _ in range(20)]
        traj = integrate_batch(p, phases, 100.0, 1e-10)
        truncated |= traj.truncated
        for k, v in traj.drift.items():
            worst_drift[k] = max(worst_drift[k], v)
        for ph in phases:
            K = np.array(conserved_set(p, ph).K, dtype=float)
            for i, j in itertools.product((1, 2, 3), repeat=2):
                got = poisson_bracket(p, angular_momentum(i), runge_lenz(j), ph)
                want = sum(levi_civita(i, j, k) * K[k - 1] for k in (1, 2, 3))
                worst_bracket = max(worst_bracket, abs(got - want) / np.max(np.abs(K)))
    dt = time.perf_counter() - t0
    ok = max(worst_drift.values()) <= 1e-6 and worst_bracket <= 1e-7 and not truncated and dt < 60
    detail = "drift " + ", ".join(f"{k}={v:.1e}" for k, v in worst_drift.items())
    detail += f"; max bracket defect = {worst_bracket:.1e}"
    return ok, detail, dt, 60


def criterion_7():
    t0 = time.perf_counter()
    root, ratio = berger_sign_change(1e-6)
    below, above = berger_scalar_curvature(2.0 - 1e-6), berger_scalar_curvature(2.0 + 1e-6)
    dt = time.perf_counter() - t0
    ok = abs(root - 2.0) <= 1e-6 and below > 0 > above
    quoted = ratio * 12  # against (4 - lambda^2)/12
    detail = f"sign change at {root:.9f}; scal = {ratio:.12f} (4 - l^2), i.e. {quoted:.9f} x (4 - l^2)/12"
    return ok, detail, dt, None


CRITERIA = [
    (1, "Ricci-flat standard metric", criterion_1),
    (2, "anomaly matches closed form", criterion_2),
    (3, "Runge-Lenz tensors are Stackel-Killing", criterion_3),
    (4, "Berger spectral counts", criterion_4),
    (5, "APS index values and consistency", criterion_5),
    (6, "conserved-set drift and brackets", criterion_6),
    (7, "Berger scalar curvature sign change", criterion_7),
]


@pytest.mark.parametrize("n,title,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(n, title, fn):
    ok, detail, dt, budget = fn()
    _report(n, title, ok, detail, dt, budget)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, title, fn in CRITERIA:
        ok, detail, dt, budget = fn()
        _report(n, title, ok, detail, dt, budget)
        results.append(ok)
    raise SystemExit(0 if all(results) else 1)
