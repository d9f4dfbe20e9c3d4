"""Small Dirac eigenvalues on Berger spheres, spectral flow and APS indices.

A pair (p, q) of positive integers has a single critical Berger parameter
``lambda_crit`` at which the branch T(t, p, q) = t/2 - sqrt((p-q)^2/t^2 + 4pq)
crosses zero; it contributes p + q harmonic spinors there.  Pairs are
ordered, so (p, q) and (q, p) both count when p != q.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from scipy.optimize import brentq

from .geometry import MetricParams, lambda_max, lambda_of_r

MEMBERSHIP_RTOL = 1e-9
SCHEMA = "tnut/1"


def hitchin_T(t: float, p: int, q: int) -> float:
    if not t > 0:
        raise ValueError("t must be positive")
    return t / 2.0 - math.sqrt((p - q) ** 2 / (t * t) + 4.0 * p * q)


@dataclass(frozen=True, order=True)
class BergerMode:
    lambda_crit: float
    p: int
    q: int
    multiplicity: int

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "lambda_crit": self.lambda_crit,
                "multiplicity": self.multiplicity}


def mode_lambda(p: int, q: int) -> BergerMode:
    """Positive root of lambda^4 - 16 p q lambda^2 - 4 (p - q)^2 = 0."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive integers")
    p, q = int(p), int(q)
    radicand = 16 * p * p * q * q + (p - q) ** 2  # exact integer
    root = math.isqrt(radicand)
    sq = float(root) if root * root == radicand else math.sqrt(radicand)
    return BergerMode(math.sqrt(8 * p * q + 2.0 * sq), p, q, p + q)


@lru_cache(maxsize=64)
def _modes_upto(pq_max: int) -> tuple[BergerMode, ...]:
    out = []
    for p in range(1, pq_max + 1):
        for q in range(1, pq_max // p + 1):
            out.append(mode_lambda(p, q))
    return tuple(sorted(out))


def modes_upto(l: float, rtol: float = MEMBERSHIP_RTOL) -> list[BergerMode]:
    """All ordered modes with lambda_crit <= l (relative slack ``rtol``).

    lambda_crit^2 >= 16 p q, so only p q <= l^2/16 can contribute.
    """
    if l <= 0:
        return []
    bound = l * (1.0 + rtol)
    pq_max = int(math.floor(bound * bound / 16.0))
    return [m for m in _modes_upto(pq_max) if m.lambda_crit <= bound]


def kernel_dim(lam: float, tol: float = MEMBERSHIP_RTOL) -> int:
    """N(lambda): harmonic spinors of the Berger metric g_lambda."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return sum(m.multiplicity for m in modes_upto(lam, tol) if abs(m.lambda_crit - lam) <= tol * lam)


def S_function(l: float, rtol: float = MEMBERSHIP_RTOL) -> tuple[int, list[BergerMode]]:
    """S(l) = sum of N(lambda) over lambda <= l, with the contributing modes."""
    modes = modes_upto(l, rtol)
    return sum(m.multiplicity for m in modes), modes


def S_value(l: float) -> int:
    return S_function(l)[0]


def S_bruteforce(l: float, rtol: float = MEMBERSHIP_RTOL) -> int:
    """Independent oracle: root-find T(., p, q) for every pair in a box.

    T(t, p, q) <= t/2 - 2 sqrt(p q), so a zero below l forces p, q <= l^2/16;
    the box is scanned without using the closed-form root.
    """
    if l <= 0:
        return 0
    box = max(1, int(math.ceil(l * l / 16.0)) + 1)
    total = 0
    hi = 2.0 * l + 10.0
    for p in range(1, box + 1):
        for q in range(1, box + 1):
            # T increases from -inf; bracket the single sign change
            lo = 1e-6
            if hitchin_T(hi, p, q) < 0:
                continue
            root = brentq(hitchin_T, lo, hi, args=(p, q), xtol=1e-14, rtol=1e-15)
            if root <= l * (1.0 + rtol):
                total += p + q
    return total


def spectral_flow(lambda1: float, lambda2: float) -> int:
    return S_value(lambda2) - S_value(lambda1)


# index reports ------------------------------------------------------------


@dataclass
class IndexReport:
    domain: dict
    params: MetricParams
    lambda_values: list
    S_values: list
    index: int
    contributing_modes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "domain": self.domain,
            "params": self.params.as_dict(),
            "lambda_values": self.lambda_values,
            "S_values": self.S_values,
            "index": self.index,
            "modes": [m.as_dict() for m in self.contributing_modes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def index_ball(params: MetricParams, l: float) -> IndexReport:
    """index(D+) on {r <= l} with APS boundary condition: S(lambda(l))."""
    if not l > 0:
        raise ValueError("ball radius must be positive")
    lam = float(lambda_of_r(params, l))
    s, modes = S_function(lam)
    return IndexReport({"kind": "ball", "l": l}, params, [lam], [s], s, modes)


def index_annulus(params: MetricParams, l1: float, l2: float) -> IndexReport:
    """index(D+) on l1 <= r <= l2: S(lambda(l2)) - S(lambda(l1)).

    lambda(r) need not be monotone, so the index may be negative.
    """
    if not 0 < l1 <= l2:
        raise ValueError("need 0 < l1 <= l2")
    lam1 = float(lambda_of_r(params, l1))
    lam2 = float(lambda_of_r(params, l2))
    s1, m1 = S_function(lam1)
    s2, m2 = S_function(lam2)
    lo, hi = (m1, m2) if len(m1) <= len(m2) else (m2, m1)
    crossing = [m for m in hi if m not in set(lo)]
    return IndexReport(
        {"kind": "annulus", "l1": l1, "l2": l2}, params, [lam1, lam2], [s1, s2], s2 - s1, crossing
    )


@dataclass(frozen=True)
class VanishingCertificate:
    holds: bool
    threshold: float  # -sqrt(15 d)/2
    lambda_max: float
    r_star: float | None
    lambda_below_4: bool

    def as_dict(self) -> dict:
        return asdict(self)


def vanishing_criterion(params: MetricParams) -> VanishingCertificate:
    """c > -sqrt(15 d)/2 guarantees lambda(r) < 4 everywhere, hence zero index."""
    thr = -math.sqrt(15.0 * params.d) / 2.0
    lm = lambda_max(params)
    return VanishingCertificate(params.c > thr, thr, lm.value, lm.r_star, lm.value < 4.0)
