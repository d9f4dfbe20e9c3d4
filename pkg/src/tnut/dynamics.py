"""Geodesic flow on the extended Taub-NUT metric and its conserved quantities.

Phase-space functions here are written with plain arithmetic so that they
accept floats, numpy arrays (a batch of phases) and dual numbers alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dual
from .dual import value
from .geometry import (
    SINGULAR_MARGIN,
    ChartPoint,
    DomainError,
    MetricParams,
    check_theta,
    profile_f,
    profile_g,
)

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class PhasePoint:
    """Spherical position (r, theta, phi, chi) and covariant momentum p_mu."""

    position: tuple
    momentum: tuple

    def __post_init__(self):
        pos = self.position.coords if isinstance(self.position, ChartPoint) else self.position
        object.__setattr__(self, "position", tuple(pos))
        object.__setattr__(self, "momentum", tuple(self.momentum))
        if len(self.position) != 4 or len(self.momentum) != 4:
            raise ValueError("phase points need four coordinates and four momenta")

    @classmethod
    def from_array(cls, y: Sequence) -> "PhasePoint":
        return cls(tuple(y[:4]), tuple(y[4:]))

    def as_array(self) -> np.ndarray:
        return np.array([float(value(v)) for v in self.position + self.momentum])


@dataclass
class ConservedSet:
    E: object
    q: object
    J: tuple
    K: tuple
    kappa: object

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.E, self.q, *self.J, *self.K], dtype=float
        )


def _split(phase):
    if isinstance(phase, PhasePoint):
        return phase.position, phase.momentum
    return tuple(phase[:4]), tuple(phase[4:])


def hamiltonian(params: MetricParams, phase) -> object:
    """H = g^{mu nu} p_mu p_nu / 2 with the closed-form inverse metric."""
    (r, th, _, _), (pr, pth, pph, pchi) = _split(phase)
    f = profile_f(params, r)
    g = profile_g(params, r)
    st = dual.sin(th)
    ct = dual.cos(th)
    fr2 = f * r * r
    tw = pph - ct * pchi
    return 0.5 * (pr * pr / f + pth * pth / fr2 + tw * tw / (fr2 * st * st) + pchi * pchi / g)


def velocities(params: MetricParams, phase) -> tuple:
    """dx^mu/dtau = g^{mu nu} p_nu."""
    (r, th, _, _), (pr, pth, pph, pchi) = _split(phase)
    f = profile_f(params, r)
    g = profile_g(params, r)
    st = dual.sin(th)
    ct = dual.cos(th)
    fr2 = f * r * r
    ang = (pph - ct * pchi) / (fr2 * st * st)
    return (pr / f, pth / fr2, ang, pchi / g - ct * ang)


def _cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def conserved_set(params: MetricParams, phase) -> ConservedSet:
    """Charge, angular momentum, Runge-Lenz vector and energy at a phase point.

    The charge uses chi-dot: q = g (chi' + cos(theta) phi') which equals p_chi.
    """
    (r, th, ph, _), _ = _split(phase)
    rd, thd, phd, chid = velocities(params, phase)
    f = profile_f(params, r)
    g = profile_g(params, r)
    st, ct = dual.sin(th), dual.cos(th)
    sp, cp = dual.sin(ph), dual.cos(ph)
    rhat = (st * cp, st * sp, ct)
    that = (ct * cp, ct * sp, -st)
    phat = (-sp, cp, 0.0)
    x = tuple(r * u for u in rhat)
    # Cartesian velocity from the spherical one
    xdot = tuple(rd * u + r * thd * v + r * st * phd * w for u, v, w in zip(rhat, that, phat))
    p = tuple(f * v for v in xdot)
    q = g * (chid + ct * phd)
    E = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / (2.0 * f) + q * q / (2.0 * g)
    xp = _cross(x, p)
    J = tuple(xp[k] + q * rhat[k] for k in range(3))
    kappa = -params.a * E + 0.5 * params.c * q * q
    pJ = _cross(p, J)
    K = tuple(pJ[k] + kappa * rhat[k] for k in range(3))
    return ConservedSet(E, q, J, K, kappa)


# phase-space functions usable with poisson_bracket
def energy(params, x, p):
    return hamiltonian(params, (*x, *p))


def charge(params, x, p):
    return conserved_set(params, (*x, *p)).q


def angular_momentum(i: int) -> Callable:
    def J(params, x, p):
        return conserved_set(params, (*x, *p)).J[i - 1]

    J.__name__ = f"J{i}"
    return J


def runge_lenz(i: int) -> Callable:
    def K(params, x, p):
        return conserved_set(params, (*x, *p)).K[i - 1]

    K.__name__ = f"K{i}"
    return K


def phase_gradient(params: MetricParams, F: Callable, phase) -> tuple[object, np.ndarray]:
    """(F, dF/d(x, p)) at a phase point; gradient has 8 entries."""
    y = list(_split(phase)[0]) + list(_split(phase)[1])
    t = dual.new_tag()
    yd = dual.seed_gradient(y, t)
    out = F(params, tuple(yd[:4]), tuple(yd[4:]))
    re, e = dual.part(out, t)
    if dual._is_zero(e):
        e = np.zeros((8,) + np.shape(y[0]))
    return re, e


def poisson_bracket(params: MetricParams, F: Callable, G: Callable, phase) -> object:
    """{F, G} = dF/dx^mu dG/dp_mu - dF/dp_mu dG/dx^mu in chart coordinates."""
    _, dF = phase_gradient(params, F, phase)
    _, dG = phase_gradient(params, G, phase)
    return np.sum(dF[:4] * dG[4:] - dF[4:] * dG[:4], axis=0)


def geodesic_rhs(params: MetricParams, phase) -> tuple[np.ndarray, np.ndarray]:
    """Hamilton's equations (dx/dtau, dp/dtau) with dual-number partials of H."""
    _, dH = phase_gradient(params, energy, phase)
    return dH[4:], -dH[:4]


# integration --------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


@dataclass
class Trajectory:
    tau: np.ndarray  # (N,)
    states: np.ndarray  # (N, 8) or (N, B, 8) for a batch
    drift: dict = field(default_factory=dict)
    truncated: bool = False
    message: str = ""
    steps: int = 0
    rejected: int = 0

    def phase(self, k: int, member: int | None = None) -> PhasePoint:
        y = self.states[k] if member is None else self.states[k, member]
        return PhasePoint.from_array(y)


def _rhs_batch(params: MetricParams, y: np.ndarray) -> np.ndarray:
    """y has shape (8, B); returns dy/dtau of the same shape."""
    dx, dp = geodesic_rhs(params, tuple(y))
    return np.concatenate([np.asarray(dx, dtype=float), np.asarray(dp, dtype=float)])


def _near_pole(theta: np.ndarray) -> bool:
    return bool(np.any((theta < SINGULAR_MARGIN) | (theta > math.pi - SINGULAR_MARGIN)))


def integrate_batch(
    params: MetricParams,
    initial: Sequence[PhasePoint],
    horizon: float,
    tol: float = 1e-10,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Integrate several geodesics with shared adaptive Dormand-Prince 5(4) steps.

    The step is accepted only when the scaled local error estimate of every
    member is below ``tol`` (mixed absolute/relative weight ``1 + |y|``),
    so the per-trajectory error bound is the same as for solo runs.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if not (1e-14 <= tol <= 1e-3):
        raise ValueError("tol must lie in [1e-14, 1e-3]")
    y = np.array([ph.as_array() for ph in initial], dtype=float).T  # (8, B)
    for th in y[1]:
        check_theta(th)
    hamiltonian(params, tuple(y))  # domain checks

    taus = [0.0]
    states = [y.T.copy()]
    k1 = _rhs_batch(params, y)
    scale0 = np.max(np.abs(k1))
    h = min(horizon, 0.01 * tol ** (1 / 5) / scale0) if scale0 > 0 else horizon
    h_min = 1e-14 * horizon
    t = 0.0
    err_prev = 1e-4
    steps = rejected = 0
    truncated = False
    message = ""
    while t < horizon:
        if steps + rejected >= max_steps:
            truncated, message = True, "maximum step count reached"
            break
        h = min(h, horizon - t)
        ks = [k1]
        try:
            for s in range(1, 7):
                ys = y + h * sum(a * kk for a, kk in zip(_A[s], ks))
                if _near_pole(ys[1]):
                    raise DomainError("pole")
                ks.append(_rhs_batch(params, ys))
        except DomainError:
            h *= 0.25
            rejected += 1
            if h < h_min:
                truncated, message = True, f"step underflow near singular set at tau={t:.6g}"
                break
            continue
        y5 = ys  # FSAL: last stage is the 5th-order solution
        errv = h * sum(e * kk for e, kk in zip(_E, ks))
        w = tol * (1.0 + np.maximum(np.abs(y), np.abs(y5)))
        err = float(np.max(np.abs(errv) / w))
        if err <= 1.0:
            t += h
            y = y5.copy()
            # the flow does not depend on phi, chi: re-anchor to keep them bounded
            y[2] = np.mod(y[2], TWO_PI)
            y[3] = np.mod(y[3], FOUR_PI)
            k1 = ks[6]
            steps += 1
            taus.append(t)
            states.append(y.T.copy())
            fac = 0.9 * max(err, 1e-10) ** (-0.7 / 5) * err_prev ** (0.4 / 5)
            h *= min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
            if _near_pole(y[1]):
                truncated, message = True, f"polar approach at tau={t:.6g}"
                break
        else:
            h *= max(0.1, 0.9 * err ** (-1 / 5))
            rejected += 1
            if h < h_min:
                truncated, message = True, f"step underflow at tau={t:.6g}"
                break
    traj = Trajectory(np.array(taus), np.array(states), truncated=truncated, message=message,
                      steps=steps, rejected=rejected)
    traj.drift = drift(params, traj)
    return traj


def integrate(
    params: MetricParams, initial: PhasePoint, horizon: float, tol: float = 1e-10, **kw
) -> Trajectory:
    traj = integrate_batch(params, [initial], horizon, tol, **kw)
    traj.states = traj.states[:, 0, :]
    return traj


def conserved_history(params: MetricParams, states: np.ndarray) -> np.ndarray:
    """Columns E, q, J1..J3, K1..K3 for every sample (vectorised)."""
    flat = states.reshape(-1, 8).T
    cs = conserved_set(params, tuple(flat))
    cols = [cs.E, cs.q, *cs.J, *cs.K]
    out = np.stack([np.broadcast_to(np.asarray(c, dtype=float), flat.shape[1:]) for c in cols], -1)
    return out.reshape(states.shape[:-1] + (8,))


def _rel(dev: np.ndarray, ref: np.ndarray) -> np.ndarray:
    ref = np.where(ref > 0, ref, 1.0)
    return dev / ref


def drift(params: MetricParams, traj: Trajectory) -> dict:
    """Max relative deviation of E, q, J, K (vector norm) from the initial values.

    For a batch each entry is the worst member.
    """
    hist = conserved_history(params, traj.states)  # (N, [B,] 8)
    d = hist - hist[:1]
    out = {}
    for name, sl in (("E", slice(0, 1)), ("q", slice(1, 2)), ("J", slice(2, 5)), ("K", slice(5, 8))):
        dev = np.max(np.linalg.norm(d[..., sl], axis=-1), axis=0)
        ref = np.linalg.norm(hist[0, ..., sl], axis=-1)
        out[name] = float(np.max(_rel(dev, ref)))
    return out


def theta_range(params: MetricParams, phase) -> tuple[float, float]:
    """Polar-angle range swept by the orbit cone x . J = q r."""
    cs = conserved_set(params, phase)
    J = np.array([float(v) for v in cs.J])
    nJ = np.linalg.norm(J)
    if nJ == 0:
        return 0.0, math.pi
    alpha = math.acos(max(-1.0, min(1.0, float(cs.q) / nJ)))
    beta = math.acos(max(-1.0, min(1.0, J[2] / nJ)))
    return abs(beta - alpha), min(math.pi, beta + alpha)


def phase_from_cartesian_momentum(params: MetricParams, x, pvec, q) -> PhasePoint:
    """Covariant momenta for position x = (r, theta, phi, chi), p = f dx/dtau and charge q."""
    r, th, ph, _ = x
    st, ct, sp, cp = math.sin(th), math.cos(th), math.sin(ph), math.cos(ph)
    rhat = np.array([st * cp, st * sp, ct])
    that = np.array([ct * cp, ct * sp, -st])
    phat = np.array([-sp, cp, 0.0])
    pvec = np.asarray(pvec, dtype=float)
    p_r = pvec @ rhat
    p_th = r * (pvec @ that)
    p_ph = r * st * (pvec @ phat) + ct * q
    return PhasePoint(tuple(x), (p_r, p_th, p_ph, q))


def sample_phase(
    params: MetricParams,
    rng: np.random.Generator,
    bound: bool = True,
    margin: float = 0.25,
    max_tries: int = 10_000,
) -> PhasePoint:
    """Random phase whose orbit cone x . J = q r stays ``margin`` away from the poles.

    With ``bound=True`` the energy is placed below the continuum threshold
    q^2 d / (2 b).  That is only possible at radii r > b / (a d - b c).
    """
    if bound and not admits_bound_orbits(params):
        raise ValueError("these constants admit no bound geodesics (need a d > b c)")
    a, b, c, d = params.a, params.b, params.c, params.d
    for _ in range(max_tries):
        th = rng.uniform(0.6, math.pi - 0.6)
        angles = (th, rng.uniform(0, TWO_PI), rng.uniform(0, FOUR_PI))
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        if bound:
            r0 = b / (a * d - b * c)
            r = rng.uniform(1.3, 3.0) * r0
            q = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5)
            room = q * q * ((a * d - b * c) * r - b) / (2 * b * r * (a + b * r))
            f = float(profile_f(params, r))
            pmag = math.sqrt(2 * f * rng.uniform(0.2, 0.8) * room)
        else:
            r = rng.uniform(0.5, 3.0)
            q = rng.normal(0.0, 0.6)
            pmag = abs(rng.normal(0.0, 0.8))
        phase = phase_from_cartesian_momentum(params, (r, *angles), pmag * direction, q)
        lo, hi = theta_range(params, phase)
        if lo < margin or hi > math.pi - margin:
            continue
        return phase
    raise RuntimeError("no admissible phase found; relax the margin")


def admits_bound_orbits(params: MetricParams) -> bool:
    return params.a * params.d > params.b * params.c
