"""Metric family, curvature engine, tetrads and spin connection.

Conventions used throughout the package:

* Christoffel symbols ``gamma[a, b, c] = Gamma^a_{bc}``.
* ``riemann[a, b, c, d] = R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
  + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}``.
* ``ricci[b, d] = R^a_{bad]``; the round sphere has positive scalar curvature.

Spherical chart coordinates are ordered ``(r, theta, phi, chi)``; the
Cartesian chart is ``(x1, x2, x3, x4)`` with ``x4 = -mu (chi + phi)``.
All metric component functions accept dual numbers, so every derivative
in the engine is exact to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, NamedTuple, Sequence

import numpy as np

from . import dual
from .dual import Dual, value

# distance from a coordinate singularity below which points are rejected
SINGULAR_MARGIN = 1e-6


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class ParameterError(DomainError):
    pass


class CoordinateSingularityError(DomainError):
    pass


class InadmissiblePointError(DomainError):
    pass


# parameters ---------------------------------------------------------------


@dataclass(frozen=True)
class MetricParams:
    """Constants of f(r) = (a + b r)/r and g(r) = (a r + b r^2)/(1 + c r + d r^2).

    ``mu`` is the Kaluza-Klein scale of the Cartesian chart; it defaults to
    ``a/b`` when ``a > 0`` and to 1 otherwise.
    """

    a: float
    b: float
    c: float
    d: float
    mu: float | None = None

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
        if self.a < 0:
            raise ParameterError(f"need a >= 0, got a={self.a}")
        if self.b <= 0:
            raise ParameterError(f"need b > 0, got b={self.b}")
        if self.d <= 0:
            raise ParameterError(f"need d > 0, got d={self.d}")
        if self.c <= -2.0 * math.sqrt(self.d):
            raise ParameterError(
                f"need c > -2 sqrt(d) so that 1 + c r + d r^2 > 0; got c={self.c}, d={self.d}"
            )
        if self.mu is None:
            object.__setattr__(self, "mu", self.a / self.b if self.a > 0 else 1.0)
        elif not (self.mu > 0 and math.isfinite(self.mu)):
            raise ParameterError(f"need mu > 0, got mu={self.mu}")
        else:
            object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def standard(cls, a: float = 1.0, b: float = 1.0, mu: float | None = None) -> "MetricParams":
        """Constants reducing the family to the Euclidean Taub-NUT metric."""
        if a <= 0:
            raise ParameterError("the Taub-NUT specialisation needs a > 0")
        return cls(a, b, 2.0 * b / a, b * b / (a * a), mu)

    def is_standard(self, rtol: float = 1e-12) -> bool:
        if self.a <= 0:
            return False
        return math.isclose(self.c, 2 * self.b / self.a, rel_tol=rtol) and math.isclose(
            self.d, self.b**2 / self.a**2, rel_tol=rtol
        )

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "mu": self.mu}


def _check_r(r):
    if not np.all(value(r) > 0):
        raise DomainError(f"radius must be positive, got {value(r)}")


def profile_f(params: MetricParams, r):
    _check_r(r)
    return (params.a + params.b * r) / r


def _radicand(params: MetricParams, r):
    return 1.0 + params.c * r + params.d * r * r


def profile_g(params: MetricParams, r):
    _check_r(r)
    den = _radicand(params, r)
    if not np.all(value(den) > 0):
        raise DomainError(f"1 + c r + d r^2 = {value(den)} <= 0 at r={value(r)}")
    return (params.a * r + params.b * r * r) / den


def lambda_of_r(params: MetricParams, r):
    """Berger parameter of the slice r = const: (1 + c r + d r^2)^(-1/2)."""
    _check_r(r)
    rad = _radicand(params, r)
    if not np.all(value(rad) > 0):
        raise DomainError(f"1 + c r + d r^2 = {value(rad)} <= 0 at r={value(r)}")
    return 1.0 / dual.sqrt(rad)


class LambdaMax(NamedTuple):
    value: float
    r_star: float | None  # maximiser, None when the sup is the r -> 0 limit
    attained: bool


def lambda_max(params: MetricParams) -> LambdaMax:
    if params.c >= 0:
        return LambdaMax(1.0, None, False)
    r_star = -params.c / (2.0 * params.d)
    return LambdaMax(1.0 / math.sqrt(1.0 - params.c**2 / (4.0 * params.d)), r_star, True)


# charts -------------------------------------------------------------------


@dataclass(frozen=True)
class ChartPoint:
    chart: Literal["spherical", "cartesian"]
    coords: tuple

    def __post_init__(self):
        if self.chart not in ("spherical", "cartesian"):
            raise ValueError(f"unknown chart {self.chart!r}")
        if len(self.coords) != 4:
            raise ValueError("a chart point needs four coordinates")
        object.__setattr__(self, "coords", tuple(self.coords))
        if self.chart == "spherical" and not value(self.coords[0]) > 0:
            raise DomainError("r must be positive")
        if self.chart == "cartesian":
            x = [value(v) for v in self.coords[:3]]
            if math.sqrt(sum(v * v for v in x)) <= 0:
                raise DomainError("the origin is excluded from the punctured chart")

    @classmethod
    def spherical(cls, r, theta, phi=0.0, chi=0.0) -> "ChartPoint":
        return cls("spherical", (r, theta, phi, chi))

    @classmethod
    def cartesian(cls, x1, x2, x3, x4=0.0) -> "ChartPoint":
        return cls("cartesian", (x1, x2, x3, x4))


def _coords(point, chart: str) -> tuple:
    if isinstance(point, ChartPoint):
        if point.chart != chart:
            raise DomainError(f"expected a {chart} point, got {point.chart}")
        return point.coords
    return tuple(point)


def check_theta(theta):
    t = float(value(theta))
    if t < SINGULAR_MARGIN or t > math.pi - SINGULAR_MARGIN:
        raise CoordinateSingularityError(f"theta={t} is within {SINGULAR_MARGIN} of a pole")


def spherical_to_cartesian(params: MetricParams, coords) -> tuple:
    r, th, ph, chi = coords
    st = dual.sin(th)
    return (
        r * st * dual.cos(ph),
        r * st * dual.sin(ph),
        r * dual.cos(th),
        -params.mu * (chi + ph),
    )


def _sym(n, entries: dict):
    m = np.zeros((n, n), dtype=object)
    for (i, j), v in entries.items():
        m[i, j] = v
        m[j, i] = v
    return dual.densify(m)


def extended_metric(params: MetricParams, point) -> np.ndarray:
    """Metric components of the extended Taub-NUT space in (r, theta, phi, chi)."""
    r, th, _, _ = _coords(point, "spherical")
    check_theta(th)
    f = profile_f(params, r)
    g = profile_g(params, r)
    ct = dual.cos(th)
    st = dual.sin(th)
    return _sym(
        4,
        {
            (0, 0): f,
            (1, 1): f * r * r,
            (2, 2): f * r * r * st * st + g * ct * ct,
            (2, 3): g * ct,
            (3, 3): g,
        },
    )


def extended_metric_inverse(params: MetricParams, point) -> np.ndarray:
    """Closed-form inverse of :func:`extended_metric`."""
    r, th, _, _ = _coords(point, "spherical")
    check_theta(th)
    f = profile_f(params, r)
    g = profile_g(params, r)
    ct = dual.cos(th)
    st = dual.sin(th)
    ang = 1.0 / (f * r * r * st * st)
    return _sym(
        4,
        {
            (0, 0): 1.0 / f,
            (1, 1): 1.0 / (f * r * r),
            (2, 2): ang,
            (2, 3): -ct * ang,
            (3, 3): 1.0 / g + ct * ct * ang,
        },
    )


def berger_metric(lam, point3) -> np.ndarray:
    """g_H + lam^2 g_V on S^3 in Euler-type coordinates (theta, phi, chi)."""
    th = point3[0]
    check_theta(th)
    ct = dual.cos(th)
    st = dual.sin(th)
    l2 = lam * lam
    return _sym(
        3,
        {
            (0, 0): 0.25,
            (1, 1): 0.25 * (st * st + l2 * ct * ct),
            (1, 2): 0.25 * l2 * ct,
            (2, 2): 0.25 * l2,
        },
    )


def berger_form_metric(params: MetricParams, point) -> np.ndarray:
    """(a r + b r^2)(dr^2/r^2 + 4 g_{lambda(r)}) assembled from the Berger metric."""
    r, th, ph, chi = _coords(point, "spherical")
    w = params.a * r + params.b * r * r
    gb = berger_metric(lambda_of_r(params, r), (th, ph, chi))
    m = np.zeros((4, 4), dtype=object)
    m[0, 0] = w / (r * r)
    for i in range(3):
        for j in range(3):
            m[i + 1, j + 1] = 4.0 * w * gb[i, j]
    return dual.densify(m)


def monopole_potential(params: MetricParams, x) -> tuple:
    """Dirac monopole potential A_i, regular except on the negative x3 axis."""
    x1, x2, x3 = x[0], x[1], x[2]
    r = dual.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
    if not value(r) > 0:
        raise DomainError("origin excluded")
    if value(r + x3) < SINGULAR_MARGIN * value(r):
        raise CoordinateSingularityError("point on the Dirac string x3 = -r")
    s = params.mu / (r * (r + x3))
    return (-s * x2, s * x1, 0.0)


def cartesian_potentials(params: MetricParams, x):
    """(U, V, A, r) for the rescaled line element U dx.dx + V (dx4 + A.dx)^2."""
    x1, x2, x3 = x[0], x[1], x[2]
    r = dual.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
    A = monopole_potential(params, x)
    U = profile_f(params, r) / params.b
    V = profile_g(params, r) / (params.b * params.mu**2)
    return U, V, A, r


def cartesian_metric(params: MetricParams, point) -> np.ndarray:
    x = _coords(point, "cartesian")
    U, V, A, _ = cartesian_potentials(params, x)
    m = np.zeros((4, 4), dtype=object)
    for i in range(3):
        for j in range(3):
            m[i, j] = V * A[i] * A[j] + (U if i == j else 0.0)
        m[i, 3] = m[3, i] = V * A[i]
    m[3, 3] = V
    return dual.densify(m)


# curvature engine ---------------------------------------------------------


@dataclass(frozen=True)
class MetricField:
    """A metric given as a pure (dual-capable) map from coordinates to a matrix."""

    dimension: int
    components: Callable[[Sequence], np.ndarray]
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.components(x))


def extended_field(params: MetricParams) -> MetricField:
    return MetricField(4, lambda x: extended_metric(params, x), "extended-taub-nut")


def cartesian_field(params: MetricParams) -> MetricField:
    return MetricField(4, lambda x: cartesian_metric(params, x), "cartesian-taub-nut")


def berger_field(lam: float) -> MetricField:
    return MetricField(3, lambda x: berger_metric(lam, x), f"berger-{lam}")


def flat_field(n: int = 4) -> MetricField:
    return MetricField(n, lambda x: np.eye(n), "flat")


@dataclass
class CurvatureBundle:
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: object
    dg: np.ndarray = field(repr=False, default=None)
    dgamma: np.ndarray = field(repr=False, default=None)


def _object(a) -> np.ndarray:
    a = np.asarray(a)
    return a if a.dtype == object else a.astype(object)


def check_positive_definite(g) -> None:
    gv = np.vectorize(lambda v: float(np.real(value(v))), otypes=[float])(np.asarray(g))
    try:
        np.linalg.cholesky(gv)
    except np.linalg.LinAlgError as exc:
        raise InadmissiblePointError("metric is not positive definite here") from exc


def inverse(m) -> np.ndarray:
    """Matrix inverse for float or dual-valued (object) matrices."""
    m = np.asarray(m)
    if m.dtype != object:
        try:
            return np.linalg.inv(m)
        except np.linalg.LinAlgError as exc:
            raise InadmissiblePointError("singular metric") from exc
    n = m.shape[0]
    a = np.array(m, dtype=object)
    out = np.eye(n).astype(object)
    # Gauss-Jordan with partial pivoting on the primal values
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(float(np.real(value(a[i, col])))))
        if abs(float(np.real(value(a[piv, col])))) == 0.0:
            raise InadmissiblePointError("singular metric")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            out[[col, piv]] = out[[piv, col]]
        inv_p = 1.0 / a[col, col]
        # explicit loops: ndarray * Dual would build a single array-valued Dual
        for j in range(n):
            a[col, j] = a[col, j] * inv_p
            out[col, j] = out[col, j] * inv_p
        for i in range(n):
            if i != col:
                fac = a[i, col]
                if isinstance(fac, Dual) or fac != 0:
                    for j in range(n):
                        a[i, j] = a[i, j] - fac * a[col, j]
                        out[i, j] = out[i, j] - fac * out[col, j]
    return dual.densify(out)


def _einsum(spec, *ops):
    if any(np.asarray(o).dtype == object for o in ops):
        return np.einsum(spec, *[_object(o) for o in ops])
    return np.einsum(spec, *ops)


def metric_jet1(metric: MetricField, point) -> tuple[np.ndarray, np.ndarray]:
    """g and dg[c, a, b] = d_c g_ab via one vector-seeded forward pass."""
    n = metric.dimension
    t = dual.new_tag()
    x = dual.seed_gradient(list(point), t)
    gm = np.asarray(metric(x))
    g = np.empty((n, n), dtype=object)
    dg = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            re, e = dual.part(gm[i, j], t)
            g[i, j] = re
            e = np.zeros(n) if dual._is_zero(e) else e
            for c in range(n):
                dg[c, i, j] = e[c]
    return dual.densify(g), dual.densify(dg)


def metric_jet2(metric: MetricField, point):
    """g, dg[c,a,b], d2g[c,e,a,b] = d_c d_e g_ab from nested second-order duals."""
    n = metric.dimension
    g = np.empty((n, n), dtype=object)
    dg = np.empty((n, n, n), dtype=object)
    d2g = np.empty((n, n, n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            x = dual.hessian_pair(list(point), i, j)
            tags = (x[0].re.tag, x[0].tag)
            gm = np.asarray(metric(x))
            for a in range(n):
                for b in range(n):
                    f, di, dj, dij = dual.hessian_parts(gm[a, b], tags)
                    if i == j:
                        g[a, b] = f
                        dg[i, a, b] = di
                    d2g[i, j, a, b] = dij
                    d2g[j, i, a, b] = dij
    return dual.densify(g), dual.densify(dg), dual.densify(d2g)


def christoffel_from(g_inv, dg):
    # Gamma^a_{bc} = 1/2 g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)
    lower = _einsum("bdc->dbc", dg) + _einsum("cdb->dbc", dg) - dg
    return 0.5 * _einsum("ad,dbc->abc", g_inv, lower)


def christoffel_at(metric: MetricField, point):
    """(g, g_inv, Gamma) from first derivatives only."""
    g, dg = metric_jet1(metric, point)
    check_positive_definite(g)
    g_inv = inverse(g)
    return g, g_inv, christoffel_from(g_inv, dg)


def curvature_at(metric: MetricField, point) -> CurvatureBundle:
    """Christoffel symbols, Riemann, Ricci and scalar curvature at ``point``.

    ``point`` may itself hold dual numbers; the bundle then carries their
    derivatives (used for divergences of curvature-built tensors).
    """
    g, dg, d2g = metric_jet2(metric, point)
    check_positive_definite(g)
    g_inv = inverse(g)
    gamma = christoffel_from(g_inv, dg)
    # d_e g^{ad} = -g^{am} d_e g_mn g^{nd}
    dg_inv = -_einsum("am,emn,nd->ead", g_inv, dg, g_inv)
    lower = _einsum("bdc->dbc", dg) + _einsum("cdb->dbc", dg) - dg
    dlower = (
        _einsum("ebdc->edbc", d2g) + _einsum("ecdb->edbc", d2g) - d2g
    )
    dgamma = 0.5 * (_einsum("ead,dbc->eabc", dg_inv, lower) + _einsum("ad,edbc->eabc", g_inv, dlower))
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    riemann = (
        _einsum("cadb->abcd", dgamma)
        - _einsum("dacb->abcd", dgamma)
        + _einsum("ace,edb->abcd", gamma, gamma)
        - _einsum("ade,ecb->abcd", gamma, gamma)
    )
    ricci = _einsum("abad->bd", riemann)
    scalar = _einsum("bd,bd->", g_inv, ricci)
    if isinstance(scalar, np.ndarray):
        scalar = scalar.item()
    return CurvatureBundle(g, g_inv, gamma, riemann, ricci, scalar, dg=dg, dgamma=dgamma)


def berger_scalar_curvature(lam: float, point3=(1.0, 0.3, 0.7)) -> float:
    """Scalar curvature of g_lambda (constant on S^3) evaluated by the engine."""
    return float(curvature_at(berger_field(lam), point3).scalar)


# tetrads and spin connection ----------------------------------------------


@dataclass
class Tetrad:
    e_hat: np.ndarray  # e_hat[alpha, mu] = hat e^alpha_mu (coframe)
    e: np.ndarray  # e[mu, alpha] = e^mu_alpha (frame)


def tetrad_components(params: MetricParams, x):
    U, V, A, _ = cartesian_potentials(params, x)
    su = dual.sqrt(U)
    sv = dual.sqrt(V)
    e_hat = np.zeros((4, 4), dtype=object)
    e = np.zeros((4, 4), dtype=object)
    for i in range(3):
        e_hat[i, i] = su
        e_hat[3, i] = sv * A[i]
        e[i, i] = 1.0 / su
        # exact inverse; reduces to -sqrt(V) A_i when U V = 1
        e[3, i] = -A[i] / su
    e_hat[3, 3] = sv
    e[3, 3] = 1.0 / sv
    return dual.densify(e_hat), dual.densify(e)


def tetrad_at(params: MetricParams, point) -> Tetrad:
    x = _coords(point, "cartesian")
    e_hat, e = tetrad_components(params, x)
    return Tetrad(e_hat, e)


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)


def gamma_matrices() -> np.ndarray:
    """Hermitian Euclidean Dirac matrices gamma^1..gamma^4 (index 0..3)."""
    gs = [-1j * np.block([[_Z2, s], [-s, _Z2]]) for s in _PAULI]
    gs.append(np.block([[_Z2, _I2], [_I2, _Z2]]))
    return np.array(gs)


def gamma5() -> np.ndarray:
    return np.block([[_I2, _Z2], [_Z2, -_I2]])


def spin_generators() -> np.ndarray:
    """S^{ab} = (i/4)[gamma^a, gamma^b]."""
    g = gamma_matrices()
    S = np.empty((4, 4, 4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            S[a, b] = 0.25j * (g[a] @ g[b] - g[b] @ g[a])
    return S


def cartan_coefficients(params: MetricParams, x) -> np.ndarray:
    """C[m, n, s] = e^a_m e^b_n (d_b ehat^s_a - d_a ehat^s_b)."""
    t = dual.new_tag()
    xd = dual.seed_gradient([float(value(v)) for v in x], t)
    e_hat_d, _ = tetrad_components(params, xd)
    e_hat = np.empty((4, 4))
    de = np.zeros((4, 4, 4))  # de[b, s, a] = d_b ehat^s_a
    for s in range(4):
        for a in range(4):
            re, ep = dual.part(e_hat_d[s, a], t)
            e_hat[s, a] = float(re)
            if not dual._is_zero(ep):
                de[:, s, a] = ep
    e = np.linalg.inv(e_hat)  # e[mu, alpha]
    curl = np.einsum("bsa->sab", de) - np.einsum("asb->sab", de)  # [s, a, b]
    return np.einsum("am,bn,sab->mns", e, e, curl)


def spin_connection_at(params: MetricParams, point) -> np.ndarray:
    """Spin connection matrices Gamma^spin_sigma, shape (4, 4, 4) complex."""
    x = _coords(point, "cartesian")
    e_hat, _ = tetrad_components(params, x)
    e_hat = np.asarray(e_hat, dtype=float)
    C = cartan_coefficients(params, x)
    comb = C + np.einsum("lmn->mnl", C) + np.einsum("lnm->mnl", C)
    S = spin_generators()
    # Gamma_sigma = (i/4) ehat^m_sigma S^{nl} (C_mnl + C_lmn + C_lnm)
    return 0.25j * np.einsum("ms,mnl,nlij->sij", e_hat, comb, S)


def spin_connection_from_christoffel(params: MetricParams, point) -> np.ndarray:
    """Independent route: omega_mu^{ab} from Levi-Civita Christoffels of the Cartesian metric.

    Gamma^spin_mu = (1/8) omega_mu{}_{ab} [gamma^a, gamma^b] with
    omega_mu{}^a{}_b = ehat^a_nu (d_mu e^nu_b + Gamma^nu_{mu l} e^l_b).
    """
    x = _coords(point, "cartesian")
    t = dual.new_tag()
    xd = dual.seed_gradient([float(value(v)) for v in x], t)
    _, e_d = tetrad_components(params, xd)
    e = np.empty((4, 4))
    de = np.zeros((4, 4, 4))  # de[mu, nu, b] = d_mu e^nu_b
    for nu in range(4):
        for b in range(4):
            re, ep = dual.part(e_d[nu, b], t)
            e[nu, b] = float(re)
            if not dual._is_zero(ep):
                de[:, nu, b] = ep
    e_hat = np.linalg.inv(e)
    _, _, gam = christoffel_at(cartesian_field(params), [float(value(v)) for v in x])
    gam = np.asarray(gam, dtype=float)
    omega = np.einsum("an,mnb->mab", e_hat, de + np.einsum("nml,lb->mnb", gam, e))
    g = gamma_matrices()
    comm = np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g)
    return 0.125 * np.einsum("mab,abij->mij", omega, comm)


def dirac_apply(params: MetricParams, psi: Callable, point) -> np.ndarray:
    """gamma^mu(x) (d_mu + Gamma^spin_mu) psi at a Cartesian point."""
    x = [float(value(v)) for v in _coords(point, "cartesian")]
    val, grad = _spinor_jet(psi, x)
    _, e = tetrad_components(params, x)
    e = np.asarray(e, dtype=float)
    g = gamma_matrices()
    gx = np.einsum("ma,aij->mij", e, g)  # gamma^mu(x)
    spin = spin_connection_at(params, x)
    cov = grad + np.einsum("mij,j->mi", spin, val)
    return np.einsum("mij,mj->i", gx, cov)


def dirac_closed_form(params: MetricParams, psi: Callable, point) -> np.ndarray:
    """Right-hand side (i/sqrt U) gamma.P + (i/sqrt V) gamma^4 P_4 + (i/2)(V/sqrt U) gamma^4 Sigma*.B_ef.

    P_i = -i (d_i - sqrt(UV) A_i d_4), P_4 = -i d_4, B_ef = rot(sqrt(UV) A).
    The printed operator presupposes U V = 1.
    """
    x = [float(value(v)) for v in _coords(point, "cartesian")]
    val, grad = _spinor_jet(psi, x)
    U, V, A, _ = cartesian_potentials(params, x)
    U, V = float(U), float(V)
    A = np.array([float(v) for v in A])
    g = gamma_matrices()
    suv = math.sqrt(U * V)
    P = np.array([-1j * (grad[i] - suv * A[i] * grad[3]) for i in range(3)])
    P4 = -1j * grad[3]
    S = spin_generators()
    eps3 = _levi_civita3()
    S_vec = -0.5 * np.einsum("ijk,jkab->iab", eps3, S[:3, :3])
    sigma_star = S_vec + 0.5j * np.einsum("ab,ibc->iac", g[3], g[:3])
    B = _effective_field(params, x)
    out = (1j / math.sqrt(U)) * np.einsum("iab,ib->a", g[:3], P)
    out = out + (1j / math.sqrt(V)) * (g[3] @ P4)
    out = out + 0.5j * (V / math.sqrt(U)) * (g[3] @ np.einsum("iab,i->ab", sigma_star, B) @ val)
    return out


def _effective_field(params: MetricParams, x) -> np.ndarray:
    """rot(sqrt(U V) A) by dual differentiation."""

    def weighted(xx):
        U, V, A, _ = cartesian_potentials(params, xx)
        s = dual.sqrt(U * V)
        return [s * A[0], s * A[1], s * A[2]]

    t = dual.new_tag()
    out = weighted(dual.seed_gradient(list(x), t))
    J = np.zeros((3, 4))  # J[i, k] = d_k W_i
    for i in range(3):
        e = dual.eps_of(out[i], t, (4,))
        J[i] = e
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def monopole_curl(params: MetricParams, x) -> np.ndarray:
    """rot A by dual differentiation of the monopole potential."""
    t = dual.new_tag()
    xd = dual.seed_gradient([float(value(v)) for v in x[:3]], t)
    A = monopole_potential(params, xd)
    J = np.array([dual.eps_of(A[i], t, (3,)) for i in range(3)])
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def _levi_civita3() -> np.ndarray:
    e = np.zeros((3, 3, 3))
    e[0, 1, 2] = e[1, 2, 0] = e[2, 0, 1] = 1.0
    e[0, 2, 1] = e[2, 1, 0] = e[1, 0, 2] = -1.0
    return e


def _spinor_jet(psi: Callable, x):
    """Value (4,) and derivatives (4 coords, 4 components) of a spinor field."""
    t = dual.new_tag()
    comps = psi(dual.seed_gradient(list(x), t))
    val = np.empty(4, dtype=complex)
    grad = np.zeros((4, 4), dtype=complex)
    for k, c in enumerate(comps):
        re, e = dual.part(c, t)
        val[k] = complex(re)
        if not dual._is_zero(e):
            grad[:, k] = e
    return val, grad
