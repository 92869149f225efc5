"""Symplectic chart models and their special group actions.

* ``make_r2n(n)``: R^2n with translations; the cocycle is the Heisenberg one.
* ``make_h2()``: the upper half-plane with PSL(2, R) acting by Moebius maps.
* ``make_disk()``: the open unit disk with area-preserving twist maps.
* ``product_model(A, B)``: block sums of forms, with factor embeddings.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import qmc

from .cohomology import GroupElement, IdentityMap, ProductElement
from .geometry import (
    DEFAULT_QUADRATURE,
    Curve,
    DomainError,
    OneForm,
    TwoForm,
    constant_curve,
    exact_form,
    exterior_derivative_at,
    line_integral,
    straight_segment,
)

VERTICAL_TOL = 1e-12
DEGENERATE_DISTANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ChartModel:
    """A symplectic manifold presented in one global chart.

    ``box_map`` sends the unit cube ``[0, 1)^dim`` onto a representative
    compact part of the domain; it drives both random and quasi-random
    sampling.
    """

    name: str
    dim: int
    omega: TwoForm
    omega1: OneForm
    x0: np.ndarray
    path: Callable[[np.ndarray, np.ndarray], Curve]
    domain: Callable[[np.ndarray], np.ndarray]
    box_map: Callable[[np.ndarray], np.ndarray]
    h1_trivial: bool = True
    constant_omega: bool = False
    factors: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        if not self.contains(self.x0):
            raise DomainError(f"basepoint {self.x0} is outside {self.name}")

    def contains(self, x) -> bool:
        return bool(np.all(self.domain(np.asarray(x, dtype=float))))

    def sample(self, rng, k: int) -> np.ndarray:
        return self.box_map(rng.random((k, self.dim)))

    def quasi_points(self, k: int) -> np.ndarray:
        key = ("halton", k)
        if key not in self._cache:
            u = qmc.Halton(self.dim, scramble=False).random(k + 1)[1:]
            self._cache[key] = self.box_map(u)
        return self._cache[key]

    def with_basepoint(self, x0) -> "ChartModel":
        return replace(self, x0=np.asarray(x0, dtype=float), _cache={})

    def with_gauge(self, potential, gradient=None) -> "ChartModel":
        """Same model with primitive ``w1 + df``."""
        return replace(self, omega1=self.omega1 + exact_form(potential, gradient), _cache={})

    def primitive_residual(self, points=None) -> float:
        """``max |d w1 - omega|`` over sampled points."""
        if points is None:
            points = self.quasi_points(100)
        return float(np.max(np.abs(exterior_derivative_at(self.omega1, points) - self.omega(points))))

    def curve(self, x, y) -> Curve:
        return self.path(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def _standard_matrix(n):
    j = np.zeros((2 * n, 2 * n))
    j[np.arange(n), np.arange(n, 2 * n)] = 1.0
    j[np.arange(n, 2 * n), np.arange(n)] = -1.0
    return j


def _constant_two_form(mat):
    mat = np.asarray(mat, dtype=float)
    return TwoForm(lambda x: np.broadcast_to(mat, np.shape(x)[:-1] + mat.shape).copy())


def make_r2n(n: int, x0=None) -> ChartModel:
    """R^2n with ``omega = sum dx_k ^ dx_{n+k}`` and ``w1 = 1/2 sum (x_k dx_{n+k} - x_{n+k} dx_k)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    dim = 2 * n

    def w1(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.concatenate([-x[..., n:], x[..., :n]], axis=-1)

    def everywhere(x):
        return np.ones(np.shape(x)[:-1], dtype=bool)

    return ChartModel(
        name=f"r2n:{n}",
        dim=dim,
        omega=_constant_two_form(_standard_matrix(n)),
        omega1=OneForm(w1),
        x0=np.zeros(dim) if x0 is None else x0,
        path=straight_segment,
        domain=everywhere,
        box_map=lambda u: 4.0 * u - 2.0,
        constant_omega=True,
    )


def heisenberg_closed_form(x, y) -> float:
    """``1/2 sum_k (x_k y_{n+k} - y_k x_{n+k})``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.shape[0] % 2:
        raise ValueError("expected two vectors of the same even length")
    n = x.shape[0] // 2
    return 0.5 * float(np.dot(x[:n], y[n:]) - np.dot(y[:n], x[n:]))


def symplectic_pairing(x, y) -> float:
    """``omega_0(x, y)`` for vectors of R^2n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    return float(x @ _standard_matrix(n) @ np.asarray(y, dtype=float))


# --- hyperbolic plane ------------------------------------------------------

def _to_complex(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def _to_real(z):
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


@dataclass(eq=False)
class Moebius(GroupElement):
    """An element of PSL(2, R), canonicalized to ``a > 0`` or ``a == 0, b > 0``."""

    a: float
    b: float
    c: float
    d: float
    dim: int = 2

    def __post_init__(self):
        m = np.array([[self.a, self.b], [self.c, self.d]], dtype=float)
        det = float(np.linalg.det(m))
        if abs(det - 1.0) >= 1e-12 * max(1.0, float(np.max(np.abs(m))) ** 2):
            raise ValueError(f"determinant {det!r} is not 1")
        if self.a < 0 or (self.a == 0 and self.b < 0):
            m = -m
        self.a, self.b, self.c, self.d = (float(v) for v in m.ravel())
        self.dim = 2

    @classmethod
    def from_matrix(cls, m, normalize: bool = True) -> "Moebius":
        m = np.asarray(m, dtype=float)
        if normalize:
            det = float(np.linalg.det(m))
            if det <= 0:
                raise ValueError("matrix must have positive determinant")
            m = m / math.sqrt(det)
        return cls(*m.ravel())

    @classmethod
    def rotation(cls, theta: float) -> "Moebius":
        """Rotation about ``i`` (the stabilizer of the basepoint)."""
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, s, -s, c)

    @classmethod
    def dilation(cls, lam: float) -> "Moebius":
        return cls(lam, 0.0, 0.0, 1.0 / lam)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def _denominator(self, z):
        den = self.c * z + self.d
        if np.any(den == 0):
            raise DomainError("point is mapped to infinity")
        return den

    def act(self, x):
        z = _to_complex(x)
        return _to_real((self.a * z + self.b) / self._denominator(z))

    def act_complex(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def differential_at(self, x):
        w = 1.0 / self._denominator(_to_complex(x)) ** 2
        u, v = np.real(w), np.imag(w)
        return np.stack([np.stack([u, -v], -1), np.stack([v, u], -1)], -2)

    def compose(self, other):
        if isinstance(other, Moebius):
            return Moebius.from_matrix(self.matrix @ other.matrix)
        return super().compose(other)

    def inverse(self):
        return Moebius(self.d, -self.b, -self.c, self.a)

    def signature(self):
        return np.array([self.a, self.b, self.c, self.d])

    def is_identity(self, tol=1e-12):
        return bool(np.max(np.abs(self.matrix - np.eye(2))) <= tol)


def moebius_act(m: Moebius, z):
    """Act on a point given as ``(x, y)`` coordinates or as a complex number."""
    if np.iscomplexobj(z) or isinstance(z, complex):
        if np.any(np.imag(z) <= 0):
            raise DomainError("point is not in the upper half-plane")
        return m.act_complex(z)
    x = np.asarray(z, dtype=float)
    if np.any(x[..., 1] <= 0):
        raise DomainError("point is not in the upper half-plane")
    return m.act(x)


def random_moebius(rng) -> Moebius:
    """``rotation . diag(lam, 1/lam) . rotation`` with ``lam`` in [1.1, 3]."""
    lam = rng.uniform(1.1, 3.0)
    t1, t2 = rng.uniform(0.0, 2 * math.pi, size=2)
    return Moebius.rotation(t1) * Moebius.dilation(lam) * Moebius.rotation(t2)


class GeodesicSegment(Curve):
    """Hyperbolic geodesic between two points, as a vertical segment or a semicircular arc."""

    def __init__(self, z1, z2):
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        self.center = None
        self.radius = None
        if abs(z1[0] - z2[0]) <= VERTICAL_TOL * max(1.0, abs(z1[0]), abs(z2[0])):
            self.kind = "vertical"
            x, y1 = z1[0], z1[1]
            ratio = math.log(z2[1] / y1)

            def param(t):
                t = np.asarray(t, dtype=float)
                return np.stack([np.full(t.shape, x), y1 * np.exp(ratio * t)], -1)

            def velocity(t):
                t = np.asarray(t, dtype=float)
                return np.stack([np.zeros(t.shape), y1 * ratio * np.exp(ratio * t)], -1)
        else:
            self.kind = "semicircle"
            c = (z1 @ z1 - z2 @ z2) / (2.0 * (z1[0] - z2[0]))
            r = math.hypot(z1[0] - c, z1[1])
            th1 = math.atan2(z1[1], z1[0] - c)
            th2 = math.atan2(z2[1], z2[0] - c)
            self.center, self.radius = c, r
            self.angles = (th1, th2)
            dth = th2 - th1

            def param(t):
                th = th1 + np.asarray(t, dtype=float) * dth
                return np.stack([c + r * np.cos(th), r * np.sin(th)], -1)

            def velocity(t):
                th = th1 + np.asarray(t, dtype=float) * dth
                return np.stack([-r * np.sin(th) * dth, r * np.cos(th) * dth], -1)

        super().__init__(param, z1, z2, velocity=velocity)


def geodesic(z1, z2) -> Curve:
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1[1] <= 0 or z2[1] <= 0:
        raise DomainError("geodesic endpoints must lie in the upper half-plane")
    if np.array_equal(z1, z2):
        return constant_curve(z1)
    return GeodesicSegment(z1, z2)


def hyperbolic_distance(z, w) -> float:
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    arg = 1.0 + np.sum((z - w) ** 2, axis=-1) / (2.0 * z[..., 1] * w[..., 1])
    return np.arccosh(arg)


def _h2_box(u):
    x = 4.0 * u[..., 0] - 2.0
    y = np.exp(math.log(0.25) + u[..., 1] * math.log(16.0))
    return np.stack([x, y], -1)


def make_h2(x0=(0.0, 1.0)) -> ChartModel:
    """Upper half-plane with ``omega = dx ^ dy / y^2`` and ``w1 = dx / y``."""

    def omega(x):
        y = np.asarray(x, dtype=float)[..., 1]
        out = np.zeros(np.shape(x)[:-1] + (2, 2))
        out[..., 0, 1] = 1.0 / y**2
        out[..., 1, 0] = -1.0 / y**2
        return out

    def w1(x):
        x = np.asarray(x, dtype=float)
        return np.stack([1.0 / x[..., 1], np.zeros(x.shape[:-1])], -1)

    return ChartModel(
        name="h2",
        dim=2,
        omega=TwoForm(omega),
        omega1=OneForm(w1),
        x0=x0,
        path=geodesic,
        domain=lambda x: np.asarray(x)[..., 1] > 0,
        box_map=_h2_box,
    )


class TriangleArea(NamedTuple):
    area: float
    degenerate: bool


def _tangent_angle(v: complex, w: complex) -> float:
    """Direction at ``v`` of the geodesic towards ``w``, via the disk model centred at ``v``."""
    wp = (w - v.real) / v.imag
    return cmath.phase((wp - 1j) / (wp + 1j)) + math.pi / 2


def _klein(z: complex) -> complex:
    zeta = (z - 1j) / (z + 1j)
    return 2 * zeta / (1 + abs(zeta) ** 2)


def triangle_area_oracle(z1, z2, z3) -> TriangleArea:
    """Signed area of a geodesic triangle from the Gauss-Bonnet angle defect.

    Positive for counterclockwise vertex order; the orientation is read off
    in the Klein model, where geodesics are straight.
    """
    pts = [complex(*np.asarray(z, dtype=float)) for z in (z1, z2, z3)]
    reals = [np.array([p.real, p.imag]) for p in pts]
    dmin = min(hyperbolic_distance(reals[i], reals[j]) for i, j in ((0, 1), (1, 2), (0, 2)))
    if dmin < DEGENERATE_DISTANCE:
        return TriangleArea(0.0, True)
    angle_sum = 0.0
    for i in range(3):
        v, a, b = pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]
        diff = _tangent_angle(v, a) - _tangent_angle(v, b)
        angle_sum += abs(math.remainder(diff, 2 * math.pi))
    k1, k2, k3 = (_klein(p) for p in pts)
    cross = ((k2 - k1).conjugate() * (k3 - k1)).imag
    sign = 1.0 if cross >= 0 else -1.0
    return TriangleArea(sign * (math.pi - angle_sum), False)


def _h2_model(model):
    return make_h2() if model is None else model


def gw_vertices(g1: Moebius, g2: Moebius, model=None):
    model = _h2_model(model)
    x0 = model.x0
    return x0, g1.act(x0), (g1 * g2).act(x0)


def circulation(model, vertices, cfg=DEFAULT_QUADRATURE) -> float:
    """``sum of integrals of w1`` around the closed polygon with canonical-path sides."""
    total = 0.0
    for i in range(len(vertices)):
        total += line_integral(model.omega1, model.path(vertices[i], vertices[(i + 1) % len(vertices)]),
                               cfg).value
    return total


def gw_cocycle(g1: Moebius, g2: Moebius, model=None, cfg=DEFAULT_QUADRATURE,
               method: str = "stokes") -> float:
    """Signed area of the geodesic triangle ``(x0, g1 x0, g1 g2 x0)``.

    ``method="stokes"`` integrates ``w1`` around the boundary;
    ``method="angle_defect"`` uses the Gauss-Bonnet oracle.
    """
    model = _h2_model(model)
    verts = gw_vertices(g1, g2, model)
    if method == "stokes":
        return circulation(model, verts, cfg)
    if method == "angle_defect":
        return triangle_area_oracle(*verts).area
    raise ValueError(f"unknown method {method!r}")


def gamma_cochain(g: Moebius, model=None, cfg=DEFAULT_QUADRATURE) -> float:
    """Integral of ``w1`` along the geodesic from ``x0`` to ``g x0``."""
    model = _h2_model(model)
    return line_integral(model.omega1, model.path(model.x0, g.act(model.x0)), cfg).value


# --- open disk -------------------------------------------------------------

def _bump(u):
    u = np.asarray(u, dtype=float)
    inside = u < 1.0
    safe = np.where(inside, u, 0.0)
    val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)
    dval = np.where(inside, -val / (1.0 - safe) ** 2, 0.0)
    return val, dval


@dataclass(eq=False)
class DiskTwist(GroupElement):
    """``p + R(psi(|x - p|^2)) (x - p)``: a twist about ``center`` that keeps radii.

    The angle profile ``psi(s)`` is a sum of terms: ``("poly", coeffs)``
    gives ``sum c_k s^k``; ``("bump", rho, amp)`` gives
    ``amp * exp(1 - 1/(1 - s/rho^2))`` inside radius ``rho`` and 0 outside.
    Twists about the origin with polynomial profiles preserve the unit
    disk; bump twists need ``|center| + rho < 1``.
    """

    center: np.ndarray
    terms: tuple

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.dim = 2
        for term in self.terms:
            if term[0] == "bump":
                if np.linalg.norm(self.center) + term[1] >= 1.0:
                    raise ValueError("bump support must stay inside the unit disk")
            elif term[0] == "poly":
                if np.any(self.center != 0):
                    raise ValueError("polynomial profiles are only allowed about the origin")
            else:
                raise ValueError(f"unknown profile term {term[0]!r}")

    @classmethod
    def polynomial(cls, coeffs) -> "DiskTwist":
        return cls(np.zeros(2), (("poly", tuple(float(c) for c in coeffs)),))

    @classmethod
    def bump(cls, center, rho: float, amp: float) -> "DiskTwist":
        return cls(np.asarray(center, dtype=float), (("bump", float(rho), float(amp)),))

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        psi = np.zeros(s.shape)
        dpsi = np.zeros(s.shape)
        for term in self.terms:
            if term[0] == "poly":
                for k, c in enumerate(term[1]):
                    psi = psi + c * s**k
                    if k:
                        dpsi = dpsi + k * c * s ** (k - 1)
            else:
                _, rho, amp = term
                val, dval = _bump(s / rho**2)
                psi = psi + amp * val
                dpsi = dpsi + amp * dval / rho**2
        return psi, dpsi

    def act(self, x):
        d = np.asarray(x, dtype=float) - self.center
        psi, _ = self.profile(np.sum(d * d, axis=-1))
        c, s = np.cos(psi), np.sin(psi)
        return self.center + np.stack([c * d[..., 0] - s * d[..., 1], s * d[..., 0] + c * d[..., 1]], -1)

    def differential_at(self, x):
        d = np.asarray(x, dtype=float) - self.center
        psi, dpsi = self.profile(np.sum(d * d, axis=-1))
        c, s = np.cos(psi), np.sin(psi)
        rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        rd = np.stack([-s * d[..., 0] - c * d[..., 1], c * d[..., 0] - s * d[..., 1]], -1)
        return rot + np.einsum("...i,...j->...ij", rd, 2.0 * dpsi[..., None] * d)

    def compose(self, other):
        if isinstance(other, DiskTwist) and np.array_equal(self.center, other.center):
            return DiskTwist(self.center, self.terms + other.terms)
        return super().compose(other)

    def inverse(self):
        neg = []
        for term in self.terms:
            if term[0] == "poly":
                neg.append(("poly", tuple(-c for c in term[1])))
            else:
                neg.append(("bump", term[1], -term[2]))
        return DiskTwist(self.center, tuple(neg))


def _disk_box(u):
    r = 0.9 * np.sqrt(u[..., 0])
    th = 2 * math.pi * u[..., 1]
    return np.stack([r * np.cos(th), r * np.sin(th)], -1)


def make_disk(x0=(0.0, 0.0)) -> ChartModel:
    """Open unit disk with ``omega = dx ^ dy`` and ``w1 = 1/2 (x dy - y dx)``."""

    def w1(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.stack([-x[..., 1], x[..., 0]], -1)

    return ChartModel(
        name="disk",
        dim=2,
        omega=_constant_two_form(_standard_matrix(1)),
        omega1=OneForm(w1),
        x0=x0,
        path=straight_segment,
        domain=lambda x: np.sum(np.asarray(x) ** 2, axis=-1) < 1.0,
        box_map=_disk_box,
        constant_omega=True,
    )


def random_disk_twist(rng) -> DiskTwist:
    """Bump twist with random centre, support radius and amplitude."""
    r = rng.uniform(0.0, 0.3)
    th = rng.uniform(0.0, 2 * math.pi)
    center = np.array([r * math.cos(th), r * math.sin(th)])
    rho = rng.uniform(0.6, 0.95 - r)
    return DiskTwist.bump(center, rho, rng.uniform(-2.0, 2.0))


# --- products --------------------------------------------------------------

def _product_path(A, B):
    da = A.dim

    def path(x, y):
        ca = A.path(x[:da], y[:da])
        cb = B.path(x[da:], y[da:])
        if (ca.constant or np.array_equal(ca.start, ca.end)) and (
            cb.constant or np.array_equal(cb.start, cb.end)
        ):
            return constant_curve(x)
        return Curve(
            lambda t: np.concatenate([ca(t), cb(t)], -1),
            x,
            y,
            velocity=lambda t: np.concatenate([ca.velocity(t), cb.velocity(t)], -1),
        )

    return path


def product_model(A: ChartModel, B: ChartModel) -> ChartModel:
    da, db = A.dim, B.dim
    dim = da + db

    def omega(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (dim, dim))
        out[..., :da, :da] = A.omega(x[..., :da])
        out[..., da:, da:] = B.omega(x[..., da:])
        return out

    def w1(x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([A.omega1(x[..., :da]), B.omega1(x[..., da:])], -1)

    return ChartModel(
        name=f"product:{A.name},{B.name}",
        dim=dim,
        omega=TwoForm(omega),
        omega1=OneForm(w1),
        x0=np.concatenate([A.x0, B.x0]),
        path=_product_path(A, B),
        domain=lambda x: np.logical_and(A.domain(np.asarray(x)[..., :da]),
                                        B.domain(np.asarray(x)[..., da:])),
        box_map=lambda u: np.concatenate([A.box_map(u[..., :da]), B.box_map(u[..., da:])], -1),
        h1_trivial=A.h1_trivial and B.h1_trivial,
        constant_omega=A.constant_omega and B.constant_omega,
        factors=(A, B),
    )


def embed(model: ChartModel, g: GroupElement, factor: int = 0) -> ProductElement:
    """Let ``g`` act on one factor of a product model and trivially on the other."""
    A, B = model.factors
    if factor == 0:
        return ProductElement(g, IdentityMap(B.dim))
    return ProductElement(IdentityMap(A.dim), g)


MODEL_BUILDERS = {
    "h2": make_h2,
    "disk": make_disk,
}


def parse_model(spec: str, x0=None) -> ChartModel:
    """``r2n:n``, ``h2``, ``disk`` or ``product:A,B`` (factors without nested products)."""
    spec = spec.strip()
    if spec.startswith("product:"):
        parts = spec[len("product:"):].split(",")
        if len(parts) != 2:
            raise ValueError(f"product model needs two factors: {spec!r}")
        model = product_model(parse_model(parts[0]), parse_model(parts[1]))
    elif spec.startswith("r2n:"):
        model = make_r2n(int(spec[4:]))
    elif spec in MODEL_BUILDERS:
        model = MODEL_BUILDERS[spec]()
    else:
        raise ValueError(f"unknown model {spec!r}")
    if x0 is not None:
        model = model.with_basepoint(x0)
    return model


def random_element(model: ChartModel, rng) -> GroupElement:
    """A random symplectomorphism from the model's built-in family."""
    from .cohomology import Translation

    if model.factors:
        A, B = model.factors
        return ProductElement(random_element(A, rng), random_element(B, rng))
    if model.name.startswith("r2n"):
        return Translation(rng.uniform(-2.0, 2.0, model.dim))
    if model.name == "h2":
        return random_moebius(rng)
    if model.name == "disk":
        return random_disk_twist(rng)
    raise ValueError(f"no element family for {model.name}")
