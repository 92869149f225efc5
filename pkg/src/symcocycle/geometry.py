"""Chart-based numerical differential geometry.

Every tensor object here is a thin wrapper around a vectorized callable.
Points are float arrays whose last axis holds chart coordinates, so a
single point has shape ``(dim,)`` and a batch has shape ``(..., dim)``.
Forms, fields and maps must accept both.

Conventions
-----------
* A 1-form evaluates to a covector of shape ``(..., dim)``.
* A 2-form evaluates to an antisymmetric matrix ``M`` with
  ``Omega(u, v) = u @ M @ v``, so ``dx^dy`` on the plane is
  ``[[0, 1], [-1, 0]]``.
* ``(dw)_ij = d_i w_j - d_j w_i``.
* ``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np

FD_JACOBIAN_STEP = 1e-6
FD_DERIVATIVE_STEP = 1e-5


class DomainError(ValueError):
    """A point, or a finite-difference stencil around it, left the chart."""


class QuadratureError(RuntimeError):
    """Composite Gauss-Legendre failed to converge within ``max_panels``."""

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


def as_point(coords, dim: Optional[int] = None) -> np.ndarray:
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"a point is a 1-d coordinate vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"expected {dim} coordinates, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite coordinates {x}")
    return x


def _check_domain(domain, pts):
    if domain is None:
        return
    if not np.all(domain(pts)):
        raise DomainError("finite-difference stencil leaves the chart domain")


@dataclass(frozen=True)
class OneForm:
    """A 1-form; ``potential`` is present only when the form is known exact."""

    eval: Callable[[np.ndarray], np.ndarray]
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def __add__(self, other: "OneForm") -> "OneForm":
        pot = None
        if self.potential is not None and other.potential is not None:
            p1, p2 = self.potential, other.potential
            pot = lambda x: p1(x) + p2(x)  # noqa: E731
        return OneForm(lambda x: self(x) + other(x), pot)

    def __sub__(self, other: "OneForm") -> "OneForm":
        pot = None
        if self.potential is not None and other.potential is not None:
            p1, p2 = self.potential, other.potential
            pot = lambda x: p1(x) - p2(x)  # noqa: E731
        return OneForm(lambda x: self(x) - other(x), pot)


def exact_form(potential, gradient=None) -> OneForm:
    """``df`` for a scalar function ``f``; the gradient defaults to central differences."""
    if gradient is None:
        gradient = lambda x: gradient_fd(potential, x)  # noqa: E731
    return OneForm(gradient, potential)


@dataclass(frozen=True)
class TwoForm:
    eval: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def pair(self, u, v, x):
        """``Omega_x(u, v)``."""
        return np.einsum("...i,...ij,...j->...", u, self(x), v)


@dataclass(frozen=True)
class VectorField:
    """A vector field, optionally carrying its exact Jacobian ``J[..., i, j] = d_j X^i``."""

    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def jacobian_at(self, x, step=FD_DERIVATIVE_STEP, domain=None):
        if self.jacobian is not None:
            return np.asarray(self.jacobian(np.asarray(x, dtype=float)), dtype=float)
        return jacobian_fd(self, x, step=step, domain=domain)


def constant_field(v) -> VectorField:
    v = np.asarray(v, dtype=float)
    d = v.shape[0]
    return VectorField(
        lambda x: np.broadcast_to(v, np.shape(x)).copy(),
        lambda x: np.zeros(np.shape(x)[:-1] + (d, d)),
    )


class Curve:
    """A parametrized path ``[0, 1] -> chart`` with exact cached endpoints.

    ``velocity`` is the exact derivative when known; otherwise it is taken
    by central differences clamped to ``[0, 1]``.
    """

    def __init__(self, param, start, end, velocity=None, constant=False):
        self._param = param
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self._velocity = velocity
        self.constant = constant

    @property
    def dim(self):
        return self.start.shape[0]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        pts = np.asarray(self._param(t), dtype=float)
        if t.ndim == 0:
            if t == 0.0:
                return self.start.copy()
            if t == 1.0:
                return self.end.copy()
            return pts
        pts = pts.copy()
        pts[t == 0.0] = self.start
        pts[t == 1.0] = self.end
        return pts

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        if self._velocity is not None:
            return np.asarray(self._velocity(t), dtype=float)
        h = 1e-6
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (self._param(hi) - self._param(lo)) / (hi - lo)[..., None]


def constant_curve(x) -> Curve:
    x = np.asarray(x, dtype=float)
    return Curve(
        lambda t: np.broadcast_to(x, np.shape(t) + x.shape).copy(),
        x,
        x,
        velocity=lambda t: np.zeros(np.shape(t) + x.shape),
        constant=True,
    )


def straight_segment(x, y) -> Curve:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return constant_curve(x)
    d = y - x
    return Curve(
        lambda t: x + np.asarray(t)[..., None] * d,
        x,
        y,
        velocity=lambda t: np.broadcast_to(d, np.shape(t) + d.shape).copy(),
    )


@dataclass(frozen=True)
class QuadratureConfig:
    gauss_order: int = 16
    max_panels: int = 4096
    rel_tol: float = 1e-10
    # Floor for integrals whose exact value is zero.
    abs_tol: float = 1e-13

    def __post_init__(self):
        if self.gauss_order < 2:
            raise ValueError("gauss_order must be at least 2")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_panels < 1:
            raise ValueError("max_panels must be positive")


DEFAULT_QUADRATURE = QuadratureConfig()


class Integral(NamedTuple):
    value: float
    error: float
    panels: int


@lru_cache(maxsize=None)
def _gauss_nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def _composite_nodes(order: int, panels: int, a=0.0, b=1.0):
    x, w = _gauss_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def gauss_legendre(f, a: float = 0.0, b: float = 1.0,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Integral:
    """Composite Gauss-Legendre for a vectorized scalar integrand.

    The panel count doubles until two successive estimates agree to
    ``rel_tol`` (relative) or ``abs_tol`` (absolute).
    """
    panels = 1
    t, w = _composite_nodes(cfg.gauss_order, panels, a, b)
    prev = float(np.dot(w, f(t)))
    while panels < cfg.max_panels:
        panels *= 2
        t, w = _composite_nodes(cfg.gauss_order, panels, a, b)
        cur = float(np.dot(w, f(t)))
        if not math.isfinite(cur):
            raise QuadratureError("non-finite integrand", cur)
        err = abs(cur - prev)
        if err <= max(cfg.rel_tol * abs(cur), cfg.abs_tol):
            return Integral(cur, err, panels)
        prev = cur
    raise QuadratureError(
        f"no convergence with {cfg.max_panels} panels", prev, float("inf")
    )


def line_integral(form: OneForm, curve: Curve,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> Integral:
    """Integrate ``form`` along ``curve``; constant curves give exactly 0."""
    if curve.constant or np.array_equal(curve.start, curve.end):
        return Integral(0.0, 0.0, 0)

    def integrand(t):
        return np.einsum("...i,...i->...", form(curve(t)), curve.velocity(t))

    return gauss_legendre(integrand, 0.0, 1.0, cfg)


def _scaled_steps(x, step):
    return step * (1.0 + np.linalg.norm(x, axis=-1))


def _central(f, x, h, e, domain):
    """Fourth-order central difference of ``f`` along direction ``e`` with steps ``h``."""
    hp = h[..., None] * e
    for k in (-2, -1, 1, 2):
        _check_domain(domain, x + k * hp)
    fp1, fm1 = np.asarray(f(x + hp)), np.asarray(f(x - hp))
    fp2, fm2 = np.asarray(f(x + 2 * hp)), np.asarray(f(x - 2 * hp))
    return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / 12.0


def gradient_fd(f, x, step=FD_DERIVATIVE_STEP, domain=None):
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    h = _scaled_steps(x, step)
    out = np.empty(x.shape)
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        out[..., j] = _central(f, x, h, e, domain) / h
    return out


def jacobian_fd(f, x, step=FD_JACOBIAN_STEP, domain=None):
    """Central-difference Jacobian ``J[..., i, j] = d_j f^i`` with step ``step*(1+|x|)``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    h = _scaled_steps(x, step)
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        cols.append(_central(f, x, h, e, domain) / h[..., None])
    jac = np.stack(cols, axis=-1)
    if not np.all(np.isfinite(jac)):
        raise DomainError("non-finite Jacobian entries")
    return jac


def map_differential(g, x):
    """Differential of a map at ``x``: exact when ``g`` supplies it, else finite differences."""
    diff = getattr(g, "differential_at", None)
    jac = diff(x) if diff is not None else None
    if jac is None:
        act = g.act if hasattr(g, "act") else g
        jac = jacobian_fd(act, x, step=FD_JACOBIAN_STEP)
    jac = np.asarray(jac, dtype=float)
    if not np.all(np.isfinite(jac)):
        raise DomainError("non-finite Jacobian entries")
    return jac


def _act(g, x):
    return g.act(x) if hasattr(g, "act") else g(x)


def pullback_one_form(g, form: OneForm, x, domain=None):
    """Covector ``(g^* form)_x = form(g(x)) . Dg(x)``."""
    x = np.asarray(x, dtype=float)
    if domain is not None and not np.all(domain(x)):
        raise DomainError(f"point {x} outside chart domain")
    return np.einsum("...i,...ij->...j", form(_act(g, x)), map_differential(g, x))


def pullback_form(g, form: OneForm) -> OneForm:
    return OneForm(lambda x: pullback_one_form(g, form, x))


def pullback_two_form(g, omega: TwoForm, x):
    x = np.asarray(x, dtype=float)
    jac = map_differential(g, x)
    return np.einsum("...ki,...kl,...lj->...ij", jac, omega(_act(g, x)), jac)


def exterior_derivative_at(form: OneForm, x, step=FD_DERIVATIVE_STEP, domain=None):
    jac = jacobian_fd(form, x, step=step, domain=domain)
    return np.swapaxes(jac, -1, -2) - jac


def interior_product(X, omega, x):
    """Covector ``v -> Omega(X(x), v)``; ``X`` and ``omega`` may be callables or arrays."""
    vec = X(x) if callable(X) else np.asarray(X, dtype=float)
    mat = omega(x) if callable(omega) else np.asarray(omega, dtype=float)
    if vec.shape[-1] != mat.shape[-1]:
        raise ValueError("vector field and 2-form dimensions differ")
    return np.einsum("...i,...ij->...j", vec, mat)


def lie_bracket(X: VectorField, Y: VectorField, x, step=FD_DERIVATIVE_STEP, domain=None):
    x = np.asarray(x, dtype=float)
    jx = X.jacobian_at(x, step=step, domain=domain)
    jy = Y.jacobian_at(x, step=step, domain=domain)
    return np.einsum("...ij,...j->...i", jy, X(x)) - np.einsum("...ij,...j->...i", jx, Y(x))


def bracket_field(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]`` as a new field, evaluated lazily by :func:`lie_bracket`."""
    return VectorField(lambda x: lie_bracket(X, Y, x))


def pfaffian(a) -> float:
    a = np.asarray(a, dtype=float)
    m = a.shape[0]
    if m % 2:
        return 0.0
    if m == 0:
        return 1.0
    total = 0.0
    rest = list(range(1, m))
    for k, j in enumerate(rest):
        if a[0, j] == 0.0:
            continue
        keep = [i for i in rest if i != j]
        total += (-1) ** k * a[0, j] * pfaffian(a[np.ix_(keep, keep)])
    return total


@lru_cache(maxsize=None)
def _signed_permutations(m: int):
    out = []
    for perm in itertools.permutations(range(m)):
        inversions = sum(1 for i in range(m) for j in range(i + 1, m) if perm[i] > perm[j])
        out.append((perm, -1 if inversions % 2 else 1))
    return tuple(out)


def wedge_top_coefficient(factors) -> float:
    """Coefficient of ``f_1 ^ ... ^ f_k`` on ``dx_1 ^ ... ^ dx_m``, by brute-force antisymmetrization.

    Each factor is a covector (1-form) or an antisymmetric matrix (2-form)
    at a single point; degrees must add up to the dimension ``m``.
    """
    factors = [np.asarray(f, dtype=float) for f in factors]
    degrees = [f.ndim for f in factors]
    m = factors[0].shape[0]
    if sum(degrees) != m:
        raise ValueError("factor degrees must add up to the dimension")
    norm = math.prod(math.factorial(k) for k in degrees)
    total = 0.0
    for perm, sign in _signed_permutations(m):
        term = 1.0
        pos = 0
        for f, k in zip(factors, degrees):
            term *= f[perm[pos]] if k == 1 else f[perm[pos], perm[pos + 1]]
            pos += k
            if term == 0.0:
                break
        total += sign * term
    return total / norm


def top_power_at(omega, x, n: int, method: str = "pfaffian") -> float:
    """Coefficient of ``Omega^n`` relative to ``dx_1 ^ ... ^ dx_2n`` at a single point."""
    mat = omega(x) if callable(omega) else np.asarray(omega, dtype=float)
    if mat.shape[-1] % 2:
        raise ValueError("odd dimension has no top power of a 2-form")
    if mat.shape[-1] != 2 * n:
        raise ValueError(f"dimension {mat.shape[-1]} is not 2n for n={n}")
    if method == "pfaffian":
        return math.factorial(n) * pfaffian(mat)
    if method == "antisymmetrize":
        return wedge_top_coefficient([mat] * n)
    raise ValueError(f"unknown method {method!r}")
