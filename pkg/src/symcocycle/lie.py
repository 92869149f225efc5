"""Chevalley-Eilenberg cochains, Hamiltonian fields, and the point-evaluation cocycle.

Sign conventions: ``i_{X_f} omega = df`` and ``{f, g} = -omega(X_f, X_g)``.
With the vector-field bracket of :mod:`symcocycle.geometry` this makes
``f -> X_f`` a Lie algebra homomorphism and gives ``{x_k, x_{n+k}} = -1``
on R^2n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .geometry import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    VectorField,
    _composite_nodes,
    bracket_field,
    gradient_fd,
    interior_product,
    lie_bracket,
    line_integral,
    OneForm,
    QuadratureError,
    top_power_at,
    wedge_top_coefficient,
)


class NonCommutingError(ValueError):
    pass


# --- cochains --------------------------------------------------------------

@dataclass(frozen=True)
class LieCochain:
    """An alternating ``degree``-form on a Lie algebra whose bracket is ``bracket``."""

    degree: int
    func: Callable[..., float]
    bracket: Callable = None

    def __call__(self, *xs) -> float:
        if len(xs) != self.degree:
            raise TypeError(f"cochain of degree {self.degree} got {len(xs)} arguments")
        if self.degree == 0:
            return float(self.func())
        return float(self.func(*xs))


def ce_coboundary(c: LieCochain, *xs, bracket=None) -> float:
    """``(delta c)(x_1..x_{p+1}) = sum_{i<j} (-1)^{i+j} c([x_i, x_j], x_1, ^i, ^j, ..)``."""
    bracket = bracket or c.bracket
    p = c.degree
    if len(xs) != p + 1:
        raise TypeError(f"delta of a degree-{p} cochain takes {p + 1} arguments, got {len(xs)}")
    total = 0.0
    for i, j in itertools.combinations(range(p + 1), 2):
        rest = [x for k, x in enumerate(xs) if k not in (i, j)]
        # 0-based indices shift both exponents by one, which cancels.
        total += (-1) ** (i + j) * c(bracket(xs[i], xs[j]), *rest)
    return total


def ce_differential(c: LieCochain, bracket=None) -> LieCochain:
    bracket = bracket or c.bracket
    return LieCochain(c.degree + 1, lambda *xs: ce_coboundary(c, *xs, bracket=bracket), bracket)


def alternation_residual(c: LieCochain, x, y) -> float:
    return abs(c(x, y) + c(y, x))


# --- sl(2, R) --------------------------------------------------------------

SL2_H = np.array([[1.0, 0.0], [0.0, -1.0]])
SL2_E = np.array([[0.0, 1.0], [0.0, 0.0]])
SL2_F = np.array([[0.0, 0.0], [1.0, 0.0]])


def sl2_basis():
    return [SL2_H.copy(), SL2_E.copy(), SL2_F.copy()]


def sl2_bracket(a, b):
    return a @ b - b @ a


def sl2_coords(a) -> np.ndarray:
    """Coordinates of a traceless matrix in the basis ``H, E, F``."""
    a = np.asarray(a, dtype=float)
    if abs(np.trace(a)) > 1e-14 * max(1.0, float(np.max(np.abs(a)))):
        raise ValueError("matrix is not traceless")
    return np.array([a[0, 0], a[0, 1], a[1, 0]])


def sl2_exp(a) -> np.ndarray:
    """``exp(A)`` for traceless ``A`` using ``A^2 = -det(A) I``.

    Hyperbolic, parabolic and elliptic cases are separated by the sign of
    ``-det A``; the cosh/sinh branch is replaced by its Taylor polynomial
    near zero.
    """
    a = np.asarray(a, dtype=float)
    q = -float(np.linalg.det(a))
    eye = np.eye(2)
    if abs(q) < 1e-8:
        return (1.0 + q / 2 + q * q / 24) * eye + (1.0 + q / 6 + q * q / 120) * a
    if q > 0:
        r = math.sqrt(q)
        return math.cosh(r) * eye + (math.sinh(r) / r) * a
    r = math.sqrt(-q)
    return math.cos(r) * eye + (math.sin(r) / r) * a


# --- group -> algebra ------------------------------------------------------

def _mixed_difference(F, h):
    return (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4.0 * h * h)


def group_to_algebra(c, exp, X, Y, h: float = 1e-3, richardson: bool = True) -> float:
    """``d^2/dt ds [c(exp tX, exp sY) - c(exp sY, exp tX)]`` at ``t = s = 0``.

    Central mixed difference, optionally with one Richardson step.
    """
    def F(t, s):
        gx, gy = exp(t * X), exp(s * Y)
        return c(gx, gy) - c(gy, gx)

    d1 = _mixed_difference(F, h)
    if not richardson:
        out = d1
    else:
        d2 = _mixed_difference(F, h / 2)
        out = (4.0 * d2 - d1) / 3.0
    if not math.isfinite(out):
        raise ArithmeticError("non-finite mixed derivative")
    return out


def algebra_cochain(c, exp, bracket, h: float = 1e-3) -> LieCochain:
    return LieCochain(2, lambda X, Y: group_to_algebra(c, exp, np.asarray(X), np.asarray(Y), h), bracket)


class WhiteheadResult(NamedTuple):
    functional: np.ndarray
    residual: float
    rank: int


def whitehead_witness(c: LieCochain, basis: Sequence, coords: Callable,
                      bracket=None) -> WhiteheadResult:
    """Least-squares ``lambda`` with ``c(e_i, e_j) = -lambda([e_i, e_j])`` over basis pairs.

    ``coords`` maps an algebra element to its coordinate vector.  A small
    residual says ``c`` is a coboundary on this algebra.
    """
    bracket = bracket or c.bracket
    rows, rhs = [], []
    for i, j in itertools.combinations(range(len(basis)), 2):
        rows.append(-np.asarray(coords(bracket(basis[i], basis[j])), dtype=float))
        rhs.append(c(basis[i], basis[j]))
    A = np.array(rows)
    b = np.array(rhs)
    lam, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    return WhiteheadResult(lam, float(np.max(np.abs(A @ lam - b))), int(rank))


def commuting_pair_witness(c: LieCochain, X, Y, points=None, bracket=None, tol: float = 1e-8) -> float:
    """``c(X, Y)`` for commuting ``X, Y``; nonzero certifies ``c`` is not a coboundary.

    For vector fields the bracket is checked at ``points``; for matrices it
    is the commutator.
    """
    bracket = bracket or c.bracket
    if isinstance(X, (VectorField, HamiltonianField, TorusField)):
        pts = np.atleast_2d(points)
        res = float(np.max(np.abs(lie_bracket(as_vector_field(X), as_vector_field(Y), pts))))
    else:
        res = float(np.max(np.abs(bracket(X, Y))))
    if res > tol:
        raise NonCommutingError(f"arguments do not commute (residual {res:.3g})")
    return c(X, Y)


# --- functions with exact derivatives --------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """``sum coeff * prod x_i^e_i`` with exact gradient and Hessian."""

    terms: tuple  # ((exponents, coeff), ...)
    dim: int

    @classmethod
    def from_dict(cls, terms: dict, dim: int) -> "Polynomial":
        return cls(tuple((tuple(int(e) for e in k), float(v)) for k, v in sorted(terms.items())), dim)

    @classmethod
    def coordinate(cls, k: int, dim: int) -> "Polynomial":
        e = [0] * dim
        e[k] = 1
        return cls(((tuple(e), 1.0),), dim)

    @classmethod
    def random(cls, dim: int, degree: int, rng, scale: float = 1.0) -> "Polynomial":
        terms = {}
        for total in range(1, degree + 1):
            for combo in itertools.combinations_with_replacement(range(dim), total):
                e = [0] * dim
                for i in combo:
                    e[i] += 1
                terms[tuple(e)] = scale * rng.uniform(-1.0, 1.0)
        return cls.from_dict(terms, dim)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for e, c in self.terms:
            out = out + c * np.prod(x ** np.array(e), axis=-1)
        return out

    def _monomial_derivative(self, x, e, i):
        if e[i] == 0:
            return None
        e2 = list(e)
        e2[i] -= 1
        return e[i] * np.prod(x ** np.array(e2), axis=-1)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for e, c in self.terms:
            for i in range(self.dim):
                d = self._monomial_derivative(x, e, i)
                if d is not None:
                    out[..., i] += c * d
        return out

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (self.dim,))
        for e, c in self.terms:
            for i in range(self.dim):
                if e[i] == 0:
                    continue
                e1 = list(e)
                e1[i] -= 1
                for j in range(self.dim):
                    if e1[j] == 0:
                        continue
                    e2 = list(e1)
                    e2[j] -= 1
                    out[..., i, j] += c * e[i] * e1[j] * np.prod(x ** np.array(e2), axis=-1)
        return out


def _gradient(f, x):
    grad = getattr(f, "gradient", None)
    return grad(x) if grad is not None else gradient_fd(f, x)


# --- Hamiltonian fields ----------------------------------------------------

@dataclass(frozen=True)
class HamiltonianField:
    potential: Callable
    field: VectorField
    model: object = None

    def __call__(self, x):
        return self.field(x)

    @property
    def jacobian(self):
        return self.field.jacobian

    def jacobian_at(self, x, **kw):
        return self.field.jacobian_at(x, **kw)


def hamiltonian_field(model, f) -> HamiltonianField:
    """Solve ``omega(x)^T X = grad f(x)`` pointwise, i.e. ``i_X omega = df``.

    When ``omega`` is constant and ``f`` has an exact Hessian the field
    carries its exact Jacobian.
    """
    def field_eval(x):
        x = np.asarray(x, dtype=float)
        mat = np.swapaxes(model.omega(x), -1, -2)
        return np.linalg.solve(mat, _gradient(f, x)[..., None])[..., 0]

    jac = None
    if model.constant_omega and hasattr(f, "hessian"):
        def jac(x):
            x = np.asarray(x, dtype=float)
            mat = np.swapaxes(model.omega(x), -1, -2)
            return np.linalg.solve(mat, f.hessian(x))

    return HamiltonianField(f, VectorField(field_eval, jac), model)


def as_vector_field(X) -> VectorField:
    if isinstance(X, VectorField):
        return X
    if isinstance(X, HamiltonianField):
        return X.field
    if isinstance(X, TorusField):
        return X.vector_field()
    raise TypeError(f"not a vector field: {X!r}")


def field_bracket(X, Y) -> VectorField:
    return bracket_field(as_vector_field(X), as_vector_field(Y))


def poisson_bracket(model, f, g) -> Callable:
    """Pointwise ``{f, g} = -omega(X_f, X_g)``."""
    Xf = hamiltonian_field(model, f)
    Xg = hamiltonian_field(model, g)

    def value(x):
        x = np.asarray(x, dtype=float)
        return -model.omega.pair(Xf(x), Xg(x), x)

    return value


def c_x0(model, X, Y, x0=None) -> float:
    """``omega(X, Y)`` evaluated at the basepoint."""
    x0 = model.x0 if x0 is None else np.asarray(x0, dtype=float)
    X, Y = as_vector_field(X), as_vector_field(Y)
    return float(model.omega.pair(X(x0), Y(x0), x0))


def c_x0_cochain(model, x0=None) -> LieCochain:
    return LieCochain(2, lambda X, Y: c_x0(model, X, Y, x0), field_bracket)


def basepoint_shift_check(model, X, Y, x, cfg=DEFAULT_QUADRATURE):
    """Both sides of ``c_x - c_x0 = -integral_{x0}^{x} i_{[X,Y]} omega``."""
    x = np.asarray(x, dtype=float)
    lhs = c_x0(model, X, Y, x) - c_x0(model, X, Y)
    br = field_bracket(X, Y)
    form = OneForm(lambda p: interior_product(br, model.omega, p))
    rhs = -line_integral(form, model.curve(model.x0, x), cfg).value
    return lhs, rhs


def om_identity_check(model, X, Y, x):
    """``(omega(X,Y) omega^n, n alpha_X ^ alpha_Y ^ omega^{n-1})`` as top-form coefficients at ``x``."""
    x = np.asarray(x, dtype=float)
    n = model.dim // 2
    X, Y = as_vector_field(X), as_vector_field(Y)
    mat = model.omega(x)
    lhs = float(X(x) @ mat @ Y(x)) * top_power_at(mat, x, n)
    ax = interior_product(X, mat, x)
    ay = interior_product(Y, mat, x)
    rhs = n * wedge_top_coefficient([ax, ay] + [mat] * (n - 1))
    return lhs, rhs


def trace_identity(model, points: int = 16, rng=None, spread_tol: float = 1e-9) -> float:
    """``sum_k {x_k, x_{n+k}}`` on R^2n; the value is ``-n`` and must not vary in space."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = model.dim // 2
    pts = model.sample(rng, points)
    total = np.zeros(points)
    for k in range(n):
        f = Polynomial.coordinate(k, model.dim)
        g = Polynomial.coordinate(n + k, model.dim)
        total = total + poisson_bracket(model, f, g)(pts)
    spread = float(np.max(total) - np.min(total))
    if spread > spread_tol:
        raise ArithmeticError(f"bracket sum is not constant (spread {spread:.3g})")
    return float(np.mean(total))


def homomorphism_residual(model, f, g, points) -> float:
    """``max |X_{f,g} - [X_f, X_g]|`` at the given points, with ``{f, g}`` built pointwise."""
    pb = poisson_bracket(model, f, g)
    lhs = hamiltonian_field(model, pb)(points)
    rhs = lie_bracket(hamiltonian_field(model, f).field, hamiltonian_field(model, g).field, points)
    return float(np.max(np.abs(lhs - rhs)))


# --- flat torus ------------------------------------------------------------

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrigPolynomial:
    """``sum a cos(2 pi (k x + l y)) + b sin(2 pi (k x + l y))`` on the unit torus."""

    terms: tuple = ()  # ((k, l, a, b), ...)

    @classmethod
    def random(cls, rng, max_freq: int = 2, scale: float = 0.5) -> "TrigPolynomial":
        terms = []
        for k in range(-max_freq, max_freq + 1):
            for l in range(0, max_freq + 1):
                if (k, l) <= (0, 0) and l == 0:
                    continue
                terms.append((k, l, scale * rng.uniform(-1, 1), scale * rng.uniform(-1, 1)))
        return cls(tuple(terms))

    def _phase(self, x, k, l):
        return TWO_PI * (k * x[..., 0] + l * x[..., 1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for k, l, a, b in self.terms:
            ph = self._phase(x, k, l)
            out = out + a * np.cos(ph) + b * np.sin(ph)
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for k, l, a, b in self.terms:
            ph = self._phase(x, k, l)
            d = TWO_PI * (-a * np.sin(ph) + b * np.cos(ph))
            out[..., 0] += k * d
            out[..., 1] += l * d
        return out

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (2,))
        for k, l, a, b in self.terms:
            ph = self._phase(x, k, l)
            dd = -TWO_PI**2 * (a * np.cos(ph) + b * np.sin(ph))
            kl = np.array([k, l], dtype=float)
            out += dd[..., None, None] * np.outer(kl, kl)
        return out


@dataclass(frozen=True)
class TorusField:
    """Locally Hamiltonian field ``(a, b) + X_h`` on the unit torus with ``omega = dx ^ dy``.

    ``alpha_X = i_X omega = a dy - b dx + dh``; the constant part carries
    the cohomology class.
    """

    a: float = 0.0
    b: float = 0.0
    h: TrigPolynomial = field(default_factory=TrigPolynomial)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g = self.h.gradient(x)
        return np.stack([self.a + g[..., 1], self.b - g[..., 0]], -1)

    def jacobian(self, x):
        hess = self.h.hessian(np.asarray(x, dtype=float))
        return np.stack([hess[..., 1, :], -hess[..., 0, :]], -2)

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        g = self.h.gradient(x)
        return np.stack([-self.b + g[..., 0], self.a + g[..., 1]], -1)

    def vector_field(self) -> VectorField:
        return VectorField(self.__call__, self.jacobian)

    @property
    def is_hamiltonian(self) -> bool:
        return self.a == 0.0 and self.b == 0.0


TORUS_OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def torus_omega_pair(X: TorusField, Y: TorusField, x):
    u, v = X(x), Y(x)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def torus_quadrature(f, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Tensor-product composite Gauss-Legendre over ``[0, 1]^2`` with panel doubling."""
    def estimate(panels):
        t, w = _composite_nodes(cfg.gauss_order, panels)
        X, Y = np.meshgrid(t, t, indexing="ij")
        pts = np.stack([X, Y], -1)
        return float(np.einsum("i,j,ij->", w, w, f(pts)))

    panels = 1
    prev = estimate(panels)
    while panels < cfg.max_panels:
        panels *= 2
        cur = estimate(panels)
        if abs(cur - prev) <= max(cfg.rel_tol * abs(cur), cfg.abs_tol):
            return cur
        prev = cur
    raise QuadratureError("torus quadrature did not converge", prev)


def torus_b(X: TorusField, Y: TorusField, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``b(X, Y) = integral of omega(X, Y)`` over the unit-area torus."""
    return torus_quadrature(lambda p: torus_omega_pair(X, Y, p), cfg)


def torus_alpha_integral(X: TorusField, Y: TorusField, cfg=DEFAULT_QUADRATURE) -> float:
    """``integral of alpha_X ^ alpha_Y`` (n = 1)."""
    def dens(p):
        ax, ay = X.alpha(p), Y.alpha(p)
        return ax[..., 0] * ay[..., 1] - ax[..., 1] * ay[..., 0]

    return torus_quadrature(dens, cfg)


def torus_c_x0(X: TorusField, Y: TorusField, x0=(0.0, 0.0)) -> float:
    return float(torus_omega_pair(X, Y, np.asarray(x0, dtype=float)))


def torus_bracket(X: TorusField, Y: TorusField, x):
    x = np.asarray(x, dtype=float)
    return np.einsum("...ij,...j->...i", Y.jacobian(x), X(x)) - np.einsum(
        "...ij,...j->...i", X.jacobian(x), Y(x))


def torus_shift_integral(X: TorusField, Y: TorusField, x0=(0.0, 0.0),
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """``integral over M of (integral from x0 to x of i_{[X,Y]} omega) omega``.

    Inner integrals run along chart segments from ``x0``; the integrand is
    exact, so the segment choice does not matter.
    """
    x0 = np.asarray(x0, dtype=float)

    def inner(points):
        panels = 2
        prev = None
        while panels <= cfg.max_panels:
            t, w = _composite_nodes(cfg.gauss_order, panels)
            d = points - x0
            seg = x0 + t[:, None, None, None] * d
            form = torus_bracket(X, Y, seg) @ TORUS_OMEGA
            cur = np.einsum("k,k...i,...i->...", w, form, d)
            if prev is not None and np.max(np.abs(cur - prev)) <= max(
                    cfg.rel_tol * np.max(np.abs(cur)), cfg.abs_tol):
                return cur
            prev = cur
            panels *= 2
        raise QuadratureError("segment integrals did not converge", float("nan"))

    return torus_quadrature(inner, cfg)
