"""Nonhomogeneous group cochains, the symplectic 2-cocycle and its central extension.

The cocycle attached to a chart model with primitive ``w1`` and basepoint
``x0`` is

    C(g1, g2) = integral from x0 to g2.x0 of (g1^* w1 - w1)

taken along the model's canonical path.  Group elements act on the left,
and ``g * h`` is the composite ``g o h``.
"""

from __future__ import annotations

import weakref
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    DEFAULT_QUADRATURE,
    Integral,
    QuadratureConfig,
    line_integral,
    map_differential,
    pullback_form,
    pullback_two_form,
)

SYMPLECTIC_TOL = 1e-7
COMMUTE_TOL = 1e-9

_PROBE_RNG = np.random.default_rng(20240607)
_PROBES = 0.3 * _PROBE_RNG.standard_normal((3, 16))


def probe_points(dim: int) -> np.ndarray:
    """Small fixed points used to fingerprint maps (they lie well inside the unit ball)."""
    if dim > _PROBES.shape[1]:
        raise ValueError("dimension too large for the probe table")
    return _PROBES[:, :dim].copy()


class NotSymplecticError(ValueError):
    pass


class NonCommutingError(ValueError):
    pass


class GroupElement(ABC):
    """A diffeomorphism of a chart, acting on arrays of points ``(..., dim)``."""

    dim: int

    @abstractmethod
    def act(self, x) -> np.ndarray: ...

    @abstractmethod
    def inverse(self) -> "GroupElement": ...

    def differential_at(self, x) -> Optional[np.ndarray]:
        """Exact differential, or ``None`` to fall back on finite differences."""
        return None

    def compose(self, other: "GroupElement") -> "GroupElement":
        if other.dim != self.dim:
            raise ValueError("cannot compose maps of different dimension")
        return ComposedMap(self, other)

    def __mul__(self, other):
        return self.compose(other)

    def __call__(self, x):
        return self.act(x)

    def signature(self) -> np.ndarray:
        return np.ravel(self.act(probe_points(self.dim)))

    def is_identity(self, tol: float = 1e-12) -> bool:
        p = probe_points(self.dim)
        return bool(np.max(np.abs(self.act(p) - p)) <= tol)


@dataclass(eq=False)
class IdentityMap(GroupElement):
    dim: int

    def act(self, x):
        return np.array(x, dtype=float)

    def differential_at(self, x):
        x = np.asarray(x)
        return np.broadcast_to(np.eye(self.dim), x.shape[:-1] + (self.dim, self.dim)).copy()

    def inverse(self):
        return self

    def compose(self, other):
        return other

    def is_identity(self, tol=1e-12):
        return True


@dataclass(eq=False)
class Translation(GroupElement):
    v: np.ndarray

    def __post_init__(self):
        self.v = np.atleast_1d(np.asarray(self.v, dtype=float))
        self.dim = self.v.shape[0]

    def act(self, x):
        return np.asarray(x, dtype=float) + self.v

    def differential_at(self, x):
        x = np.asarray(x)
        return np.broadcast_to(np.eye(self.dim), x.shape[:-1] + (self.dim, self.dim)).copy()

    def compose(self, other):
        if isinstance(other, Translation):
            return Translation(self.v + other.v)
        return super().compose(other)

    def inverse(self):
        return Translation(-self.v)

    def signature(self):
        return self.v.copy()

    def is_identity(self, tol=1e-12):
        return bool(np.max(np.abs(self.v)) <= tol)


@dataclass(eq=False)
class UserMap(GroupElement):
    """A user-supplied map; it is assumed C^2 and its inverse must be given to invert it."""

    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    inverse_func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    differential: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def act(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def differential_at(self, x):
        return None if self.differential is None else self.differential(x)

    def inverse(self):
        if self.inverse_func is None:
            raise NotImplementedError("this map was built without an inverse")
        return UserMap(self.inverse_func, self.dim, self.func)


@dataclass(eq=False)
class ComposedMap(GroupElement):
    """``outer o inner`` with the chain rule for the differential."""

    outer: GroupElement
    inner: GroupElement

    def __post_init__(self):
        self.dim = self.inner.dim

    def act(self, x):
        return self.outer.act(self.inner.act(x))

    def differential_at(self, x):
        x = np.asarray(x, dtype=float)
        inner_jac = map_differential(self.inner, x)
        outer_jac = map_differential(self.outer, self.inner.act(x))
        return outer_jac @ inner_jac

    def inverse(self):
        return ComposedMap(self.inner.inverse(), self.outer.inverse())


@dataclass(eq=False)
class ProductElement(GroupElement):
    """``(g, h)`` acting factorwise on ``A x B``."""

    first: GroupElement
    second: GroupElement

    def __post_init__(self):
        self.split = self.first.dim
        self.dim = self.first.dim + self.second.dim

    def act(self, x):
        x = np.asarray(x, dtype=float)
        return np.concatenate(
            [self.first.act(x[..., : self.split]), self.second.act(x[..., self.split:])],
            axis=-1,
        )

    def differential_at(self, x):
        x = np.asarray(x, dtype=float)
        ja = map_differential(self.first, x[..., : self.split])
        jb = map_differential(self.second, x[..., self.split:])
        out = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        out[..., : self.split, : self.split] = ja
        out[..., self.split:, self.split:] = jb
        return out

    def compose(self, other):
        if isinstance(other, ProductElement) and other.split == self.split:
            return ProductElement(self.first * other.first, self.second * other.second)
        return super().compose(other)

    def inverse(self):
        return ProductElement(self.first.inverse(), self.second.inverse())

    def signature(self):
        return np.concatenate([self.first.signature(), self.second.signature()])

    def is_identity(self, tol=1e-12):
        return self.first.is_identity(tol) and self.second.is_identity(tol)


# --- symplectic validation -------------------------------------------------

_validated: "weakref.WeakKeyDictionary[GroupElement, dict]" = weakref.WeakKeyDictionary()


def symplectic_residual(model, g: GroupElement, points=None) -> float:
    """``max |g^* omega - omega|`` over sampled points of the model."""
    if points is None:
        points = model.quasi_points(100)
    return float(np.max(np.abs(pullback_two_form(g, model.omega, points) - model.omega(points))))


def ensure_symplectic(model, g: GroupElement, tol: float = SYMPLECTIC_TOL) -> None:
    """Validate ``g`` once per model; the cache write is idempotent."""
    seen = _validated.get(g)
    if seen is not None and model in seen:
        return
    res = symplectic_residual(model, g)
    if res > tol:
        raise NotSymplecticError(f"map does not preserve omega (residual {res:.3g})")
    _validated.setdefault(g, weakref.WeakKeyDictionary())[model] = res


# --- cochains --------------------------------------------------------------

@dataclass(frozen=True)
class GroupCochain:
    degree: int
    func: Callable[..., float]
    normalized: bool = False
    model: object = None

    def __call__(self, *gs) -> float:
        if len(gs) != self.degree:
            raise TypeError(f"cochain of degree {self.degree} got {len(gs)} arguments")
        if self.degree == 0:
            return float(self.func())
        return float(self.func(*gs))


def constant_cochain(c: float) -> GroupCochain:
    return GroupCochain(0, lambda: c, normalized=False)


def group_coboundary(f: GroupCochain, *gs) -> float:
    """``(D f)(g_1, ..., g_{p+1})`` for the trivial module."""
    p = f.degree
    if len(gs) != p + 1:
        raise TypeError(f"D of a degree-{p} cochain takes {p + 1} arguments, got {len(gs)}")
    total = f(*gs[1:])
    for i in range(1, p + 1):
        merged = gs[: i - 1] + (gs[i - 1] * gs[i],) + gs[i + 1:]
        total += (-1) ** i * f(*merged)
    total += (-1) ** (p + 1) * f(*gs[:p])
    return total


def coboundary(f: GroupCochain) -> GroupCochain:
    return GroupCochain(f.degree + 1, lambda *gs: group_coboundary(f, *gs),
                        normalized=f.normalized, model=f.model)


def cocycle_integral(model, g1: GroupElement, g2: GroupElement,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                     validate: bool = True) -> Integral:
    if validate:
        ensure_symplectic(model, g1)
        ensure_symplectic(model, g2)
    x0 = model.x0
    integrand = pullback_form(g1, model.omega1) - model.omega1
    return line_integral(integrand, model.path(x0, g2.act(x0)), cfg)


def cocycle_C(model, g1: GroupElement, g2: GroupElement,
              cfg: QuadratureConfig = DEFAULT_QUADRATURE, validate: bool = True) -> float:
    return cocycle_integral(model, g1, g2, cfg, validate).value


def cocycle_cochain(model, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                    validate: bool = True) -> GroupCochain:
    return GroupCochain(2, lambda g, h: cocycle_C(model, g, h, cfg, validate),
                        normalized=True, model=model)


def basepoint_shift_cochain(model, x1, x2, cfg=DEFAULT_QUADRATURE) -> GroupCochain:
    """``a(g) = integral from x1 to x2 of (g^* w1 - w1)``, so that ``C_{x1} - C_{x2} = D a``."""
    def a(g):
        integrand = pullback_form(g, model.omega1) - model.omega1
        return line_integral(integrand, model.path(np.asarray(x1, float), np.asarray(x2, float)),
                             cfg).value
    return GroupCochain(1, a, normalized=True, model=model)


def gauge_shift_cochain(model, potential) -> GroupCochain:
    """``h(g) = f(x0) - f(g.x0)``: replacing ``w1`` by ``w1 + df`` adds ``D h`` to the cocycle."""
    x0 = model.x0
    return GroupCochain(1, lambda g: float(potential(x0) - potential(g.act(x0))),
                        normalized=True, model=model)


# --- central extension -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtensionElement:
    g: GroupElement
    a: float = 0.0


def extension_compose(u: ExtensionElement, v: ExtensionElement, f: GroupCochain) -> ExtensionElement:
    """``(g1, a1)(g2, a2) = (g1 g2, a1 + a2 + f(g1, g2))``."""
    return ExtensionElement(u.g * v.g, u.a + v.a + f(u.g, v.g))


def extension_inverse(u: ExtensionElement, f: GroupCochain) -> ExtensionElement:
    ginv = u.g.inverse()
    return ExtensionElement(ginv, -u.a - f(u.g, ginv))


def extension_commutator(u, v, f) -> ExtensionElement:
    uv = extension_compose(u, v, f)
    uvu = extension_compose(uv, extension_inverse(u, f), f)
    return extension_compose(uvu, extension_inverse(v, f), f)


@dataclass(frozen=True)
class PrequantPoint:
    x: np.ndarray
    t: float


def omega2(model, g: GroupElement, x, cfg=DEFAULT_QUADRATURE) -> float:
    """Fiber shift ``integral from x0 to x of (w1 - g^* w1)``."""
    integrand = model.omega1 - pullback_form(g, model.omega1)
    return line_integral(integrand, model.path(model.x0, np.asarray(x, float)), cfg).value


def prequant_act(u: ExtensionElement, p: PrequantPoint, model,
                 cfg=DEFAULT_QUADRATURE) -> PrequantPoint:
    """``(x, t) -> (g x, omega2(g)(x) + t + a)`` on the trivial bundle with connection ``dt + w1``.

    These maps compose as the extension built from ``prequant_cocycle(model)``,
    which is ``-C``; ``(g, a) -> (g, -a)`` identifies that group with the
    extension defined by ``C`` itself.
    """
    x = np.asarray(p.x, dtype=float)
    return PrequantPoint(u.g.act(x), omega2(model, u.g, x, cfg) + p.t + u.a)


def prequant_cocycle(model, cfg=DEFAULT_QUADRATURE) -> GroupCochain:
    return GroupCochain(2, lambda g, h: -cocycle_C(model, g, h, cfg),
                        normalized=True, model=model)


def connection_preservation_check(u: ExtensionElement, model, sample_points,
                                  fiber_shift=None, step=1e-3, cfg=DEFAULT_QUADRATURE) -> float:
    """Max deviation of ``Phi^*(dt + w1)`` from ``dt + w1`` for the bundle map of ``u``.

    ``fiber_shift(g, x)`` replaces ``omega2`` (negative controls).  The
    pullback uses a fourth-order central stencil in ``(x, t)``.
    """
    if fiber_shift is None:
        fiber_shift = lambda g, x: omega2(model, g, x, cfg)  # noqa: E731
    g, a = u.g, u.a
    dim = model.dim

    def bundle_map(z):
        x, t = z[:dim], z[dim]
        return np.concatenate([g.act(x), [fiber_shift(g, x) + t + a]])

    worst = 0.0
    for pt in np.atleast_2d(sample_points):
        z = np.concatenate([np.asarray(pt, float), [0.0]])
        h = step * (1.0 + np.linalg.norm(pt))
        jac = np.empty((dim + 1, dim + 1))
        for j in range(dim + 1):
            e = np.zeros(dim + 1)
            e[j] = h
            jac[:, j] = (-bundle_map(z + 2 * e) + 8 * bundle_map(z + e)
                         - 8 * bundle_map(z - e) + bundle_map(z - 2 * e)) / (12 * h)
        image = bundle_map(z)
        conn_image = np.concatenate([model.omega1(image[:dim]), [1.0]])
        conn_here = np.concatenate([model.omega1(z[:dim]), [1.0]])
        worst = max(worst, float(np.max(np.abs(conn_image @ jac - conn_here))))
    return worst


# --- witnesses -------------------------------------------------------------

def commute_residual(g: GroupElement, h: GroupElement, points) -> float:
    points = np.asarray(points, dtype=float)
    return float(np.max(np.abs(g.act(h.act(points)) - h.act(g.act(points)))))


def antisymmetry_witness(f: GroupCochain, g: GroupElement, h: GroupElement,
                         points=None, tol: float = COMMUTE_TOL) -> float:
    """``f(g, h) - f(h, g)`` for commuting ``g, h``.

    Coboundaries are symmetric on commuting pairs, so a nonzero value
    certifies that ``f`` is not a coboundary on any subgroup containing both.
    """
    if points is None:
        points = f.model.quasi_points(32) if f.model is not None else probe_points(g.dim)
    res = commute_residual(g, h, points)
    if res > tol:
        raise NonCommutingError(f"elements do not commute (residual {res:.3g})")
    return f(g, h) - f(h, g)


@dataclass
class WordSet:
    """Group elements with known products ``elements[i] * elements[j] == elements[k]``."""

    elements: list
    triples: list = field(default_factory=list)
    words: list = field(default_factory=list)

    @classmethod
    def random_walk(cls, generators: Sequence[GroupElement], depth: int = 2,
                    extra: int = 0, rng=None) -> "WordSet":
        """All generators, all length-2 products, then ``extra`` random-walk extensions up to ``depth``."""
        gens = list(generators)
        elements = list(gens)
        words = [(i,) for i in range(len(gens))]
        index = {w: i for i, w in enumerate(words)}
        triples = []

        def add(prefix, s):
            w = words[prefix] + (s,)
            if w in index:
                return
            index[w] = len(elements)
            triples.append((prefix, s, len(elements)))
            elements.append(elements[prefix] * gens[s])
            words.append(w)

        if depth >= 2:
            for i in range(len(gens)):
                for s in range(len(gens)):
                    add(i, s)
        if extra and depth >= 3:
            rng = np.random.default_rng(0) if rng is None else rng
            for _ in range(extra):
                candidates = [k for k, w in enumerate(words) if 2 <= len(w) < depth]
                if not candidates:
                    break
                add(int(rng.choice(candidates)), int(rng.integers(len(gens))))
        return cls(elements, triples, words)

    @classmethod
    def closure_pairs(cls, elements: Sequence[GroupElement], tol: float = 1e-9) -> "WordSet":
        """Score every ordered pair whose product is already in the list."""
        elements = list(elements)
        sigs = np.array([g.signature() for g in elements])
        tree = cKDTree(sigs)
        triples = []
        for i, gi in enumerate(elements):
            for j, gj in enumerate(elements):
                dist, k = tree.query((gi * gj).signature())
                if dist <= tol * (1.0 + np.linalg.norm(sigs[k])):
                    triples.append((i, j, int(k)))
        return cls(elements, triples)


@dataclass
class CoboundaryFit:
    values: np.ndarray
    representatives: list
    residual: float
    max_residual: float
    rank: int
    null_dim: int
    equations: int


def _merge_equal(elements, tol):
    sigs = np.array([g.signature() for g in elements])
    tree = cKDTree(sigs)
    label = -np.ones(len(elements), dtype=int)
    reps = []
    for i in range(len(elements)):
        if label[i] >= 0:
            continue
        scale = tol * (1.0 + np.linalg.norm(sigs[i]))
        for j in tree.query_ball_point(sigs[i], scale):
            if label[j] < 0:
                label[j] = len(reps)
        reps.append(i)
    return label, reps


def coboundary_fit(f: GroupCochain, words, tol: float = 1e-9) -> CoboundaryFit:
    """Least-squares fit of ``D a`` to ``f`` over the scored pairs of a word set.

    Numerically equal elements share one unknown.  The residual is the
    RMS misfit divided by the RMS of ``f``; a small value is evidence of
    triviality on the sampled words, a large one evidence (not proof) of
    an obstruction.
    """
    if not isinstance(words, WordSet):
        words = WordSet.closure_pairs(words, tol)
    label, reps = _merge_equal(words.elements, tol)
    seen = set()
    rows, rhs = [], []
    for i, j, k in words.triples:
        key = (label[i], label[j], label[k])
        if key in seen:
            continue
        seen.add(key)
        row = np.zeros(len(reps))
        row[label[j]] += 1.0
        row[label[k]] -= 1.0
        row[label[i]] += 1.0
        rows.append(row)
        rhs.append(f(words.elements[i], words.elements[j]))
    if not rows:
        raise ValueError("word set scores no pairs")
    A = np.array(rows)
    b = np.array(rhs)
    sol, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    r = A @ sol - b
    scale = float(np.sqrt(np.mean(b**2)))
    rms = float(np.sqrt(np.mean(r**2)))
    return CoboundaryFit(
        values=sol,
        representatives=[words.elements[i] for i in reps],
        residual=rms / scale if scale > 0 else rms,
        max_residual=float(np.max(np.abs(r))),
        rank=int(rank),
        null_dim=len(reps) - int(rank),
        equations=len(rows),
    )
