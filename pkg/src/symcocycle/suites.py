"""Verification suites and JSON reports for the command-line front end.

Each case draws from its own generator, seeded by ``(seed, crc32(case_id))``
with numpy's PCG64, so cases are independent of execution order and a
scenario reproduces byte-identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .cohomology import (
    ExtensionElement,
    GroupCochain,
    IdentityMap,
    PrequantPoint,
    Translation,
    WordSet,
    antisymmetry_witness,
    basepoint_shift_cochain,
    cocycle_C,
    cocycle_cochain,
    coboundary_fit,
    connection_preservation_check,
    extension_commutator,
    extension_compose,
    gauge_shift_cochain,
    group_coboundary,
    prequant_act,
    prequant_cocycle,
    symplectic_residual,
)
from .geometry import QuadratureError, constant_field
from .lie import (
    LieCochain,
    Polynomial,
    TorusField,
    TrigPolynomial,
    algebra_cochain,
    alternation_residual,
    basepoint_shift_check,
    c_x0,
    c_x0_cochain,
    ce_coboundary,
    ce_differential,
    commuting_pair_witness,
    hamiltonian_field,
    homomorphism_residual,
    om_identity_check,
    poisson_bracket,
    sl2_basis,
    sl2_bracket,
    sl2_coords,
    sl2_exp,
    torus_alpha_integral,
    torus_b,
    torus_c_x0,
    torus_shift_integral,
    trace_identity,
    whitehead_witness,
)
from .models import (
    ChartModel,
    DiskTwist,
    Moebius,
    embed,
    gamma_cochain,
    gw_cocycle,
    heisenberg_closed_form,
    hyperbolic_distance,
    make_disk,
    make_r2n,
    parse_model,
    random_disk_twist,
    random_element,
    random_moebius,
    symplectic_pairing,
)

SCHEMA_VERSION = 1
DISK_SHIFTED_BASEPOINT = (0.3, 0.0)
GW_BOUND_SAMPLES = 10_000

DEFAULT_TOLERANCES = {
    "primitive": 1e-7,
    "symplectic": 1e-7,
    "cocycle": 1e-8,
    "normalization": 1e-10,
    "basepoint": 1e-8,
    "gauge": 1e-8,
    "prequant_connection": 1e-6,
    "prequant_composition": 1e-8,
    "heisenberg": 1e-9,
    "witness": 1e-12,
    "commutator": 1e-12,
    "restriction": 1e-9,
    "master": 1e-7,
    "gw_dual": 1e-7,
    "gw_cocycle": 1e-7,
    "gw_bound": math.pi,
    "isometry": 1e-9,
    "twist_fixed": 1e-12,
    "lie_cocycle": 1e-5,
    "lie_basepoint": 1e-6,
    "top_form": 1e-8,
    "bracket_trace": 1e-9,
    "homomorphism": 1e-5,
    "extension_pairing": 1e-7,
    "commuting_pair": 1e-12,
    "sl2_delta2": 1e-12,
    "sl2_alternation": 1e-9,
    "sl2_delta": 1e-4,
    "whitehead": 1e-3,
    "torus_b": 1e-10,
    "torus_hamiltonian": 1e-8,
    "torus_class": 1e-10,
    "torus_basepoint": 1e-5,
    "torus_alpha": 1e-5,
    "fit_positive": 1e-10,
    "fit_negative": 0.01,
}


@dataclass
class Scenario:
    model: str
    seed: int = 0
    samples: int = 20
    basepoint: Optional[tuple] = None
    tolerances: dict = field(default_factory=dict)
    words: int = 4
    depth: int = 3

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance suites: {sorted(unknown)}")
        if self.model != "torus":
            parse_model(self.model, self.basepoint)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_json(self):
        return {
            "model": self.model,
            "seed": self.seed,
            "samples": self.samples,
            "basepoint": None if self.basepoint is None else [float(v) for v in self.basepoint],
            "tolerances": {k: float(v) for k, v in sorted(self.tolerances.items())},
        }


@dataclass
class Case:
    """One check: ``value`` compared with ``tolerance`` by ``comparison``.

    ``"<="`` cases pass iff ``|value| <= tolerance``; ``">"`` cases are lower
    bounds; ``"info"`` cases carry data only.
    """

    id: str
    value: float
    tolerance: Optional[float] = None
    comparison: str = "<="
    values: dict = field(default_factory=dict)
    inputs: object = None
    status: str = ""
    message: str = ""

    def __post_init__(self):
        if self.status:
            return
        if self.comparison == "info":
            self.status = "info"
        elif self.comparison == "<=":
            self.status = "pass" if abs(self.value) <= self.tolerance else "fail"
        elif self.comparison == "<":
            self.status = "pass" if abs(self.value) < self.tolerance else "fail"
        elif self.comparison == ">":
            self.status = "pass" if self.value > self.tolerance else "fail"
        else:
            raise ValueError(f"unknown comparison {self.comparison!r}")

    def to_json(self):
        return {
            "id": self.id,
            "status": self.status,
            "value": _num(self.value),
            "tolerance": _num(self.tolerance),
            "comparison": self.comparison,
            "inputs_digest": digest(self.inputs),
            "values": {k: _jsonable(v) for k, v in sorted(self.values.items())},
            "message": self.message,
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _jsonable(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in np.asarray(v, dtype=float).ravel().tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return str(v)


def digest(inputs) -> str:
    if inputs is None:
        return ""
    payload = json.dumps(_jsonable_tree(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _jsonable_tree(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable_tree(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "signature"):
        return obj.signature().tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass
class Report:
    suite: str
    scenario: dict
    cases: list

    @property
    def summary(self):
        counts = {"pass": 0, "fail": 0, "info": 0, "error": 0}
        for c in self.cases:
            counts[c.status] += 1
        return counts

    @property
    def exit_code(self) -> int:
        s = self.summary
        if s["error"]:
            return 3
        return 1 if s["fail"] else 0

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "scenario": self.scenario,
            "versions": {
                "symcocycle": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "cases": [c.to_json() for c in sorted(self.cases, key=lambda c: c.id)],
            "summary": self.summary,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "status", "value", "tolerance", "comparison", "inputs_digest", "values"])
        for c in self.to_json()["cases"]:
            writer.writerow([c["id"], c["status"], c["value"], c["tolerance"], c["comparison"],
                             c["inputs_digest"], json.dumps(c["values"], sort_keys=True)])
        return buf.getvalue()


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "symcocycle report",
    "type": "object",
    "required": ["schema_version", "suite", "scenario", "versions", "cases", "summary"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "suite": {"type": "string"},
        "scenario": {
            "type": "object",
            "required": ["model", "seed", "samples"],
            "properties": {
                "model": {"type": "string"},
                "seed": {"type": "integer", "minimum": 0},
                "samples": {"type": "integer", "minimum": 1},
                "basepoint": {"type": ["array", "null"], "items": {"type": "number"}},
                "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
            },
        },
        "versions": {"type": "object", "additionalProperties": {"type": "string"}},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "status", "value", "tolerance", "comparison",
                             "inputs_digest", "values", "message"],
                "properties": {
                    "id": {"type": "string"},
                    "status": {"enum": ["pass", "fail", "info", "error"]},
                    "value": {"type": ["number", "string", "null"]},
                    "tolerance": {"type": ["number", "null"]},
                    "comparison": {"enum": ["<=", "<", ">", "info"]},
                    "inputs_digest": {"type": "string"},
                    "values": {"type": "object"},
                    "message": {"type": "string"},
                },
            },
        },
        "summary": {
            "type": "object",
            "required": ["pass", "fail", "info", "error"],
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
}


# --- case registry ---------------------------------------------------------

_CASES: list = []


def case(case_id: str, families):
    def register(fn):
        _CASES.append((case_id, tuple(families), fn))
        return fn
    return register


class Context:
    def __init__(self, scenario: Scenario, model: Optional[ChartModel]):
        self.scenario = scenario
        self.model = model
        self.n = scenario.samples

    def rng(self, case_id: str):
        return np.random.default_rng([self.scenario.seed, zlib.crc32(case_id.encode())])

    def tol(self, name):
        return self.scenario.tol(name)

    def elements(self, rng, k, model=None):
        model = model or self.model
        return [random_element(model, rng) for _ in range(k)]


def family(model_spec: str) -> str:
    if model_spec == "torus":
        return "torus"
    if model_spec.startswith("product:"):
        return "product"
    if model_spec.startswith("r2n:"):
        return "r2n"
    return model_spec


CHART = ("r2n", "h2", "disk", "product")


def _model_for(ctx: Context) -> ChartModel:
    m = ctx.model
    if m.name == "disk" and ctx.scenario.basepoint is None:
        return m.with_basepoint(DISK_SHIFTED_BASEPOINT)
    return m


@case("geometry.primitive", CHART)
def _primitive(ctx):
    return Case("geometry.primitive", ctx.model.primitive_residual(), ctx.tol("primitive"))


@case("group.symplectic_sample", CHART)
def _symplectic(ctx):
    rng = ctx.rng("group.symplectic_sample")
    els = ctx.elements(rng, 5)
    res = max(symplectic_residual(ctx.model, g) for g in els)
    return Case("group.symplectic_sample", res, ctx.tol("symplectic"), inputs=els)


@case("group.cocycle_identity", CHART)
def _cocycle_identity(ctx):
    rng = ctx.rng("group.cocycle_identity")
    model = _model_for(ctx)
    C = cocycle_cochain(model)
    triples = [ctx.elements(rng, 3) for _ in range(ctx.n)]
    res = max(abs(group_coboundary(C, *t)) for t in triples)
    return Case("group.cocycle_identity", res, ctx.tol("cocycle"), inputs=triples,
                values={"triples": len(triples), "basepoint": model.x0})


@case("group.normalization", CHART)
def _normalization(ctx):
    rng = ctx.rng("group.normalization")
    model = _model_for(ctx)
    e = IdentityMap(model.dim)
    els = ctx.elements(rng, ctx.n)
    res = max(max(abs(cocycle_C(model, e, g)), abs(cocycle_C(model, g, e))) for g in els)
    return Case("group.normalization", res, ctx.tol("normalization"), inputs=els)


@case("group.basepoint_shift", CHART)
def _basepoint(ctx):
    rng = ctx.rng("group.basepoint_shift")
    m1 = _model_for(ctx)
    x2 = ctx.model.sample(rng, 1)[0]
    m2 = m1.with_basepoint(x2)
    a = basepoint_shift_cochain(m1, m1.x0, x2)
    res = 0.0
    pairs = [ctx.elements(rng, 2) for _ in range(min(ctx.n, 20))]
    for g, h in pairs:
        res = max(res, abs(cocycle_C(m1, g, h) - cocycle_C(m2, g, h) - group_coboundary(a, g, h)))
    return Case("group.basepoint_shift", res, ctx.tol("basepoint"), inputs=[x2, pairs])


def _gauge_potential(x):
    x = np.asarray(x, dtype=float)
    return np.sin(x[..., 0]) * x[..., 1]


def _gauge_gradient(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    out[..., 0] = np.cos(x[..., 0]) * x[..., 1]
    out[..., 1] = np.sin(x[..., 0])
    return out


@case("group.gauge_shift", CHART)
def _gauge(ctx):
    rng = ctx.rng("group.gauge_shift")
    m1 = _model_for(ctx)
    m2 = m1.with_gauge(_gauge_potential, _gauge_gradient)
    h = gauge_shift_cochain(m1, _gauge_potential)
    res = 0.0
    pairs = [ctx.elements(rng, 2) for _ in range(min(ctx.n, 20))]
    for g1, g2 in pairs:
        res = max(res, abs(cocycle_C(m2, g1, g2) - cocycle_C(m1, g1, g2) - group_coboundary(h, g1, g2)))
    return Case("group.gauge_shift", res, ctx.tol("gauge"), inputs=pairs)


@case("prequant.connection", CHART)
def _connection(ctx):
    rng = ctx.rng("prequant.connection")
    model = _model_for(ctx)
    els = ctx.elements(rng, 3)
    pts = model.sample(rng, 4)
    res = max(connection_preservation_check(ExtensionElement(g, float(rng.normal())), model, pts)
              for g in els)
    return Case("prequant.connection", res, ctx.tol("prequant_connection"), inputs=[els, pts])


@case("prequant.composition", CHART)
def _composition(ctx):
    rng = ctx.rng("prequant.composition")
    model = _model_for(ctx)
    f = prequant_cocycle(model)
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        g, h = ctx.elements(rng, 2)
        u = ExtensionElement(g, float(rng.normal()))
        v = ExtensionElement(h, float(rng.normal()))
        p = PrequantPoint(model.sample(rng, 1)[0], float(rng.normal()))
        lhs = prequant_act(u, prequant_act(v, p, model), model)
        rhs = prequant_act(extension_compose(u, v, f), p, model)
        res = max(res, float(np.max(np.abs(lhs.x - rhs.x))), abs(lhs.t - rhs.t))
    return Case("prequant.composition", res, ctx.tol("prequant_composition"))


# --- R^2n ------------------------------------------------------------------

@case("heisenberg.closed_form", ("r2n",))
def _heis(ctx):
    rng = ctx.rng("heisenberg.closed_form")
    res = 0.0
    pairs = [ctx.elements(rng, 2) for _ in range(ctx.n)]
    for g, h in pairs:
        res = max(res, abs(cocycle_C(ctx.model, g, h) - heisenberg_closed_form(g.v, h.v)))
    return Case("heisenberg.closed_form", res, ctx.tol("heisenberg"), inputs=pairs)


def _unit_pair(dim):
    n = dim // 2
    e1 = np.zeros(dim)
    e1[0] = 1.0
    en = np.zeros(dim)
    en[n] = 1.0
    return e1, en


@case("heisenberg.antisymmetry_witness", ("r2n",))
def _heis_witness(ctx):
    e1, en = _unit_pair(ctx.model.dim)
    w = antisymmetry_witness(cocycle_cochain(ctx.model), Translation(e1), Translation(en))
    return Case("heisenberg.antisymmetry_witness", w - 1.0, ctx.tol("witness"), values={"witness": w})


@case("heisenberg.commutator", ("r2n",))
def _heis_comm(ctx):
    rng = ctx.rng("heisenberg.commutator")
    C = cocycle_cochain(ctx.model)
    res = 0.0
    for _ in range(min(ctx.n, 20)):
        x, y = rng.uniform(-2, 2, (2, ctx.model.dim))
        com = extension_commutator(ExtensionElement(Translation(x)), ExtensionElement(Translation(y)), C)
        res = max(res, abs(com.a - symplectic_pairing(x, y)), float(np.max(np.abs(com.g.v))))
    return Case("heisenberg.commutator", res, ctx.tol("commutator"))


@case("fit.positive_control", ("r2n",))
def _fit_pos(ctx):
    rng = ctx.rng("fit.positive_control")
    gens = [Translation(v) for v in rng.uniform(-1, 1, (8, ctx.model.dim))]
    b = lambda g: float(np.sin(g.v[0]) + g.v[-1] ** 2)  # noqa: E731
    db = GroupCochain(2, lambda g, h: b(h) - b(g * h) + b(g))
    fit = coboundary_fit(db, WordSet.random_walk(gens, depth=2))
    return Case("fit.positive_control", fit.residual, ctx.tol("fit_positive"),
                values={"null_dim": fit.null_dim, "equations": fit.equations})


@case("fit.negative_control", ("r2n",))
def _fit_neg(ctx):
    rng = ctx.rng("fit.negative_control")
    gens = [Translation(v) for v in rng.uniform(-1, 1, (20, ctx.model.dim))]
    fit = coboundary_fit(cocycle_cochain(ctx.model), WordSet.random_walk(gens, depth=2))
    return Case("fit.negative_control", fit.residual, ctx.tol("fit_negative"), comparison=">",
                values={"null_dim": fit.null_dim, "equations": fit.equations})


def _hamiltonians(ctx, rng, k, degree=3):
    return [Polynomial.random(ctx.model.dim, degree, rng) for _ in range(k)]


@case("lie.cocycle", ("r2n",))
def _lie_cocycle(ctx):
    rng = ctx.rng("lie.cocycle")
    model = ctx.model.with_basepoint(ctx.model.sample(rng, 1)[0])
    c = c_x0_cochain(model)
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y, Z = (hamiltonian_field(model, f) for f in _hamiltonians(ctx, rng, 3))
        res = max(res, abs(ce_coboundary(c, X, Y, Z)))
    return Case("lie.cocycle", res, ctx.tol("lie_cocycle"))


@case("lie.basepoint_shift", ("r2n",))
def _lie_basepoint(ctx):
    rng = ctx.rng("lie.basepoint_shift")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y = (hamiltonian_field(ctx.model, f) for f in _hamiltonians(ctx, rng, 2))
        lhs, rhs = basepoint_shift_check(ctx.model, X, Y, ctx.model.sample(rng, 1)[0])
        res = max(res, abs(lhs - rhs))
    return Case("lie.basepoint_shift", res, ctx.tol("lie_basepoint"))


@case("lie.top_form", ("r2n",))
def _top_form(ctx):
    rng = ctx.rng("lie.top_form")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y = (hamiltonian_field(ctx.model, f) for f in _hamiltonians(ctx, rng, 2))
        for x in ctx.model.sample(rng, 10):
            lhs, rhs = om_identity_check(ctx.model, X, Y, x)
            res = max(res, abs(lhs - rhs))
    return Case("lie.top_form", res, ctx.tol("top_form"))


@case("lie.bracket_trace", ("r2n",))
def _bracket_trace(ctx):
    n = ctx.model.dim // 2
    val = trace_identity(ctx.model, rng=ctx.rng("lie.bracket_trace"))
    return Case("lie.bracket_trace", val + n, ctx.tol("bracket_trace"), values={"sum": val, "n": n})


@case("lie.homomorphism", ("r2n",))
def _hom(ctx):
    rng = ctx.rng("lie.homomorphism")
    res = 0.0
    for _ in range(min(ctx.n, 5)):
        f, g = _hamiltonians(ctx, rng, 2)
        res = max(res, homomorphism_residual(ctx.model, f, g, ctx.model.sample(rng, 10)))
    return Case("lie.homomorphism", res, ctx.tol("homomorphism"))


@case("lie.extension_pairing", ("r2n",))
def _ext_pairing(ctx):
    rng = ctx.rng("lie.extension_pairing")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        f, g = _hamiltonians(ctx, rng, 2)
        pb = poisson_bracket(ctx.model, f, g)(ctx.model.x0)
        cx = c_x0(ctx.model, hamiltonian_field(ctx.model, f), hamiltonian_field(ctx.model, g))
        res = max(res, abs(pb + cx))
    return Case("lie.extension_pairing", res, ctx.tol("extension_pairing"))


@case("lie.commuting_pair_witness", ("r2n",))
def _comm_pair(ctx):
    e1, en = _unit_pair(ctx.model.dim)
    pts = ctx.model.quasi_points(16)
    w = commuting_pair_witness(c_x0_cochain(ctx.model), constant_field(e1), constant_field(en), pts)
    return Case("lie.commuting_pair_witness", w - 1.0, ctx.tol("commuting_pair"), values={"witness": w})


# --- hyperbolic plane ------------------------------------------------------

@case("h2.master_identity", ("h2",))
def _master(ctx):
    rng = ctx.rng("h2.master_identity")
    model = ctx.model
    res = 0.0
    pairs = [(random_moebius(rng), random_moebius(rng)) for _ in range(ctx.n)]
    for g1, g2 in pairs:
        dgamma = (gamma_cochain(g2, model) - gamma_cochain(g1 * g2, model)
                  + gamma_cochain(g1, model))
        res = max(res, abs(cocycle_C(model, g1, g2) + dgamma - gw_cocycle(g1, g2, model)))
    return Case("h2.master_identity", res, ctx.tol("master"), inputs=pairs)


@case("h2.gw_dual_method", ("h2",))
def _gw_dual(ctx):
    rng = ctx.rng("h2.gw_dual_method")
    res = 0.0
    for _ in range(ctx.n):
        g1, g2 = random_moebius(rng), random_moebius(rng)
        res = max(res, abs(gw_cocycle(g1, g2, ctx.model)
                           - gw_cocycle(g1, g2, ctx.model, method="angle_defect")))
    return Case("h2.gw_dual_method", res, ctx.tol("gw_dual"))


@case("h2.gw_cocycle_identity", ("h2",))
def _gw_identity(ctx):
    rng = ctx.rng("h2.gw_cocycle_identity")
    gw = GroupCochain(2, lambda g, h: gw_cocycle(g, h, ctx.model), normalized=True)
    res = 0.0
    for _ in range(ctx.n):
        g = [random_moebius(rng) for _ in range(3)]
        e = Moebius(1.0, 0.0, 0.0, 1.0)
        res = max(res, abs(group_coboundary(gw, *g)), abs(gw(e, g[0])), abs(gw(g[0], e)))
    return Case("h2.gw_cocycle_identity", res, ctx.tol("gw_cocycle"))


@case("h2.gw_bound", ("h2",))
def _gw_bound(ctx):
    rng = ctx.rng("h2.gw_bound")
    count = GW_BOUND_SAMPLES
    worst = 0.0
    for _ in range(count):
        worst = max(worst, abs(gw_cocycle(random_moebius(rng), random_moebius(rng), ctx.model)))
    return Case("h2.gw_bound", worst, ctx.tol("gw_bound"), comparison="<", values={"pairs": count})


@case("h2.isometry", ("h2",))
def _isometry(ctx):
    rng = ctx.rng("h2.isometry")
    res = 0.0
    for _ in range(ctx.n):
        g = random_moebius(rng)
        z, w = ctx.model.sample(rng, 2)
        d0 = hyperbolic_distance(z, w)
        res = max(res, abs(hyperbolic_distance(g.act(z), g.act(w)) - d0) / max(1.0, d0))
    return Case("h2.isometry", res, ctx.tol("isometry"))


def _sl2_cochain(model):
    exp = lambda a: Moebius.from_matrix(sl2_exp(a))  # noqa: E731
    return algebra_cochain(cocycle_cochain(model), exp, sl2_bracket)


@case("sl2.delta_squared", ("h2",))
def _sl2_d2(ctx):
    rng = ctx.rng("sl2.delta_squared")
    res = 0.0
    for _ in range(ctx.n):
        w = rng.normal(size=3)
        lam = LieCochain(1, lambda a, w=w: float(w @ sl2_coords(a)), sl2_bracket)
        dlam = ce_differential(lam)
        xs = [sum(c * b for c, b in zip(rng.normal(size=3), sl2_basis())) for _ in range(3)]
        res = max(res, abs(ce_coboundary(dlam, *xs)))
    return Case("sl2.delta_squared", res, ctx.tol("sl2_delta2"))


@case("sl2.group_to_algebra", ("h2",))
def _sl2_chain(ctx):
    ct = _sl2_cochain(ctx.model)
    H, E, F = sl2_basis()
    alt = max(alternation_residual(ct, a, b) for a, b in ((H, E), (H, F), (E, F)))
    delta = abs(ce_coboundary(ct, H, E, F))
    wh = whitehead_witness(ct, [H, E, F], sl2_coords)
    ok = alt <= ctx.tol("sl2_alternation") and delta <= ctx.tol("sl2_delta")
    status = "pass" if ok and wh.residual <= ctx.tol("whitehead") else "fail"
    return Case("sl2.group_to_algebra", wh.residual, ctx.tol("whitehead"), status=status,
                values={"alternation": alt, "delta": delta, "functional": wh.functional,
                        "c_HE": ct(H, E), "c_HF": ct(H, F), "c_EF": ct(E, F)})


# --- disk ------------------------------------------------------------------

@case("disk.fixed_basepoint", ("disk",))
def _disk_fixed(ctx):
    rng = ctx.rng("disk.fixed_basepoint")
    model = make_disk()
    res = 0.0
    for _ in range(ctx.n):
        g1 = DiskTwist.polynomial(rng.uniform(-2, 2, 3))
        g2 = DiskTwist.polynomial(rng.uniform(-2, 2, 3))
        res = max(res, abs(cocycle_C(model, g1, g2)))
    return Case("disk.fixed_basepoint", res, ctx.tol("twist_fixed"))


def disk_word_set(rng, words: int, depth: int = 3, extra: int = 20):
    """Twist words with built-in relations.

    Each of ``words`` random centres contributes bump twists with amplitudes
    ``a``, ``b`` and ``a + b``; these commute and compose additively, so the
    scored pairs are not all independent equations.  All products of two
    generators are added, then ``extra`` random words up to length ``depth``.
    """
    gens = []
    for _ in range(words):
        base = random_disk_twist(rng)
        (_, rho, a), = base.terms
        b = float(rng.uniform(-2.0, 2.0))
        gens += [base, DiskTwist.bump(base.center, rho, b), DiskTwist.bump(base.center, rho, a + b)]
    elements = list(gens) + [g * h for g in gens for h in gens]
    for _ in range(extra if depth >= 3 else 0):
        length = int(rng.integers(3, depth + 1))
        w = gens[int(rng.integers(len(gens)))]
        for _ in range(length - 1):
            w = w * gens[int(rng.integers(len(gens)))]
        elements.append(w)
    return gens, WordSet.closure_pairs(elements)


def disk_experiment_cases(seed: int, words: int = 4, depth: int = 3, extra: int = 20):
    """Coboundary-fit residuals for disk twist words, bracketed by two controls."""
    rng = np.random.default_rng([seed, zlib.crc32(b"disk.experiment")])
    out = []
    r2 = make_r2n(1)
    gens = [Translation(v) for v in rng.uniform(-1, 1, (max(words, 4), 2))]
    b = lambda g: float(np.cos(g.v[0]) * g.v[1])  # noqa: E731
    db = GroupCochain(2, lambda g, h: b(h) - b(g * h) + b(g))
    fit = coboundary_fit(db, WordSet.random_walk(gens, depth=2))
    out.append(Case("disk_experiment.positive_control", fit.residual, DEFAULT_TOLERANCES["fit_positive"],
                    values={"null_dim": fit.null_dim}))
    fit = coboundary_fit(cocycle_cochain(r2), WordSet.random_walk(gens, depth=2))
    out.append(Case("disk_experiment.negative_control", fit.residual, DEFAULT_TOLERANCES["fit_negative"],
                    comparison=">", values={"null_dim": fit.null_dim}))
    twists, ws = disk_word_set(rng, words, depth, extra)
    for k, x0 in enumerate([(0.0, 0.0), DISK_SHIFTED_BASEPOINT, (-0.2, 0.5)]):
        model = make_disk(x0)
        try:
            fit = coboundary_fit(cocycle_cochain(model), ws)
            out.append(Case(f"disk_experiment.twists.{k}", fit.residual, comparison="info",
                            inputs=twists,
                            values={"basepoint": x0, "null_dim": fit.null_dim, "rank": fit.rank,
                                    "equations": fit.equations, "max_residual": fit.max_residual,
                                    "conclusion": "none"},
                            message="exploratory data only; no claim about the open-disk question"))
        except np.linalg.LinAlgError as exc:
            out.append(Case(f"disk_experiment.twists.{k}", float("nan"), comparison="info",
                            message=f"rank deficiency: {exc}"))
    return out


# --- product ---------------------------------------------------------------

@case("product.restriction", ("product",))
def _restriction(ctx):
    rng = ctx.rng("product.restriction")
    model = ctx.model
    A, B = model.factors
    res = 0.0
    for _ in range(ctx.n):
        g, h = ctx.elements(rng, 2, A)
        res = max(res, abs(cocycle_C(model, embed(model, g), embed(model, h)) - cocycle_C(A, g, h)))
        g, h = ctx.elements(rng, 2, B)
        res = max(res, abs(cocycle_C(model, embed(model, g, 1), embed(model, h, 1)) - cocycle_C(B, g, h)))
    return Case("product.restriction", res, ctx.tol("restriction"))


# --- torus -----------------------------------------------------------------

def _torus_field(rng, harmonic=True):
    a, b = rng.uniform(-1, 1, 2) if harmonic else (0.0, 0.0)
    return TorusField(float(a), float(b), TrigPolynomial.random(rng))


@case("torus.b_unit", ("torus",))
def _tb(ctx):
    val = torus_b(TorusField(1.0, 0.0), TorusField(0.0, 1.0))
    return Case("torus.b_unit", val - 1.0, ctx.tol("torus_b"), values={"b": val})


@case("torus.b_hamiltonian", ("torus",))
def _tbh(ctx):
    rng = ctx.rng("torus.b_hamiltonian")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y = _torus_field(rng, harmonic=False), _torus_field(rng)
        res = max(res, abs(torus_b(X, Y)), abs(torus_b(Y, X)), abs(torus_b(Y, Y)))
    return Case("torus.b_hamiltonian", res, ctx.tol("torus_hamiltonian"))


@case("torus.b_class", ("torus",))
def _tbc(ctx):
    rng = ctx.rng("torus.b_class")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y = _torus_field(rng), _torus_field(rng)
        res = max(res, abs(torus_b(X, Y) - (X.a * Y.b - X.b * Y.a)))
    return Case("torus.b_class", res, ctx.tol("torus_class"))


@case("torus.basepoint_average", ("torus",))
def _torus_basepoint(ctx):
    rng = ctx.rng("torus.basepoint_average")
    res = 0.0
    for _ in range(min(ctx.n, 5)):
        X, Y = _torus_field(rng), _torus_field(rng)
        x0 = rng.uniform(0, 1, 2)
        lhs = torus_b(X, Y) - torus_c_x0(X, Y, x0)
        res = max(res, abs(lhs + torus_shift_integral(X, Y, x0)))
    return Case("torus.basepoint_average", res, ctx.tol("torus_basepoint"))


@case("torus.alpha_integral", ("torus",))
def _torus_alpha(ctx):
    rng = ctx.rng("torus.alpha_integral")
    res = 0.0
    for _ in range(min(ctx.n, 10)):
        X, Y = _torus_field(rng), _torus_field(rng)
        res = max(res, abs(torus_b(X, Y) - torus_alpha_integral(X, Y)))
    return Case("torus.alpha_integral", res, ctx.tol("torus_alpha"))


# --- running ---------------------------------------------------------------

def run_suite(scenario: Scenario) -> Report:
    """Run every case registered for the scenario's model family.

    A case raising a numeric failure is kept in the report with status
    ``"error"`` so that partial reports are always complete.
    """
    fam = family(scenario.model)
    model = None if fam == "torus" else parse_model(scenario.model, scenario.basepoint)
    ctx = Context(scenario, model)
    cases = []
    for case_id, families, fn in _CASES:
        if fam not in families:
            continue
        try:
            cases.append(fn(ctx))
        except (QuadratureError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
            cases.append(Case(case_id, float("nan"), comparison="info", status="error",
                              message=f"{type(exc).__name__}: {exc}"))
    if fam == "disk":
        cases.extend(disk_experiment_cases(scenario.seed, scenario.words, scenario.depth))
    return Report("verify", scenario.to_json(), cases)


def run_disk_experiment(seed: int, words: int = 4, depth: int = 3) -> Report:
    if words < 4:
        raise ValueError("word count must be at least 4")
    scen = {"model": "disk", "seed": seed, "samples": words, "basepoint": None, "tolerances": {}}
    return Report("disk-experiment", scen, disk_experiment_cases(seed, words, depth))
