"""Metric generator models phi(u, s, v, t) and their exact jets.

Each model is a closed-form expression evaluated either on plain floats or on
truncated Taylor polynomials; the latter yields every mixed partial derivative
up to the requested order in one pass. Central finite differences exist only
as the independent cross-check path (:func:`fd_self_check`).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import jets
from .errors import OrderUnsupported, OutOfDomain, ZeroDirection
from .invariants import EvalPoint, compute_invariants

#: deepest derivative chain: one x/y-derivative of the mean Landsberg
#: covector, which consumes third fiber derivatives of the spray on top of
#: the second-order jets inside the fundamental tensor
MAX_ORDER = 6

#: admissible domains are shrunk by this margin from the analytic boundary
DOMAIN_MARGIN = 1e-6


def _expr_euclidean(u, s, v, t):
    return u * 0.0 + 1.0


def _expr_funk(u, s, v, t):
    root = jets.sqrt(1.0 - u + s * s)
    return (root + s) / (1.0 - u)


def _expr_berwald(u, s, v, t):
    root = jets.sqrt(1.0 - u + s * s)
    return (root + s) ** 2 / ((1.0 - u) ** 2 * root)


def _expr_shen(u, s, v, t):
    root = jets.sqrt(1.0 - u + s * s)
    core = (root + s) ** 2 / ((1.0 - u) ** 2 * root)
    brace = 1.0 + v + (1.0 - u) * t / (root + s)
    return brace * core


def _dom_euclidean(u, s, v, t):
    return np.ones(np.broadcast(u, s, v, t).shape, dtype=bool)


def _dom_ball(u, s, v, t):
    a = 1.0 - u + s * s
    ok = (u <= 1.0 - DOMAIN_MARGIN) & (a >= DOMAIN_MARGIN)
    root = np.sqrt(np.where(ok, a, 1.0))
    return ok & (root + s >= DOMAIN_MARGIN)


def _dom_shen(u, s, v, t):
    ok = _dom_ball(u, s, v, t)
    a = np.where(ok, 1.0 - u + s * s, 1.0)
    root = np.sqrt(a)
    brace = 1.0 + v + (1.0 - u) * t / (root + s)
    return ok & (brace >= DOMAIN_MARGIN)


_EXPRS: dict[str, Callable] = {
    "euclidean": _expr_euclidean,
    "funk": _expr_funk,
    "berwald": _expr_berwald,
    "shen": _expr_shen,
}

_DOMAINS: dict[str, Callable] = {
    "euclidean": _dom_euclidean,
    "funk": _dom_ball,
    "berwald": _dom_ball,
    "shen": _dom_shen,
}

_DOMAIN_DOCS = {
    "euclidean": "all of R^4",
    "funk": "u < 1, 1 - u + s^2 > 0, sqrt(1-u+s^2) + s > 0 (margin 1e-6)",
    "berwald": "u < 1, 1 - u + s^2 > 0, sqrt(1-u+s^2) + s > 0 (margin 1e-6)",
    "shen": "u < 1 with positive bracket 1 + v + (1-u) t / (sqrt(1-u+s^2)+s); "
            "anchor norm |a| < 1",
}

#: models whose generator ignores (v, t); they run with a zero anchor
ANCHOR_FREE = frozenset({"euclidean", "funk", "berwald"})


@dataclass(frozen=True)
class PhiJet:
    """phi and its mixed partials, keyed by (k_u, k_s, k_v, k_t)."""

    order: int
    partials: dict

    def __getitem__(self, mono) -> float:
        return self.partials[tuple(mono)]

    @property
    def phi(self) -> float:
        return self.partials[(0, 0, 0, 0)]


@dataclass(frozen=True)
class PhiModel:
    """A named generator with parameters, domain predicate and jet evaluator."""

    name: str
    params: tuple = ()
    derivative_mode: str = "exact"

    def __post_init__(self):
        if self.name not in _EXPRS:
            raise ValueError(f"unknown model {self.name!r}")
        if self.derivative_mode not in ("exact", "finite-difference"):
            raise ValueError("derivative_mode must be 'exact' or 'finite-difference'")

    @property
    def param_map(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def anchor_norm(self) -> float:
        """Default |a| used when sampling anchors for this model."""
        return self.param_map.get("a", 0.0)

    @property
    def domain_doc(self) -> str:
        return _DOMAIN_DOCS[self.name]

    def in_domain(self, u, s, v, t):
        return _DOMAINS[self.name](np.asarray(u, dtype=float), np.asarray(s, dtype=float),
                                   np.asarray(v, dtype=float), np.asarray(t, dtype=float))

    def expr(self, u, s, v, t):
        return _EXPRS[self.name](u, s, v, t)

    def phi(self, u: float, s: float, v: float = 0.0, t: float = 0.0) -> float:
        if not bool(self.in_domain(u, s, v, t)):
            raise OutOfDomain(f"({u}, {s}, {v}, {t}) not admissible for {self.name}")
        return float(self.expr(float(u), float(s), float(v), float(t)))


def make_model(name: str, **params: float) -> PhiModel:
    if name == "shen":
        a = float(params.pop("a", 0.5))
        if not 0.0 <= a < 1.0:
            raise ValueError("shen requires 0 <= a < 1")
        model = PhiModel(name="shen", params=(("a", a),))
    else:
        model = PhiModel(name=name)
    if params:
        raise ValueError(f"unknown parameters for {name}: {sorted(params)}")
    return model


def catalog() -> list[PhiModel]:
    """The shipped metric generators (shen carries its default anchor norm)."""
    return [
        make_model("euclidean"),
        make_model("funk"),
        make_model("berwald"),
        make_model("shen", a=0.5),
    ]


# -- jet evaluation ---------------------------------------------------------

@lru_cache(maxsize=8192)
def _taylor_cached(model: PhiModel, u: float, s: float, v: float, t: float,
                   order: int) -> np.ndarray:
    sp = jets.space(4, order)
    args = [sp.variable(i, val) for i, val in enumerate((u, s, v, t))]
    return model.expr(*args).c


def phi_taylor(model: PhiModel, u: float, s: float, v: float, t: float,
               order: int) -> np.ndarray:
    """Taylor coefficients of phi over the 4-variable space of that order."""
    return _taylor_cached(model, float(u), float(s), float(v), float(t), int(order))


def phi_taylor_batch(model: PhiModel, u, s, v, t, order: int) -> np.ndarray:
    """Batched Taylor coefficients, shape (..., n_terms)."""
    sp = jets.space(4, order)
    args = [sp.variable(i, np.asarray(val, dtype=float))
            for i, val in enumerate((u, s, v, t))]
    return model.expr(*args).c


def phi_jet(model: PhiModel, u: float, s: float, v: float, t: float,
            order: int) -> PhiJet:
    """All mixed partials of phi up to the given total order at one point."""
    if not 0 <= order <= MAX_ORDER:
        raise OrderUnsupported(f"order must be in [0, {MAX_ORDER}]")
    if not bool(model.in_domain(u, s, v, t)):
        raise OutOfDomain(f"({u}, {s}, {v}, {t}) not admissible for {model.name}")
    if model.derivative_mode == "finite-difference":
        return _phi_jet_fd(model, u, s, v, t, order)
    sp = jets.space(4, order)
    coeffs = phi_taylor(model, u, s, v, t, order)
    partials = {m: float(coeffs[i] * sp.factorials[i])
                for i, m in enumerate(sp.monomials)}
    if partials[(0, 0, 0, 0)] <= 0.0:
        raise OutOfDomain("phi must be positive on the admissible domain")
    return PhiJet(order=order, partials=partials)


# -- finite-difference cross-check -------------------------------------------

def _fd_partial(f, point, mono, h) -> float:
    """Nested central differences for one mixed partial."""
    for var, k in enumerate(mono):
        if k:
            lower = tuple(e - 1 if i == var else e for i, e in enumerate(mono))
            up = tuple(p + h if i == var else p for i, p in enumerate(point))
            dn = tuple(p - h if i == var else p for i, p in enumerate(point))
            return (_fd_partial(f, up, lower, h) - _fd_partial(f, dn, lower, h)) / (2 * h)
    return f(*point)


_FD_STEPS = {0: 0.0, 1: 1e-5, 2: 1e-5, 3: 1e-4}


def _phi_jet_fd(model: PhiModel, u, s, v, t, order: int) -> PhiJet:
    if order > 3:
        raise OrderUnsupported("finite-difference mode supports orders <= 3")
    sp = jets.space(4, order)
    f = _EXPRS[model.name]
    partials = {}
    for m in sp.monomials:
        k = sum(m)
        partials[m] = _fd_partial(f, (u, s, v, t), m, _FD_STEPS[k]) if k else f(u, s, v, t)
    return PhiJet(order=order, partials=partials)


@dataclass(frozen=True)
class FdCheckReport:
    max_rel_deviation: float
    worst_index: tuple


def fd_self_check(model: PhiModel, point: tuple[float, float, float, float]) -> FdCheckReport:
    """Compare exact jets against central finite differences, orders 1-3."""
    u, s, v, t = (float(c) for c in point)
    probe = max(_FD_STEPS.values()) * 10.0
    for du in (-probe, 0.0, probe):
        for ds in (-probe, 0.0, probe):
            if not bool(model.in_domain(u + du, s + ds, v, t)):
                raise OutOfDomain("point too close to the domain boundary")
    exact = phi_jet(model, u, s, v, t, order=3)
    f = _EXPRS[model.name]
    worst, worst_m = 0.0, (0, 0, 0, 0)
    for m, val in exact.partials.items():
        k = sum(m)
        if k == 0:
            continue
        fd = _fd_partial(f, (u, s, v, t), m, _FD_STEPS[k])
        rel = abs(val - fd) / max(abs(val), abs(fd), 1.0)
        if rel > worst:
            worst, worst_m = rel, m
    return FdCheckReport(max_rel_deviation=worst, worst_index=worst_m)


# -- metric evaluation helpers ------------------------------------------------

def require_admissible(model: PhiModel, p: EvalPoint):
    """Invariants of p, or OutOfDomain if the model rejects them."""
    inv = compute_invariants(p)
    if not bool(model.in_domain(inv.u, inv.s, inv.v, inv.t)):
        raise OutOfDomain(
            f"point with (u,s,v,t)=({inv.u:.6g}, {inv.s:.6g}, {inv.v:.6g}, "
            f"{inv.t:.6g}) not admissible for {model.name}")
    return inv


def metric_value(model: PhiModel, p: EvalPoint) -> float:
    """F(x, y) = |y| * phi(u, s, v, t)."""
    inv = require_admissible(model, p)
    return inv.r * float(model.expr(inv.u, inv.s, inv.v, inv.t))
