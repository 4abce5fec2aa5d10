"""Fundamental tensor, angular metric, numeric inverse and quadratic forms.

The closed forms are assembled from phi-jets; each has an oracle companion
that differentiates F^2 mechanically through the jet engine, so the two
routes share no algebra beyond the generator expression itself.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import SingularMetric
from .invariants import EvalPoint, Invariants
from .phi_models import PhiModel, phi_jet, require_admissible


@dataclass(frozen=True)
class SymTensor2:
    """Dense symmetric rank-2 tensor; symmetry is exact by construction."""

    entries: np.ndarray

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "SymTensor2":
        arr = np.asarray(arr, dtype=float)
        return cls(entries=(arr + arr.T) / 2.0)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.entries[idx]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def smallest_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


@dataclass(frozen=True)
class QuadraticForms:
    """S2 = g^{ij} s_i s_j, R2 = g^{ij} s_i t_j, T2 = g^{ij} t_i t_j."""

    S2: float
    R2: float
    T2: float


def metric_coefficients(jet, s: float, t: float) -> tuple[float, ...]:
    """The seven scalars weighting delta, a, x and y/r blocks of the metric."""
    p = jet.partials
    phi, ps, pt = p[(0, 0, 0, 0)], p[(0, 1, 0, 0)], p[(0, 0, 0, 1)]
    pss, pst, ptt = p[(0, 2, 0, 0)], p[(0, 1, 0, 1)], p[(0, 0, 0, 2)]
    c0 = phi * phi - s * phi * ps - t * phi * pt
    c1 = pt * pt + phi * ptt
    c2 = (s * s * (ps * ps + phi * pss) + t * t * (pt * pt + phi * ptt)
          + 2 * t * s * (ps * pt + phi * pst) - s * phi * ps - t * phi * pt)
    c3 = phi * pt - s * (ps * pt + phi * pst) - t * (pt * pt + phi * ptt)
    c4 = phi * ps - s * (ps * ps + phi * pss) - t * (ps * pt + phi * pst)
    c5 = ps * pt + phi * pst
    c6 = ps * ps + phi * pss
    return c0, c1, c2, c3, c4, c5, c6


def fundamental_tensor(model: PhiModel, p: EvalPoint) -> SymTensor2:
    """Closed-form g_ij from the seven metric coefficients."""
    inv = require_admissible(model, p)
    jet = phi_jet(model, inv.u, inv.s, inv.v, inv.t, order=2)
    c0, c1, c2, c3, c4, c5, c6 = metric_coefficients(jet, inv.s, inv.t)
    yr = p.y / inv.r
    g = (c0 * np.eye(p.n)
         + c1 * np.outer(p.a, p.a)
         + c2 * np.outer(yr, yr)
         + c3 * (np.outer(yr, p.a) + np.outer(p.a, yr))
         + c4 * (np.outer(yr, p.x) + np.outer(p.x, yr))
         + c5 * (np.outer(p.x, p.a) + np.outer(p.a, p.x))
         + c6 * np.outer(p.x, p.x))
    return SymTensor2.from_array(g)


def f_squared_jet(model: PhiModel, p: EvalPoint, order: int,
                  with_x: bool = False) -> jets.TaylorPoly:
    """F^2 lifted to a jet in fiber perturbations (and base ones if asked).

    Variables 0..n-1 perturb y; with ``with_x`` true, variables n..2n-1
    perturb x (joint total degree capped at ``order``).
    """
    require_admissible(model, p)
    n = p.n
    if with_x:
        sp = jets.space(2 * n, order)
        yv = [sp.variable(i, p.y[i]) for i in range(n)]
        xv = [sp.variable(n + i, p.x[i]) for i in range(n)]
    else:
        sp = jets.space(n, order)
        yv = [sp.variable(i, p.y[i]) for i in range(n)]
        xv = [sp.constant(p.x[i]) for i in range(n)]
    r2 = yv[0] * yv[0]
    for c in yv[1:]:
        r2 = r2 + c * c
    r = r2.sqrt()
    u = xv[0] * xv[0]
    for c in xv[1:]:
        u = u + c * c
    xy = xv[0] * yv[0]
    for cx, cy in zip(xv[1:], yv[1:]):
        xy = xy + cx * cy
    rinv = r.reciprocal()
    s = xy * rinv
    v = sp.constant(0.0)
    t = sp.constant(0.0)
    for ai, cx, cy in zip(p.a, xv, yv):
        v = v + ai * cx
        t = t + ai * cy
    t = t * rinv
    phi = model.expr(u, s, v, t)
    return r2 * phi * phi


def fundamental_tensor_oracle(model: PhiModel, p: EvalPoint) -> SymTensor2:
    """g_ij = (1/2) d^2(F^2)/dy^i dy^j by direct jet differentiation."""
    f2 = f_squared_jet(model, p, order=2)
    n = p.n
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            mono = tuple((1 if k == i else 0) + (1 if k == j else 0) for k in range(n))
            g[i, j] = g[j, i] = 0.5 * float(f2.partial(mono))
    return SymTensor2.from_array(g)


def angular_metric(model: PhiModel, p: EvalPoint) -> SymTensor2:
    """Closed-form h_ij; annihilates y by construction."""
    inv = require_admissible(model, p)
    jet = phi_jet(model, inv.u, inv.s, inv.v, inv.t, order=2)
    pj = jet.partials
    phi, ps, pt = pj[(0, 0, 0, 0)], pj[(0, 1, 0, 0)], pj[(0, 0, 0, 1)]
    pss, pst, ptt = pj[(0, 2, 0, 0)], pj[(0, 1, 0, 1)], pj[(0, 0, 0, 2)]
    sigma1 = phi - inv.s * ps - inv.t * pt
    rc, sc, tc = inv.r_cov, inv.s_cov, inv.t_cov
    h = (sigma1 * phi * (np.eye(p.n) - np.outer(rc, rc))
         + phi * pss * np.outer(sc, sc)
         + phi * ptt * np.outer(tc, tc)
         + phi * pst * (np.outer(sc, tc) + np.outer(tc, sc)))
    return SymTensor2.from_array(h)


def angular_metric_oracle(model: PhiModel, p: EvalPoint) -> SymTensor2:
    """h_ij = g_ij - F_{y^i} F_{y^j} with everything differentiated mechanically."""
    f2 = f_squared_jet(model, p, order=2)
    f = f2.sqrt()
    n = p.n
    df = np.array([float(f.partial(tuple(1 if k == i else 0 for k in range(n))))
                   for i in range(n)])
    g = fundamental_tensor_oracle(model, p)
    return SymTensor2.from_array(g.entries - np.outer(df, df))


def inverse_metric(g: SymTensor2) -> SymTensor2:
    """Dense symmetric inverse; rejects numerically singular metrics."""
    scale = g.norm()
    if g.smallest_eigenvalue() <= 1e-12 * max(scale, 1e-300):
        raise SingularMetric("fundamental tensor is not positive definite")
    return SymTensor2.from_array(np.linalg.inv(g.entries))


def quadratic_forms(ginv: SymTensor2, inv: Invariants) -> QuadraticForms:
    """Contract the frame covectors against the inverse metric."""
    sc, tc = inv.s_cov, inv.t_cov
    return QuadraticForms(
        S2=float(sc @ ginv.entries @ sc),
        R2=float(sc @ ginv.entries @ tc),
        T2=float(tc @ ginv.entries @ tc),
    )
