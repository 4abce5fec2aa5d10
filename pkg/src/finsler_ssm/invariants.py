"""Scalar invariants and the covector frame of a base point / direction / anchor.

All index raising and lowering is Euclidean, so vector and covector
coordinates coincide and every object is stored as one plain array.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleInvariants, ZeroDirection

# strict Gram inequalities get this much slack before a configuration is
# rejected; keeps square roots real without letting NaNs into the jets
FEASIBILITY_MARGIN = 1e-10


@dataclass(frozen=True)
class EvalPoint:
    """Base point x, direction y and anchor covector a in dimension n."""

    x: np.ndarray
    y: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "a"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if not (self.x.shape == self.y.shape == self.a.shape) or self.x.ndim != 1:
            raise ValueError("x, y, a must be 1-d arrays of equal length")
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        if not all(np.all(np.isfinite(v)) for v in (self.x, self.y, self.a)):
            raise ValueError("coordinates must be finite")
        if float(np.dot(self.y, self.y)) == 0.0:
            raise ZeroDirection("y must be nonzero")

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class Invariants:
    """The five scalars (r, u, s, v, t) and the frame covectors r_i, s_i, t_i."""

    r: float
    u: float
    s: float
    v: float
    t: float
    r_cov: np.ndarray
    s_cov: np.ndarray
    t_cov: np.ndarray
    a_norm2: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.r_cov.shape[0]


def compute_invariants(p: EvalPoint) -> Invariants:
    """r = |y|, u = |x|^2, s = <x,y>/|y|, v = <a,x>, t = <a,y>/|y| plus the frame."""
    r = float(np.linalg.norm(p.y))
    if r == 0.0:
        raise ZeroDirection("y must be nonzero")
    u = float(np.dot(p.x, p.x))
    s = float(np.dot(p.x, p.y)) / r
    v = float(np.dot(p.a, p.x))
    t = float(np.dot(p.a, p.y)) / r
    r_cov = p.y / r
    s_cov = p.x - s * r_cov
    t_cov = p.a - t * r_cov
    return Invariants(r=r, u=u, s=s, v=v, t=t, r_cov=r_cov, s_cov=s_cov,
                      t_cov=t_cov, a_norm2=float(np.dot(p.a, p.a)))


def realize_invariants(r: float, u: float, s: float, v: float, t: float,
                       a2: float, n: int) -> EvalPoint:
    """Canonical configuration whose invariants are the given scalars.

    Places y along e1, x in span{e1, e2} and a in span{e1, e2, e3}; rejects
    degenerate spans (u = s^2) because downstream decompositions need the
    frame {x, y, a} independent. a2 may sit exactly on its Gram bound, which
    collapses a into span{e1, e2}.
    """
    if n < 3:
        raise InfeasibleInvariants("need n >= 3 to embed the frame")
    if r <= 0.0:
        raise InfeasibleInvariants("r must be positive")
    us = u - s * s
    if us <= FEASIBILITY_MARGIN:
        raise InfeasibleInvariants("u - s^2 must be strictly positive")
    w = (v - s * t) / np.sqrt(us)
    rem = a2 - t * t - w * w
    if rem < -FEASIBILITY_MARGIN:
        raise InfeasibleInvariants("a2 too small for the requested (v, t)")
    rem = max(rem, 0.0)

    y = np.zeros(n)
    y[0] = r
    x = np.zeros(n)
    x[0] = s
    x[1] = np.sqrt(us)
    a = np.zeros(n)
    a[0] = t
    a[1] = w
    a[2] = np.sqrt(rem)
    return EvalPoint(x=x, y=y, a=a)
