"""Truncated multivariate Taylor-polynomial arithmetic (forward mode).

Every scalar in a lifted computation carries a dense coefficient vector over
the monomials of total degree <= order in a fixed set of formal variables.
Arithmetic (including division, square roots and analytic powers) propagates
the full jet, so mixed partial derivatives of arbitrary composite expressions
come out exact to floating-point roundoff.

Coefficient arrays may carry leading batch axes; all operations broadcast, so
one lifted evaluation can cover a whole batch of base points.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import product

import numpy as np


def _enumerate_monomials(nvars: int, order: int, group_caps) -> list[tuple[int, ...]]:
    monos = []
    for exps in product(range(order + 1), repeat=nvars):
        if sum(exps) > order:
            continue
        if any(sum(exps[i] for i in grp) > cap for grp, cap in group_caps):
            continue
        monos.append(exps)
    monos.sort(key=lambda m: (sum(m), m))
    return monos


class JetSpace:
    """Monomial tables for jets in ``nvars`` variables, total degree <= ``order``.

    ``group_caps`` optionally restricts the summed degree over a subset of the
    variables, e.g. ``(((0, 1), 1),)`` caps variables 0 and 1 to joint degree 1.
    Spaces are cached; obtain them through :func:`space`.
    """

    def __init__(self, nvars: int, order: int, group_caps=()):
        self.nvars = nvars
        self.order = order
        self.group_caps = tuple((tuple(g), int(c)) for g, c in group_caps)
        self.monomials = _enumerate_monomials(nvars, order, self.group_caps)
        self.n_terms = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degrees = np.array([sum(m) for m in self.monomials], dtype=np.int64)
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in m) for m in self.monomials], dtype=float
        )
        self._mul_tables = None
        self._diff_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    # -- tables ---------------------------------------------------------

    def _build_mul_tables(self):
        ii, jj, kk = [], [], []
        for i, mi in enumerate(self.monomials):
            di = sum(mi)
            for j, mj in enumerate(self.monomials):
                if di + sum(mj) > self.order:
                    continue
                target = tuple(a + b for a, b in zip(mi, mj))
                k = self.index.get(target)
                if k is not None:
                    ii.append(i)
                    jj.append(j)
                    kk.append(k)
        ii = np.array(ii, dtype=np.int64)
        jj = np.array(jj, dtype=np.int64)
        kk = np.array(kk, dtype=np.int64)
        srt = np.argsort(kk, kind="stable")
        ii, jj, kk = ii[srt], jj[srt], kk[srt]
        starts = np.searchsorted(kk, np.arange(self.n_terms))
        # every target has at least the (k, 0) pair, so segments are non-empty
        assert np.all(np.diff(starts) > 0) or self.n_terms <= 1
        self._mul_tables = (ii, jj, starts)

    def _mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self._mul_tables is None:
            self._build_mul_tables()
        ii, jj, starts = self._mul_tables
        w = a[..., ii] * b[..., jj]
        return np.add.reduceat(w, starts, axis=-1)

    def _diff_table(self, var: int):
        tab = self._diff_tables.get(var)
        if tab is None:
            src, dst, fac = [], [], []
            for i, m in enumerate(self.monomials):
                if m[var] == 0:
                    continue
                lower = tuple(e - 1 if v == var else e for v, e in enumerate(m))
                k = self.index.get(lower)
                if k is not None:
                    src.append(i)
                    dst.append(k)
                    fac.append(m[var])
            tab = (
                np.array(src, dtype=np.int64),
                np.array(dst, dtype=np.int64),
                np.array(fac, dtype=float),
            )
            self._diff_tables[var] = tab
        return tab

    # -- constructors -----------------------------------------------------

    def zero(self, batch_shape=()) -> "TaylorPoly":
        return TaylorPoly(self, np.zeros(tuple(batch_shape) + (self.n_terms,)))

    def constant(self, value) -> "TaylorPoly":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (self.n_terms,))
        c[..., 0] = value
        return TaylorPoly(self, c)

    def variable(self, var: int, base) -> "TaylorPoly":
        base = np.asarray(base, dtype=float)
        c = np.zeros(base.shape + (self.n_terms,))
        c[..., 0] = base
        e = tuple(1 if v == var else 0 for v in range(self.nvars))
        c[..., self.index[e]] = 1.0
        return TaylorPoly(self, c)

    def poly(self, coeffs: np.ndarray) -> "TaylorPoly":
        return TaylorPoly(self, np.asarray(coeffs, dtype=float))


@lru_cache(maxsize=None)
def space(nvars: int, order: int, group_caps=()) -> JetSpace:
    return JetSpace(nvars, order, group_caps)


class TaylorPoly:
    """A truncated Taylor polynomial; supports +, -, *, /, ** and sqrt."""

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, c: np.ndarray):
        self.space = space
        self.c = c

    # -- ring operations --------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TaylorPoly):
            if other.space is not self.space:
                raise ValueError("jet spaces differ")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is not None:
            return TaylorPoly(self.space, self.c + o.c)
        out = self.c.copy()
        out[..., 0] += other
        return TaylorPoly(self.space, out)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is not None:
            return TaylorPoly(self.space, self.c - o.c)
        out = self.c.copy()
        out[..., 0] -= other
        return TaylorPoly(self.space, out)

    def __rsub__(self, other):
        out = -self.c
        out[..., 0] += other
        return TaylorPoly(self.space, out)

    def __neg__(self):
        return TaylorPoly(self.space, -self.c)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is not None:
            return TaylorPoly(self.space, self.space._mul(self.c, o.c))
        return TaylorPoly(self.space, self.c * np.asarray(other)[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is not None:
            return self * o.reciprocal()
        return TaylorPoly(self.space, self.c / np.asarray(other)[..., None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = self.space.constant(np.ones(self.c.shape[:-1]))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- analytic functions via series in the nilpotent part --------------

    def _series(self, scalar_fn, term_fn):
        """sum_k s_k * g^k with g the nilpotent part over the constant term.

        ``scalar_fn(c0)`` gives the leading factor, ``term_fn(k, c0)`` the
        series coefficient s_k (s_0 = 1 implied).
        """
        c0 = self.c[..., 0]
        g = self.c / np.where(c0 == 0.0, 1.0, c0)[..., None]
        g[..., 0] = 0.0
        lead = scalar_fn(c0)
        acc = np.zeros_like(self.c)
        acc[..., 0] = 1.0
        power = acc.copy()
        for k in range(1, self.space.order + 1):
            power = self.space._mul(power, g)
            acc = acc + term_fn(k, c0)[..., None] * power
        return TaylorPoly(self.space, lead[..., None] * acc)

    def reciprocal(self) -> "TaylorPoly":
        return self._series(
            lambda c0: 1.0 / c0,
            lambda k, c0: np.full(c0.shape, (-1.0) ** k),
        )

    def sqrt(self) -> "TaylorPoly":
        def coeff(k, c0):
            s = 1.0
            for i in range(1, k + 1):
                s *= (0.5 - i + 1) / i
            return np.full(c0.shape, s)

        return self._series(np.sqrt, coeff)

    # -- calculus ----------------------------------------------------------

    def fderiv(self, var: int) -> "TaylorPoly":
        """Formal partial derivative; top-degree coefficients become stale."""
        src, dst, fac = self.space._diff_table(var)
        out = np.zeros_like(self.c)
        out[..., dst] = self.c[..., src] * fac
        return TaylorPoly(self.space, out)

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    def partial(self, mono: tuple[int, ...]) -> np.ndarray:
        """Mixed partial derivative value for the given exponent tuple."""
        idx = self.space.index[tuple(mono)]
        return self.c[..., idx] * self.space.factorials[idx]


def sqrt(x):
    """sqrt that dispatches between floats/arrays and TaylorPoly."""
    if isinstance(x, TaylorPoly):
        return x.sqrt()
    return np.sqrt(x)


def compose_series(coeffs: np.ndarray, space4: JetSpace, deviations, out_space: JetSpace,
                   degree: int | None = None) -> TaylorPoly:
    """Compose a Taylor series in four variables with nilpotent jet deviations.

    ``coeffs[..., t]`` are Taylor coefficients (partial / multi-factorial) over
    ``space4``; ``deviations`` are four jets in ``out_space`` with zero constant
    term. Terms above ``degree`` (default: the output order) are dropped.
    Zero series coefficients are skipped, so sparse models compose cheaply.
    """
    if degree is None:
        degree = out_space.order
    du, ds, dv, dt = deviations
    batch = coeffs.shape[:-1]
    nonzero = np.nonzero(
        np.any(coeffs.reshape(-1, coeffs.shape[-1]) != 0.0, axis=0)
    )[0]
    one = out_space.constant(np.ones(batch))
    pow_u: dict[int, TaylorPoly] = {0: one}
    pow_s: dict[int, TaylorPoly] = {0: one}
    pow_vt: dict[tuple[int, int], TaylorPoly] = {(0, 0): one}

    def upow(k):
        if k not in pow_u:
            pow_u[k] = upow(k - 1) * du
        return pow_u[k]

    def spow(k):
        if k not in pow_s:
            pow_s[k] = spow(k - 1) * ds
        return pow_s[k]

    def vtpow(cd):
        if cd not in pow_vt:
            c, d = cd
            pow_vt[cd] = vtpow((c - 1, d)) * dv if c else vtpow((c, d - 1)) * dt
        return pow_vt[cd]

    # group by (a, b): one jet multiplication per (u, s)-power pair
    groups: dict[tuple[int, int], list[tuple[tuple[int, int], int]]] = {}
    for t in nonzero:
        a, b, cc, dd = space4.monomials[t]
        if a + b + cc + dd > degree:
            continue
        groups.setdefault((a, b), []).append(((cc, dd), t))

    acc = out_space.zero(batch)
    for (a, b), terms in sorted(groups.items()):
        inner = out_space.zero(batch)
        for (cd, t) in terms:
            w = coeffs[..., t]
            inner = TaylorPoly(out_space, inner.c + w[..., None] * vtpow(cd).c)
        if a == 0 and b == 0:
            acc = acc + inner
        else:
            acc = acc + (upow(a) * spow(b)) * inner
    return acc


def series_shift(coeffs: np.ndarray, space4: JetSpace, var: int) -> np.ndarray:
    """Taylor coefficients of the derivative series with respect to one variable."""
    out = np.zeros_like(coeffs)
    for i, m in enumerate(space4.monomials):
        shifted = tuple(e + 1 if v == var else e for v, e in enumerate(m))
        j = space4.index.get(shifted)
        if j is not None:
            out[..., i] = coeffs[..., j] * shifted[var]
    return out


def jet_matrix_inverse(rows: list[list[TaylorPoly]]) -> list[list[TaylorPoly]]:
    """Inverse of a jet-valued square matrix via a truncated Neumann series.

    The constant-term matrix is inverted numerically (batched); the nilpotent
    remainder enters through sum_k (-N)^k, exact at the space's order.
    """
    n = len(rows)
    sp = rows[0][0].space
    batch = rows[0][0].c.shape[:-1]
    a0 = np.empty(batch + (n, n))
    for i in range(n):
        for j in range(n):
            a0[..., i, j] = rows[i][j].value
    a0inv = np.linalg.inv(a0)

    def num_mix(mat_num, rows_jet):
        # numeric (…, n, n) times jet matrix: linear combinations only
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                c = sum(mat_num[..., i, k, None] * rows_jet[k][j].c for k in range(n))
                row.append(TaylorPoly(sp, c))
            out.append(row)
        return out

    delta = [
        [TaylorPoly(sp, rows[i][j].c - (a0[..., i, j, None] * (np.arange(sp.n_terms) == 0)))
         for j in range(n)]
        for i in range(n)
    ]
    nil = num_mix(a0inv, delta)  # N = A0^{-1} (A - A0), nilpotent constant term

    total = [[sp.constant(np.full(batch, 1.0 if i == j else 0.0))
              for j in range(n)] for i in range(n)]
    term = [[total[i][j] for j in range(n)] for i in range(n)]
    for _ in range(sp.order):
        nxt = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = term[i][0] * nil[0][j]
                for k in range(1, n):
                    acc = acc + term[i][k] * nil[k][j]
                row.append(-acc)
            nxt.append(row)
        term = nxt
        for i in range(n):
            for j in range(n):
                total[i][j] = total[i][j] + term[i][j]

    # right-multiply by A0^{-1}
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            c = sum(total[i][k].c * a0inv[..., k, j, None] for k in range(n))
            row.append(TaylorPoly(sp, c))
        out.append(row)
    return out
