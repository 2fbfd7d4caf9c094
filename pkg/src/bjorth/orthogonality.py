"""Birkhoff-James orthogonality and its strong (strict) variant.

Everything here reduces to the convex map ``f(t) = ||x + t y||``:

* ``x`` is BJ-orthogonal to ``y`` iff ``t = 0`` minimizes ``f``, i.e. the
  one-sided derivatives satisfy ``f'_-(0) <= 0 <= f'_+(0)``;
* the orthogonality is strong iff ``t = 0`` is the *unique* minimizer.

For p in {1, inf} ``f`` is piecewise linear and its minimizer set is found
exactly from the breakpoints. For 1 < p < inf ``f`` is strictly convex and
the minimizer is located by a bracketed Newton iteration on its derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .space import EPS, INF, TIE, PNormSpace, format_p

__all__ = [
    "ArgminInterval",
    "OrthReport",
    "argmin_interval",
    "bj_defect",
    "bj_direction_2d",
    "bj_orthogonal",
    "line_min_values",
    "orth_report",
    "skew_pair",
    "strongly_bj_orthogonal",
    "strongly_orthonormal_relative",
    "strongly_orthonormal_set",
    "symmetry_defect",
]


@dataclass(frozen=True)
class ArgminInterval:
    """Minimizer set ``[lo, hi]`` of ``t -> ||x + t y||``."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, t: float, eps: float = 0.0) -> bool:
        return self.lo - eps <= t <= self.hi + eps

    def is_zero(self, eps: float = EPS) -> bool:
        return abs(self.lo) <= eps and abs(self.hi) <= eps


@dataclass(frozen=True)
class OrthReport:
    bj: bool
    strong: bool
    interval: ArgminInterval
    deriv_plus: float
    deriv_minus: float


def bj_orthogonal(space: PNormSpace, x, y, eps: float = EPS) -> bool:
    """True iff ``||x|| <= ||x + t y||`` for every real ``t`` (up to ``eps``)."""
    lo, hi = space.norm_deriv_bounds(x, y)
    return lo <= eps and hi >= -eps


def bj_defect(space: PNormSpace, x, y) -> float:
    """Distance from 0 to ``[f'_-(0), f'_+(0)]``; zero iff ``x`` is BJ-orthogonal to ``y``."""
    lo, hi = space.norm_deriv_bounds(x, y)
    return max(lo, -hi, 0.0)


def argmin_interval(space: PNormSpace, x, y, tol: float = 1e-10) -> ArgminInterval:
    x = space.vector(x)
    y = space.vector(y)
    if not np.any(y):
        raise ValueError("direction is zero")
    if not np.any(x):
        raise ValueError("base point is zero")
    return _line_argmin(space, x, y, tol)


def strongly_bj_orthogonal(space: PNormSpace, x, y, eps: float = EPS) -> bool:
    """True iff ``||x|| < ||x + t y||`` for every ``t != 0`` (up to ``eps``)."""
    return argmin_interval(space, x, y).is_zero(eps)


def orth_report(space: PNormSpace, x, y, eps: float = EPS) -> OrthReport:
    interval = argmin_interval(space, x, y)
    lo, hi = space.norm_deriv_bounds(x, y)
    bj = lo <= eps and hi >= -eps
    return OrthReport(bj=bj, strong=bj and interval.is_zero(eps), interval=interval,
                      deriv_plus=hi, deriv_minus=lo)


def bj_direction_2d(space: PNormSpace, x) -> np.ndarray:
    """Unit vector ``y`` with ``x`` BJ-orthogonal to ``y`` in a smooth plane.

    ``y`` is proportional to ``(-|x2|^(p-1) sgn x2, |x1|^(p-1) sgn x1)``,
    which annihilates the gradient of the norm at ``x``.
    """
    if space.dim != 2:
        raise ValueError("bj_direction_2d needs a two-dimensional space")
    if not space.smooth():
        raise ValueError(f"bj_direction_2d needs 1 < p < inf, got p={format_p(space.p)}")
    x = space.vector(x)
    if not space.is_unit(x):
        raise ValueError("x must be a unit vector")
    p = space.p
    y = np.array([-abs(x[1]) ** (p - 1) * np.sign(x[1]), abs(x[0]) ** (p - 1) * np.sign(x[0])])
    return space.normalize(y)


def symmetry_defect(space: PNormSpace, x, y) -> float:
    """How far ``y`` is from being BJ-orthogonal to ``x``, given ``x`` BJ-orthogonal to ``y``."""
    if not bj_orthogonal(space, x, y, EPS):
        raise ValueError("x not BJ-orthogonal to y")
    return bj_defect(space, y, x)


def skew_pair(p: float, k: float) -> tuple[np.ndarray, np.ndarray]:
    """The unit point ``x = (1, k)/||(1, k)||_p`` and ``y = bj_direction_2d(x)``.

    ``x`` is BJ-orthogonal to ``y``; the reverse holds only for p = 2 (or
    k = 1), which makes this pair the standard witness against symmetry.
    """
    space = PNormSpace(2, p)
    if not space.smooth():
        raise ValueError(f"skew_pair needs 1 < p < inf, got p={format_p(space.p)}")
    x = space.normalize([1.0, k])
    return x, bj_direction_2d(space, x)


def strongly_orthonormal_relative(space: PNormSpace, vectors, i0: int,
                                  eps: float = EPS, seed: int = 0) -> bool:
    """Is ``vectors`` strongly orthonormal relative to ``vectors[i0]``?

    That is, does adding any nonzero combination of the other vectors
    strictly increase the norm of ``vectors[i0]``?

    Smooth spaces decide this exactly through pairwise BJ-orthogonality.
    For p in {1, inf} the answer is a bounded search: line probes plus
    multistart minimization, so ``True`` means no violation was found.
    """
    vecs = _unit_independent(space, vectors)
    m = len(vecs)
    if not 0 <= i0 < m:
        raise IndexError(f"index {i0} out of range for {m} vectors")
    x0 = vecs[i0]
    others = np.delete(vecs, i0, axis=0)
    if len(others) == 0:
        return True
    if space.smooth():
        return all(bj_orthogonal(space, x0, xj, eps) for xj in others)
    return _relative_search(space, x0, others, eps, seed)


def strongly_orthonormal_set(space: PNormSpace, vectors, eps: float = EPS, seed: int = 0) -> bool:
    vecs = _unit_independent(space, vectors)
    return all(strongly_orthonormal_relative(space, vecs, i, eps, seed) for i in range(len(vecs)))


def line_min_values(space: PNormSpace, rows, r, tol: float = 1e-13) -> np.ndarray:
    """``min_t ||h + t r||`` for every row ``h`` of ``rows`` (batched)."""
    H = np.atleast_2d(np.asarray(rows, dtype=float))
    r = space.vector(r)
    if not np.any(r):
        return space.norms(H)
    if space.smooth():
        t = _smooth_roots(H, r, space.p, tol)
        return space.norms(H + t[:, None] * r)
    cand = _breakpoints_batch(H, r, space.p)
    cand = np.concatenate([cand, np.zeros((len(H), 1))], axis=1)
    pts = H[:, None, :] + cand[:, :, None] * r[None, None, :]
    if space.p == INF:
        vals = np.abs(pts).max(axis=2)
    else:
        vals = np.abs(pts).sum(axis=2)
    return vals.min(axis=1)


# -- internals ------------------------------------------------------------


def _unit_independent(space: PNormSpace, vectors) -> np.ndarray:
    vecs = np.array([space.vector(v) for v in vectors])
    if len(vecs) == 0:
        raise ValueError("empty vector set")
    if np.linalg.matrix_rank(vecs) < len(vecs):
        raise ValueError("vectors are linearly dependent")
    for v in vecs:
        if not space.is_unit(v):
            raise ValueError("vectors must have unit norm")
    return vecs


def _line_argmin(space: PNormSpace, x: np.ndarray, y: np.ndarray, tol: float) -> ArgminInterval:
    if space.smooth():
        t = float(_smooth_roots(x[None, :], y, space.p, tol)[0])
        return ArgminInterval(t, t)
    return _piecewise_linear_argmin(x, y, space.p)


def _smooth_roots(H: np.ndarray, r: np.ndarray, p: float, tol: float) -> np.ndarray:
    """Minimizer of ``t -> ||h + t r||_p`` per row.

    The sign of the derivative equals the sign of
    ``sum_i phi(h_i + t r_i) r_i`` with ``phi(s) = |s|^(p-1) sgn s``,
    which is strictly increasing in ``t`` for ``r != 0``. Newton steps on
    that function are kept inside a shrinking bracket and replaced by
    bisection whenever they would leave it.
    """
    scale = np.abs(r).max()
    rs = r / scale

    def slope(rows, t):
        z = rows + t[:, None] * rs
        zmax = np.abs(z).max(axis=1, keepdims=True)
        zmax = np.where(zmax > 0, zmax, 1.0)
        u = np.abs(z) / zmax
        val = np.sum(u ** (p - 1) * np.sign(z) * rs, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            curv = np.where(u > 0, u ** (p - 2), 0.0)
        der = (p - 1) * np.sum(curv * rs * rs, axis=1) / zmax[:, 0]
        return val, der

    # beyond |t| = 2 ||h|| / ||r|| the norm exceeds ||h||
    radius = 2.0 * np.abs(H).sum(axis=1) / np.abs(rs).max() + 1.0
    lo, hi = -radius, radius.copy()
    t = np.zeros(len(H))
    step_old = hi - lo
    idx = np.arange(len(H))
    for _ in range(400):
        if len(idx) == 0:
            break
        ti = t[idx]
        s, ds = slope(H[idx], ti)
        lo[idx] = np.where(s < 0, ti, lo[idx])
        hi[idx] = np.where(s > 0, ti, hi[idx])
        lo_i, hi_i = lo[idx], hi[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = s / ds
        nt = ti - newton
        converged = (s == 0.0) | ((np.abs(newton) <= tol) & (np.abs(s) <= 1e-9))
        # bisect when Newton leaves the bracket or is not converging fast enough
        bad = (~np.isfinite(nt) | (nt <= lo_i) | (nt >= hi_i)
               | (np.abs(2.0 * s) > np.abs(step_old[idx] * ds))) & ~converged
        nt = np.where(bad, 0.5 * (lo_i + hi_i), np.where(converged, ti, nt))
        step = np.abs(nt - ti)
        step_old[idx] = np.where(bad, 0.5 * (hi_i - lo_i), step)
        t[idx] = nt
        finished = converged | (hi_i - lo_i <= tol)
        idx = idx[~finished]
    return t / scale


def _breakpoints_batch(H: np.ndarray, r: np.ndarray, p: float) -> np.ndarray:
    """Candidate kinks of ``t -> ||h + t r||`` for p in {1, inf}, one row per ``h``."""
    n = len(r)
    cols = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            if r[i] != 0:
                cols.append(-H[:, i] / r[i])
            if p == INF:
                for j in range(i + 1, n):
                    for s in (1.0, -1.0):
                        den = r[i] - s * r[j]
                        if den != 0:
                            cols.append(-(H[:, i] - s * H[:, j]) / den)
    if not cols:
        return np.zeros((len(H), 0))
    return np.stack(cols, axis=1) + 0.0


def _piecewise_slope(x: np.ndarray, y: np.ndarray, t: float, p: float) -> float:
    z = x + t * y
    if p == INF:
        k = int(np.argmax(np.abs(z)))
        return float(np.sign(z[k]) * y[k])
    return float(np.sum(np.sign(z) * y))


def _piecewise_linear_argmin(x: np.ndarray, y: np.ndarray, p: float) -> ArgminInterval:
    b = np.unique(_breakpoints_batch(x[None, :], y, p)[0])
    # f is coercive, so there is at least one kink with slope changing sign
    pts = np.concatenate([[b[0] - 1.0], 0.5 * (b[1:] + b[:-1]), [b[-1] + 1.0]])
    slopes = np.array([_piecewise_slope(x, y, t, p) for t in pts])
    flat = TIE * np.abs(y).sum()
    # slopes[j] is the slope on (b[j-1], b[j])
    j_lo = int(np.argmax(slopes[1:] >= -flat)) + 1
    j_hi = int(np.nonzero(slopes[:-1] <= flat)[0][-1])
    return ArgminInterval(float(b[j_lo - 1]) + 0.0, float(b[j_hi]) + 0.0)


def _relative_search(space: PNormSpace, x0: np.ndarray, others: np.ndarray,
                     eps: float, seed: int) -> bool:
    m = len(others)
    A = others.T
    base = space.norm(x0)

    def g(lam):
        return space.norm(x0 + A @ lam)

    probes = list(np.eye(m))
    probes.append(np.ones(m))
    for i in range(m):
        for j in range(i + 1, m):
            probes.append(np.eye(m)[i] - np.eye(m)[j])
            probes.append(np.eye(m)[i] + np.eye(m)[j])
    for d in probes:
        if not _line_argmin(space, x0, A @ d, 1e-12).is_zero(eps):
            return False

    starts = [s * e for e in np.eye(m) for s in (1.0, -1.0)]
    starts += [np.ones(m) / m, -np.ones(m) / m]
    starts += list(np.random.default_rng(seed).standard_normal((8, m)))
    for s in starts:
        res = minimize(g, s, method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000 * m})
        lam = res.x
        if np.abs(lam).max() > eps and g(lam) <= base + eps:
            return False
    return True
