"""Best approximation and best coapproximation out of a subspace.

``g0`` in G is a best approximation to ``x`` when ``||x - g0|| <= ||x - g||``
for all ``g`` in G; ``w`` in G is a best coapproximation when
``||w - g|| <= ||x - g||`` for all ``g`` in G. Substituting ``h = w - g``
shows the latter holds iff every ``h`` in G is BJ-orthogonal to ``x - w``,
which is what the certificates below measure.

All subspace work is done in coefficient coordinates of the supplied
basis; the basis is never re-orthogonalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from ._search import compass_search
from .orthogonality import _line_argmin, line_min_values
from .space import INF, TIE, PNormSpace, gaussian_directions

__all__ = [
    "ApproxResult",
    "CoapproxResult",
    "SubspaceBasis",
    "approx_coapprox_discrepancy",
    "best_approximation",
    "best_coapproximation",
    "best_coapproximation_1d",
    "coapprox_violation",
]

#: Condition-number level above which results carry a warning.
ILL_CONDITIONED = 1e8


class SubspaceBasis:
    """An ordered, linearly independent spanning list for a subspace G."""

    def __init__(self, space: PNormSpace, vectors):
        rows = np.array([space.vector(v) for v in vectors], dtype=float)
        if rows.ndim != 2 or len(rows) == 0:
            raise ValueError("a subspace basis needs at least one vector")
        if len(rows) > space.dim:
            raise ValueError("more basis vectors than the ambient dimension")
        if np.linalg.matrix_rank(rows) < len(rows):
            raise ValueError("basis vectors are linearly dependent")
        rows.setflags(write=False)
        self.space = space
        self.vectors = rows

    def __len__(self):
        return len(self.vectors)

    def __repr__(self):
        return f"SubspaceBasis({self.space!r}, {self.vectors.tolist()})"

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as columns."""
        return self.vectors.T

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))

    def combine(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.vectors

    def coefficients(self, u, tol: float = 1e-9) -> np.ndarray:
        """Coordinates of ``u`` in this basis; raises if ``u`` is not in the span."""
        u = self.space.vector(u)
        c, *_ = np.linalg.lstsq(self.matrix, u, rcond=None)
        if np.abs(self.combine(c) - u).max() > tol * max(1.0, np.abs(u).max()):
            raise ValueError("vector is not in the span of the basis")
        return c

    def contains(self, u, tol: float = 1e-9) -> bool:
        try:
            self.coefficients(u, tol)
        except ValueError:
            return False
        return True

    def warnings(self) -> list[str]:
        cond = self.condition
        if cond > ILL_CONDITIONED:
            return [f"ill-conditioned basis (condition number {cond:.3g})"]
        return []


def _basis(space: PNormSpace, G) -> SubspaceBasis:
    if isinstance(G, SubspaceBasis):
        if G.space != space:
            raise ValueError("subspace basis belongs to a different space")
        return G
    return SubspaceBasis(space, G)


@dataclass
class ApproxResult:
    g0: np.ndarray
    distance: float
    unique: bool
    coefficients: np.ndarray
    interval_1d: tuple[float, float] | None = None
    warnings: list[str] = field(default_factory=list)


@dataclass
class CoapproxResult:
    """Outcome of a coapproximation search.

    ``found=False`` means no candidate below tolerance was found, not that
    none exists; ``method`` says whether the answer is exact or searched.
    """

    found: bool
    w: np.ndarray
    violation: float
    witnesses: list[tuple[np.ndarray, float]]
    coefficients: np.ndarray
    method: str
    interval_1d: tuple[float, float] | None = None
    warnings: list[str] = field(default_factory=list)


# -- best approximation ---------------------------------------------------


def best_approximation(space: PNormSpace, x, G, tol: float = 1e-8) -> ApproxResult:
    """Nearest point to ``x`` in span(G).

    One-dimensional G is solved exactly and reports the whole minimizer
    segment (midpoint returned) when the norm is flat. Higher dimensions use
    cyclic coordinate descent with exact line solves for smooth p, and a
    linear program for p in {1, inf} where coordinate descent can stall.
    """
    x = space.vector(x)
    B = _basis(space, G)
    warns = B.warnings()
    if len(B) == 1:
        b = B.vectors[0]
        iv = _line_argmin(space, x, -b, 1e-14)
        t = 0.5 * (iv.lo + iv.hi)
        g0 = t * b
        unique = space.strictly_convex() or iv.lo == iv.hi
        return ApproxResult(g0, space.norm(x - g0), unique, np.array([t]),
                            (iv.lo, iv.hi), warns)
    if space.smooth():
        c, converged = _coordinate_descent(space, x, B, tol)
        unique = True
        if not converged:
            warns = warns + ["coordinate descent stopped before reaching the tolerance"]
    else:
        c = _lp_nearest(space, x, B)
        unique = False
    g0 = B.combine(c)
    return ApproxResult(g0, space.norm(x - g0), unique, c, None, warns)


def _coordinate_descent(space: PNormSpace, x, B: SubspaceBasis, tol: float,
                        max_sweeps: int = 500) -> tuple[np.ndarray, bool]:
    c = _quasi_newton_start(space, x, B)
    for _ in range(max_sweeps):
        change = 0.0
        for j, b in enumerate(B.vectors):
            r = x - B.combine(c) + c[j] * b
            iv = _line_argmin(space, r, -b, 1e-14)
            t = 0.5 * (iv.lo + iv.hi)
            change = max(change, abs(t - c[j]))
            c[j] = t
        if change < tol:
            return c, True
    return c, False


def _quasi_newton_start(space: PNormSpace, x, B: SubspaceBasis) -> np.ndarray:
    # plain coordinate descent crawls when an optimal residual coordinate is
    # zero and p is near 1, so start it from a BFGS solution
    c0, *_ = np.linalg.lstsq(B.matrix, x, rcond=None)

    def f(c):
        r = x - B.combine(c)
        if not np.any(r):
            return 0.0, np.zeros_like(c)
        return space.norm(r), -(B.vectors @ space.support_functional(r))

    res = minimize(f, c0, jac=True, method="BFGS", options={"gtol": 1e-13})
    return res.x if np.all(np.isfinite(res.x)) else c0


def _lp_nearest(space: PNormSpace, x, B: SubspaceBasis) -> np.ndarray:
    n, m = space.dim, len(B)
    A = B.matrix
    if space.p == INF:
        # variables (c, s): minimize s with |x - A c| <= s
        cost = np.r_[np.zeros(m), 1.0]
        ones = np.ones((n, 1))
        A_ub = np.block([[-A, -ones], [A, -ones]])
    else:
        # variables (c, e): minimize sum(e) with |x - A c| <= e
        cost = np.r_[np.zeros(m), np.ones(n)]
        eye = np.eye(n)
        A_ub = np.block([[-A, -eye], [A, -eye]])
    b_ub = np.r_[-x, x]
    bounds = [(None, None)] * m + [(0, None)] * (len(cost) - m)
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"linear program failed: {res.message}")
    return res.x[:m]


# -- best coapproximation -------------------------------------------------


def best_coapproximation_1d(space: PNormSpace, x, g, tol: float = 1e-6) -> CoapproxResult:
    """Best coapproximation to ``x`` out of span{g}, in closed form.

    ``w = t g`` works iff ``g`` is BJ-orthogonal to ``x - t g``. The
    one-sided derivatives of the norm at ``g`` are affine in ``t``, so the
    feasible set is an explicit interval; its midpoint is returned.
    """
    x = space.vector(x)
    g = space.vector(g)
    if not np.any(g):
        raise ValueError("generator is zero")
    lo, hi = _coapprox_interval_1d(space, x, g)
    found = lo <= hi
    t = 0.5 * (lo + hi) if found else lo
    w = t * g
    return CoapproxResult(found, w, 0.0 if found else np.inf, [], np.array([t]),
                          "exact-1d", (lo, hi) if found else None)


def _coapprox_interval_1d(space: PNormSpace, x: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    if space.smooth():
        J = space.support_functional(g)
        t = float(J @ x) / space.norm(g)
        return t, t
    a = np.abs(g)
    top = a.max()
    if space.p == INF:
        active = a >= (1.0 - TIE) * top
        ratios = np.sign(g[active]) * x[active] / a[active]
        return float(ratios.min()), float(ratios.max())
    nz = a > TIE * top
    center = float(np.sum(np.sign(g[nz]) * x[nz]))
    slack = float(np.sum(np.abs(x[~nz])))
    mass = float(a[nz].sum())
    return (center - slack) / mass, (center + slack) / mass


def coapprox_violation(space: PNormSpace, x, w, G, sample_count: int = 500,
                       seed: int = 0) -> tuple[float, np.ndarray | None]:
    """Largest sampled value of ``||h|| - min_t ||h + t (x - w)||`` over unit ``h`` in G.

    Returns the violation and the worst witness ``h`` (``None`` when the
    violation is zero). The sample is deterministic in ``seed``.
    """
    x = space.vector(x)
    B = _basis(space, G)
    B.coefficients(w)
    H = _direction_sample(space, B, sample_count, seed)
    defects = _defects(space, H, x - space.vector(w))
    k = int(np.argmax(defects))
    if defects[k] <= 0.0:
        return 0.0, None
    return float(defects[k]), H[k]


def _direction_sample(space: PNormSpace, B: SubspaceBasis, count: int, seed: int) -> np.ndarray:
    m = len(B)
    coeffs = [np.eye(m)]
    for i in range(m):
        for j in range(i + 1, m):
            coeffs.append([np.eye(m)[i] + np.eye(m)[j], np.eye(m)[i] - np.eye(m)[j]])
    coeffs.append(gaussian_directions(np.random.default_rng(seed), count, m))
    H = B.combine(np.vstack(coeffs))
    return H / space.norms(H)[:, None]


def _defects(space: PNormSpace, H: np.ndarray, r: np.ndarray) -> np.ndarray:
    if not np.any(r):
        return np.zeros(len(H))
    return np.maximum(space.norms(H) - line_min_values(space, H, r), 0.0)


def best_coapproximation(space: PNormSpace, x, G, tol: float = 1e-6,
                         sample_count: int = 500, seed: int = 0) -> CoapproxResult:
    """Search span(G) for a best coapproximation to ``x``.

    One-dimensional G is exact. Otherwise the sampled violation is minimized
    over coefficients by a compass search from several starts; the result is
    a certificate, and ``found`` only means the violation fell below ``tol``.
    """
    x = space.vector(x)
    B = _basis(space, G)
    if len(B) == 1:
        res = best_coapproximation_1d(space, x, B.vectors[0])
        res.warnings = B.warnings()
        return res

    H = _direction_sample(space, B, sample_count, seed)

    def violation(c):
        return float(_defects(space, H, x - B.combine(c)).max())

    scale = max(space.norm(x), 1e-300) / float(np.mean(space.norms(B.vectors)))
    starts = _coapprox_starts(space, x, B, H)
    scored = [(violation(c), c) for c in starts]
    best_v, best_c = min(scored, key=lambda vc: vc[0])
    if best_v > tol:
        for v0, c0 in scored:
            v, c = compass_search(violation, c0, v0, scale, tol)
            if v < best_v:
                best_v, best_c = v, c
            if best_v <= tol:
                break

    w = B.combine(best_c)
    defects = _defects(space, H, x - w)
    order = np.argsort(-defects, kind="stable")[:5]
    witnesses = [(H[k], float(defects[k])) for k in order if defects[k] > 0.0]
    return CoapproxResult(best_v <= tol, w, best_v, witnesses, best_c,
                          "heuristic-search", None, B.warnings())


def _coapprox_starts(space: PNormSpace, x, B: SubspaceBasis, H: np.ndarray) -> list[np.ndarray]:
    m = len(B)
    starts = []
    if space.smooth():
        # x - B c must be annihilated by the norm gradient at every h in G
        J = np.array([space.support_functional(h) for h in H[: 50 * m]])
        c, *_ = np.linalg.lstsq(J @ B.matrix, J @ x, rcond=None)
        starts.append(c)
    starts.append(np.zeros(m))
    starts.append(best_approximation(space, x, B).coefficients)
    starts.append(np.array([best_coapproximation_1d(space, x, b).coefficients[0]
                            for b in B.vectors]))
    return starts


def approx_coapprox_discrepancy(space: PNormSpace, x, g) -> float | None:
    """``||g0 - w0||`` for the best approximation and coapproximation out of span{g}.

    ``None`` when no coapproximation exists.
    """
    approx = best_approximation(space, x, [g])
    co = best_coapproximation_1d(space, x, g)
    if not co.found:
        return None
    return space.norm(approx.g0 - co.w)
