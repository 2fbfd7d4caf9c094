"""Building strongly orthonormal sets.

* :func:`coapprox_gram_schmidt` augments a strongly orthonormal set with the
  normalized residual ``x - w`` of a best coapproximation ``w``.
* :class:`SNormFrame` carries the max-coefficient norm on the span of a
  strongly orthonormal set, and :func:`equivalence_constant` the constant
  ``k`` with ``s_norm(u) >= k ||u||``.
* :func:`complete_strongly_orthonormal_basis` searches for a strongly
  orthonormal Hamel basis through a given unit vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from ._search import compass_search
from .approximation import CoapproxResult, SubspaceBasis, best_coapproximation
from .orthogonality import (
    bj_defect,
    bj_orthogonal,
    strongly_bj_orthogonal,
    strongly_orthonormal_relative,
    strongly_orthonormal_set,
)
from .space import EPS, TIE, PNormSpace, format_p

__all__ = [
    "BasisSearchReport",
    "BoundReport",
    "GramSchmidtError",
    "SNormFrame",
    "coapprox_gram_schmidt",
    "complete_strongly_orthonormal_basis",
    "equivalence_constant",
    "mutual_orthogonal_partner",
    "orthogonality_residual",
    "relative_shift",
    "s_norm",
    "verify_coapprox_bound",
]

#: Largest dimension the basis search accepts.
MAX_SEARCH_DIM = 6

#: Extreme-point subsets examined before the continuous search in p in {1, inf}.
EXTREME_BUDGET = 5000


class GramSchmidtError(ValueError):
    """Raised when an augmentation step cannot be completed or verified.

    ``partial`` holds the vectors built so far and ``certificate`` the
    coapproximation search result of the failing step.
    """

    def __init__(self, message, partial, certificate: CoapproxResult | None = None):
        super().__init__(message)
        self.partial = partial
        self.certificate = certificate


def coapprox_gram_schmidt(space: PNormSpace, vectors, tol: float = 1e-6,
                          sample_count: int = 500, seed: int = 0) -> list[np.ndarray]:
    """Orthonormalize ``vectors`` using best coapproximations.

    Each step replaces the next input by ``(x - w) / ||x - w||`` where ``w``
    is the best coapproximation to ``x`` out of the span built so far. After
    every step the set must stay strongly orthonormal relative to each
    earlier element that it was relative to before the step; otherwise a
    :class:`GramSchmidtError` is raised.
    """
    if not space.strictly_convex():
        raise ValueError(
            f"coapproximation Gram-Schmidt needs a strictly convex space, got p={format_p(space.p)}")
    rows = [space.vector(v) for v in vectors]
    if not rows:
        return []
    if np.linalg.matrix_rank(np.array(rows)) < len(rows):
        raise ValueError("input vectors are linearly dependent")

    out = [space.normalize(rows[0])]
    relative = {0}
    for x in rows[1:]:
        x = space.normalize(x)
        res = best_coapproximation(space, x, out, tol=tol,
                                   sample_count=sample_count, seed=seed)
        if not res.found:
            raise GramSchmidtError(
                f"no best coapproximation found at step {len(out) + 1} "
                f"(violation {res.violation:.3g})", list(out), res)
        u = space.normalize(x - res.w)
        out.append(u)
        still = {i for i in relative if strongly_orthonormal_relative(space, out, i, EPS, seed)}
        if still != relative:
            bad = sorted(relative - still)
            raise GramSchmidtError(
                f"augmented set lost strong orthonormality relative to elements {bad}",
                out[:-1], res)
        if strongly_orthonormal_relative(space, out, len(out) - 1, EPS, seed):
            relative.add(len(out) - 1)
    return out


# -- S-norm -----------------------------------------------------------------


class SNormFrame:
    """A strongly orthonormal set together with its coefficient map."""

    def __init__(self, space: PNormSpace, vectors, eps: float = EPS, check: bool = True):
        vecs = [space.vector(v) for v in vectors]
        if check and not strongly_orthonormal_set(space, vecs, eps):
            raise ValueError("frame vectors are not a strongly orthonormal set")
        self.space = space
        self.basis = SubspaceBasis(space, vecs)

    @property
    def vectors(self) -> np.ndarray:
        return self.basis.vectors

    def __len__(self):
        return len(self.basis)

    def coefficients(self, u) -> np.ndarray:
        return self.basis.coefficients(u)


def s_norm(frame: SNormFrame, u) -> float:
    """Largest absolute coefficient of ``u`` in the frame."""
    return float(np.abs(frame.coefficients(u)).max())


def equivalence_constant(frame: SNormFrame) -> float:
    """Largest ``k`` with ``s_norm(u) >= k ||u||`` on the span of the frame.

    On the unit box of coefficients ``||sum a_i x_i||`` is convex, so its
    maximum sits at a vertex and ``k = 1 / max_vertex ||sum a_i x_i||``
    is exact.
    """
    return 1.0 / _box_vertex_max(frame)[0]


def _box_vertex_max(frame: SNormFrame) -> tuple[float, np.ndarray]:
    m = len(frame)
    best, corner = -1.0, None
    # a and -a give the same norm; fix the first sign
    for signs in itertools.product((1.0, -1.0), repeat=m - 1):
        a = np.r_[1.0, signs]
        v = frame.space.norm(frame.basis.combine(a))
        if v > best:
            best, corner = v, a
    return best, corner


@dataclass
class BoundReport:
    k: float
    min_ratio: float
    holds: bool
    samples: int
    worst_y: np.ndarray | None = None
    corner: np.ndarray | None = None


def relative_shift(space: PNormSpace, S, x_next) -> np.ndarray:
    """``w`` in span(S) making ``{S, (x_next - w)/||x_next - w||}`` relative to every element of S.

    Smooth spaces only: the condition is that each ``s_i`` is BJ-orthogonal
    to ``x_next - w``, a linear system in the coefficients of ``w``.
    """
    if not space.smooth():
        raise ValueError("relative_shift needs a smooth space")
    S = np.array([space.vector(s) for s in S])
    J = np.array([space.support_functional(s) for s in S])
    c = np.linalg.solve(J @ S.T, J @ space.vector(x_next))
    return c @ S


def verify_coapprox_bound(space: PNormSpace, S, x_next, w, sample_count: int = 1000,
                          seed: int = 0, eps: float = EPS) -> BoundReport:
    """Check ``||x_next - y|| >= k ||w - y||`` on sampled ``y`` in span(S).

    Preconditions (checked): S is strongly orthonormal, ``x_next`` is a unit
    vector outside span(S), and adding ``(x_next - w)/||x_next - w||`` to S
    keeps the set strongly orthonormal relative to each element of S.
    ``k`` comes from :func:`equivalence_constant`.
    """
    frame = SNormFrame(space, S, eps)
    x_next = space.vector(x_next)
    w = space.vector(w)
    if not space.is_unit(x_next):
        raise ValueError("x_next must be a unit vector")
    if frame.basis.contains(x_next):
        raise ValueError("x_next lies in span(S)")
    cw = frame.coefficients(w)
    aug = list(frame.vectors) + [space.normalize(x_next - w)]
    for i in range(len(frame)):
        if not strongly_orthonormal_relative(space, aug, i, eps, seed):
            raise ValueError(f"augmented set is not strongly orthonormal relative to element {i}")

    vmax, corner = _box_vertex_max(frame)
    k = 1.0 / vmax
    rng = np.random.default_rng(seed)
    m = len(frame)
    coeffs = np.vstack([
        np.zeros((1, m)),
        cw[None, :] + 0.1 * rng.standard_normal((sample_count // 2, m)),
        2.0 * rng.standard_normal((sample_count - sample_count // 2, m)),
    ])
    Y = coeffs @ frame.vectors
    num = space.norms(x_next[None, :] - Y)
    den = space.norms(w[None, :] - Y)
    holds = bool(np.all(num >= k * den - 1e-8))
    keep = den > 1e-12
    ratios = num[keep] / den[keep]
    j = int(np.argmin(ratios)) if len(ratios) else None
    return BoundReport(k, float(ratios[j]) if j is not None else np.inf, holds,
                       len(Y), Y[keep][j] if j is not None else None, corner)


# -- basis completion ---------------------------------------------------------


@dataclass
class BasisSearchReport:
    target: np.ndarray
    found: bool
    basis: list[np.ndarray] | None
    best_residual: float
    trials: int
    seed: int
    best_candidate: list[np.ndarray] = field(default_factory=list)


def orthogonality_residual(space: PNormSpace, vectors) -> float:
    """Sum over ordered pairs ``i != j`` of :func:`bj_defect` ``(x_i, x_j)``."""
    X = np.array(vectors, dtype=float)
    X = X / space.norms(X)[:, None]
    if space.smooth():
        D = space.support_functionals(X) @ X.T
        np.fill_diagonal(D, 0.0)
        return float(np.abs(D).sum())
    # lo[i, j], hi[i, j]: one-sided derivatives of t -> ||x_i + t x_j|| at 0
    if space.is_taxicab:
        zero = np.abs(X) <= TIE
        base = np.where(zero, 0.0, np.sign(X)) @ X.T
        spread = zero.astype(float) @ np.abs(X).T
        lo, hi = base - spread, base + spread
    else:
        active = np.abs(X) >= 1.0 - TIE
        vals = np.sign(X)[:, None, :] * X[None, :, :]
        lo = np.where(active[:, None, :], vals, np.inf).min(axis=2)
        hi = np.where(active[:, None, :], vals, -np.inf).max(axis=2)
    D = np.maximum(np.maximum(lo, -hi), 0.0)
    np.fill_diagonal(D, 0.0)
    return float(D.sum())


def complete_strongly_orthonormal_basis(space: PNormSpace, x, trials: int = 20, seed: int = 0,
                                        eps: float = EPS, max_evals: int = 20_000) -> BasisSearchReport:
    """Look for unit ``x_2..x_n`` making ``{x, x_2, ..., x_n}`` strongly orthonormal.

    The pairwise orthogonality residual is minimized by compass search over
    the free vectors (normalized on evaluation) from ``trials`` seeded random
    starts; smooth spaces then polish with Levenberg-Marquardt. For p = 2
    the Euclidean orthogonal complement is tried first, and for p in
    {1, inf} random extreme points of the unit ball are tried before the
    Gaussian starts. A failed search is
    evidence, not proof, that no such basis exists.
    """
    n = space.dim
    if n > MAX_SEARCH_DIM:
        raise ValueError(f"basis search is limited to dimension <= {MAX_SEARCH_DIM}")
    x = space.vector(x)
    if not space.is_unit(x):
        raise ValueError("target must be a unit vector")

    def residual(free):
        norms = space.norms(free)
        if np.any(norms == 0.0):
            return np.inf
        return orthogonality_residual(space, np.vstack([x, free / norms[:, None]]))

    starts = []
    if space.p == 2.0:
        q, _ = np.linalg.qr(np.column_stack([x, np.eye(n)]))
        starts.append(q[:, 1:n].T.copy())
    rng = np.random.default_rng(seed)
    best_v, best_rows = np.inf, None
    used = 0
    if not space.strictly_convex():
        # members of a strongly orthonormal basis are extreme points, so try those exactly
        combos, exhaustive = _extreme_combinations(space, rng, x, EXTREME_BUDGET)
        for rows in combos:
            v = residual(rows)
            basis = [x] + list(rows)
            if v <= eps and _is_basis(basis) and _pairwise_strong(space, basis, eps):
                used += 1
                if strongly_orthonormal_set(space, basis, eps, seed):
                    return BasisSearchReport(x, True, basis, float(v), used, seed, basis)
            if v < best_v:
                best_v, best_rows = v, rows
        if exhaustive:
            # sign flips of members preserve the property, so every candidate was seen
            candidate = [x] + list(best_rows) if best_rows is not None else []
            return BasisSearchReport(x, False, None, float(best_v), used, seed, candidate)
    starts += [rng.standard_normal((n - 1, n)) for _ in range(trials)]

    for start in starts:
        used += 1
        v, free = compass_search(residual, start, target=eps, max_evals=max_evals)
        if space.smooth() and v > eps:
            v, free = _polish(space, x, free, v, residual)
        if v < best_v:
            best_v, best_rows = v, free / space.norms(free)[:, None]
        if v <= eps:
            basis = [x] + list(free / space.norms(free)[:, None])
            if (_is_basis(basis) and _pairwise_strong(space, basis, eps)
                    and strongly_orthonormal_set(space, basis, eps, seed)):
                return BasisSearchReport(x, True, basis, float(v), used, seed, basis)
    candidate = [x] + list(best_rows) if best_rows is not None else []
    return BasisSearchReport(x, False, None, float(best_v), used, seed, candidate)


def _pairwise_strong(space: PNormSpace, vectors, eps: float) -> bool:
    return all(strongly_bj_orthogonal(space, vectors[i], vectors[j], eps)
               for i, j in itertools.permutations(range(len(vectors)), 2))


def _extreme_combinations(space: PNormSpace, rng: np.random.Generator, x, budget: int):
    """Up to ``budget`` sets of ``n - 1`` extreme points, distinct up to sign, in seeded order.

    Returns the generator and whether it covers every such set.
    """
    n = space.dim
    if space.is_max_norm:
        # sign vectors up to overall sign
        pool = np.array([(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=n - 1)])
    else:
        pool = np.eye(n)
    pool = pool[[not (np.allclose(r, x) or np.allclose(r, -x)) for r in pool]]
    combos = list(itertools.combinations(range(len(pool)), n - 1))
    order = rng.permutation(len(combos))[:budget]
    return (pool[list(combos[k])] for k in order), len(order) == len(combos)


def _is_basis(vectors) -> bool:
    M = np.array(vectors)
    return np.linalg.matrix_rank(M) == len(M) == M.shape[1]


def _polish(space: PNormSpace, x, free, v0, residual):
    n = space.dim

    def pairs(flat):
        rows = flat.reshape(n - 1, n)
        X = np.vstack([x, rows / space.norms(rows)[:, None]])
        D = space.support_functionals(X) @ X.T
        return D[~np.eye(n, dtype=bool)]

    sol = least_squares(pairs, free.ravel(), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    cand = sol.x.reshape(n - 1, n)
    if not np.all(np.isfinite(cand)) or np.any(space.norms(cand) == 0):
        return v0, free
    v = residual(cand)
    return (v, cand) if v < v0 else (v0, free)


def mutual_orthogonal_partner(space: PNormSpace, x, grid: int = 64) -> np.ndarray:
    """Unit ``y`` with ``x`` BJ-orthogonal to ``y`` and ``y`` BJ-orthogonal to ``x``.

    Smooth spaces of dimension >= 3: ``y`` runs over a circle in the kernel
    of the norm gradient at ``x``; the reverse condition is odd along that
    circle, so it changes sign and a root is bracketed.
    """
    if not space.smooth() or space.dim < 3:
        raise ValueError("mutual_orthogonal_partner needs a smooth space of dimension >= 3")
    x = space.normalize(x)
    J = space.support_functional(x)
    _, _, vt = np.linalg.svd(J[None, :])
    a, b = vt[1], vt[2]

    def on_circle(theta):
        return space.normalize(np.cos(theta) * a + np.sin(theta) * b)

    def reverse(theta):
        return float(space.support_functional(on_circle(theta)) @ x)

    thetas = np.linspace(0.0, np.pi, grid + 1)
    vals = [reverse(t) for t in thetas]
    for t0, t1, v0, v1 in zip(thetas, thetas[1:], vals, vals[1:]):
        if v0 == 0.0:
            return on_circle(t0)
        if v0 * v1 < 0:
            y = on_circle(brentq(reverse, t0, t1, xtol=1e-15))
            assert bj_orthogonal(space, x, y) and bj_orthogonal(space, y, x)
            return y
    return on_circle(thetas[-1])
