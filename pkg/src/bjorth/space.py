"""Finite-dimensional real l_p spaces.

Vectors are plain 1-D float arrays. A :class:`PNormSpace` owns everything
that depends on the exponent: norm evaluation, one-sided directional
derivatives of the norm, unit-sphere sampling and extreme-point tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf

#: Single strictness tolerance shared by every decision in the package.
EPS = 1e-9

#: Relative tolerance for "this coordinate attains the max" / "is zero".
TIE = 1e-12


def as_vector(v, dim: int | None = None) -> np.ndarray:
    """Coerce ``v`` to a finite 1-D float array, optionally of length ``dim``."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("vector must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite coordinates")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    return arr


def parse_p(value) -> float:
    """Parse an exponent; accepts numbers and the strings ``inf``/``infinity``."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "oo"):
            return INF
        value = float(value)
    p = float(value)
    if math.isnan(p):
        raise ValueError("p is NaN")
    if p < 1.0 - 1e-12:
        raise ValueError(f"p must be >= 1, got {p}")
    if abs(p - 1.0) <= 1e-12:
        return 1.0
    return p


def format_p(p: float) -> str:
    return "inf" if p == INF else f"{p:.12g}"


@dataclass(frozen=True)
class PNormSpace:
    """The space (R^n, ||.||_p), with ``p`` in [1, inf] and ``n >= 2``."""

    dim: int
    p: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", parse_p(self.p))

    def __repr__(self):
        return f"PNormSpace(dim={self.dim}, p={format_p(self.p)})"

    @property
    def is_max_norm(self) -> bool:
        return self.p == INF

    @property
    def is_taxicab(self) -> bool:
        return self.p == 1.0

    def smooth(self) -> bool:
        return 1.0 < self.p < INF

    def strictly_convex(self) -> bool:
        return 1.0 < self.p < INF

    def vector(self, v) -> np.ndarray:
        return as_vector(v, self.dim)

    # -- norm -----------------------------------------------------------

    def norm(self, v) -> float:
        v = self.vector(v)
        return float(_norm_rows(v[None, :], self.p)[0])

    def norms(self, rows) -> np.ndarray:
        """Row-wise norms of a 2-D array."""
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != self.dim:
            raise ValueError(f"expected an array of shape (m, {self.dim})")
        return _norm_rows(rows, self.p)

    def normalize(self, v) -> np.ndarray:
        v = self.vector(v)
        nv = self.norm(v)
        if nv == 0.0:
            raise ValueError("cannot normalize zero")
        return v / nv

    def is_unit(self, v, tol: float = EPS) -> bool:
        return abs(self.norm(v) - 1.0) <= tol

    # -- derivatives ----------------------------------------------------

    def support_functional(self, x) -> np.ndarray:
        """Gradient of the norm at ``x`` (smooth spaces only).

        ``support_functional(x) @ y`` is the derivative at 0 of
        ``t -> ||x + t y||``.
        """
        if not self.smooth():
            raise ValueError(f"norm is not differentiable everywhere for p={format_p(self.p)}")
        x = self.vector(x)
        nx = self.norm(x)
        if nx == 0.0:
            raise ValueError("derivative of the norm at the origin is undefined")
        return _dual_rows((x / nx)[None, :], self.p)[0]

    def support_functionals(self, rows) -> np.ndarray:
        """Row-wise :meth:`support_functional` of a 2-D array of nonzero rows."""
        if not self.smooth():
            raise ValueError(f"norm is not differentiable everywhere for p={format_p(self.p)}")
        rows = np.asarray(rows, dtype=float)
        nr = self.norms(rows)
        if np.any(nr == 0.0):
            raise ValueError("derivative of the norm at the origin is undefined")
        return _dual_rows(rows / nr[:, None], self.p)

    def norm_deriv_one_sided(self, x, y, side: str = "plus") -> float:
        """One-sided derivative at 0 of the convex map ``t -> ||x + t y||``.

        Parameters
        ----------
        x, y : array_like
            Base point (nonzero) and direction.
        side : {"plus", "minus"}
            Right or left derivative.
        """
        lo, hi = self.norm_deriv_bounds(x, y)
        if side == "plus":
            return hi
        if side == "minus":
            return lo
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")

    def norm_deriv_bounds(self, x, y) -> tuple[float, float]:
        """Both one-sided derivatives ``(minus, plus)`` of ``t -> ||x + t y||`` at 0."""
        x = self.vector(x)
        y = self.vector(y)
        nx = self.norm(x)
        if nx == 0.0:
            raise ValueError("derivative of the norm at the origin is undefined")
        u = x / nx
        if self.smooth():
            d = float(_dual_rows(u[None, :], self.p)[0] @ y)
            return d, d
        if self.is_taxicab:
            zero = np.abs(u) <= TIE
            base = float(np.sum(np.sign(u[~zero]) * y[~zero]))
            spread = float(np.sum(np.abs(y[zero])))
            return base - spread, base + spread
        active = np.abs(u) >= 1.0 - TIE
        vals = np.sign(u[active]) * y[active]
        return float(vals.min()), float(vals.max())

    # -- sampling / geometry ---------------------------------------------

    def sample_unit_sphere(self, seed: int, count: int) -> list[np.ndarray]:
        """``count`` unit vectors from normalized Gaussian directions."""
        if count < 1:
            raise ValueError("count must be positive")
        rows = gaussian_directions(np.random.default_rng(seed), count, self.dim)
        rows = rows / self.norms(rows)[:, None]
        return list(rows)

    def is_extreme_point(self, v, tol: float = EPS) -> bool:
        v = self.vector(v)
        if not self.is_unit(v, tol):
            raise ValueError("extreme-point test needs a unit vector")
        if self.strictly_convex():
            return True
        a = np.abs(v)
        if self.is_max_norm:
            return bool(np.all(a >= 1.0 - tol))
        return bool(np.sum(a > tol) == 1)


def gaussian_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Rotation-invariant nonzero directions, one per row."""
    rows = rng.standard_normal((count, dim))
    # an all-zero draw is astronomically unlikely but would break normalization
    zero = ~np.any(rows, axis=1)
    rows[zero, 0] = 1.0
    return rows


def _norm_rows(rows: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(rows)
    m = a.max(axis=1)
    if p == INF:
        return m
    if p == 1.0:
        return a.sum(axis=1)
    return _scaled(a, m, p)


def _scaled(a: np.ndarray, m: np.ndarray, p: float) -> np.ndarray:
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe[:, None]) ** p, axis=1)
    return np.where(m > 0, safe * s ** (1.0 / p), 0.0)


def _dual_rows(units: np.ndarray, p: float) -> np.ndarray:
    """Gradient of the norm at unit rows, for 1 < p < inf."""
    return np.abs(units) ** (p - 1.0) * np.sign(units)
