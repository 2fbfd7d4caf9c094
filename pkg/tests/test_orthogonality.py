import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bjorth.orthogonality import (
    argmin_interval,
    bj_defect,
    bj_direction_2d,
    bj_orthogonal,
    line_min_values,
    orth_report,
    skew_pair,
    strongly_bj_orthogonal,
    strongly_orthonormal_relative,
    strongly_orthonormal_set,
    symmetry_defect,
)
from bjorth.space import INF, PNormSpace
from oracles import (
    GRID,
    bj_by_grid,
    skew_defect_closed_form,
    line_values,
    lp_norm,
    orthogonal_pair,
    scalar_min,
    strong_by_grid,
)

ALL_P = [1.0, 1.5, 2.0, 3.0, INF]
C = 2 ** (1 / 3)
A = np.array([1, 1, 0]) / C
B = np.array([1, -1, C]) / 4 ** (1 / 3)
D = np.array([1, -1, -C]) / 4 ** (1 / 3)
HADAMARD = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]], float)

seeds = st.integers(0, 2 ** 32 - 1)


# -- worked values ----------------------------------------------------------------


def test_bj_orthogonal_examples():
    assert bj_orthogonal(PNormSpace(4, INF), [1, 1, 1, 1], [1, -1, -1, 1])
    assert not bj_orthogonal(PNormSpace(2, 2), [1, 0], [1, 1])
    x = np.array([1, 2]) / 9 ** (1 / 3)
    y = np.array([-4, 1]) / 65 ** (1 / 3)
    assert bj_orthogonal(PNormSpace(2, 3), x, y)


def test_argmin_interval_examples():
    iv = argmin_interval(PNormSpace(2, INF), [1, 0], [0, 1])
    assert (iv.lo, iv.hi) == (-1.0, 1.0)
    iv = argmin_interval(PNormSpace(2, 2), [1, 0], [0, 1])
    assert abs(iv.lo) <= 1e-10 and abs(iv.hi) <= 1e-10
    iv = argmin_interval(PNormSpace(2, 1), [1, 0], [1, 1])
    assert (iv.lo, iv.hi) == (-1.0, 0.0)


def test_argmin_interval_rejects_zero_inputs():
    with pytest.raises(ValueError, match="direction is zero"):
        argmin_interval(PNormSpace(2, 3), [1, 0], [0, 0])
    with pytest.raises(ValueError, match="base point is zero"):
        argmin_interval(PNormSpace(2, 3), [0, 0], [1, 0])


def test_strong_orthogonality_examples():
    assert not strongly_bj_orthogonal(PNormSpace(2, INF), [1, 0], [0, 1])
    assert bj_orthogonal(PNormSpace(2, INF), [1, 0], [0, 1])
    assert strongly_bj_orthogonal(PNormSpace(3, 3), A, D)
    assert strongly_bj_orthogonal(PNormSpace(2, 2), [1, 0], [0, 1])


def test_orth_report_bundles_the_decisions():
    rep = orth_report(PNormSpace(2, INF), [1, 0], [0, 1])
    assert rep.bj and not rep.strong
    assert (rep.deriv_minus, rep.deriv_plus) == (0.0, 0.0)
    assert rep.interval.width == 2.0


def test_bj_direction_examples():
    x = np.array([1, 2]) / 9 ** (1 / 3)
    np.testing.assert_allclose(bj_direction_2d(PNormSpace(2, 3), x),
                               np.array([-4, 1]) / 65 ** (1 / 3), atol=1e-15)
    np.testing.assert_allclose(bj_direction_2d(PNormSpace(2, 2), [0.6, 0.8]), [-0.8, 0.6], atol=1e-15)
    np.testing.assert_allclose(bj_direction_2d(PNormSpace(2, 3), [1, 0]), [0, 1], atol=0)


def test_bj_direction_preconditions():
    with pytest.raises(ValueError):
        bj_direction_2d(PNormSpace(2, 3), [1, 1])
    with pytest.raises(ValueError):
        bj_direction_2d(PNormSpace(3, 3), [1, 0, 0])
    with pytest.raises(ValueError):
        bj_direction_2d(PNormSpace(2, INF), [1, 0])


def test_symmetry_defect_examples():
    assert symmetry_defect(PNormSpace(2, 2), [1, 0], [0, 1]) == 0
    assert symmetry_defect(PNormSpace(2, 3), [1, 0], [0, 1]) == 0
    x = np.array([1, 2]) / 9 ** (1 / 3)
    y = np.array([-4, 1]) / 65 ** (1 / 3)
    d = symmetry_defect(PNormSpace(2, 3), x, y)
    assert d == pytest.approx(14 / (65 ** (2 / 3) * 9 ** (1 / 3)), abs=1e-12)
    assert d == pytest.approx(0.41633056393, abs=1e-10)


def test_symmetry_defect_precondition():
    with pytest.raises(ValueError, match="x not BJ-orthogonal to y"):
        symmetry_defect(PNormSpace(2, 2), [1, 0], [1, 1])


def test_skew_pair_is_the_closed_form_point():
    x, y = skew_pair(3, 2)
    np.testing.assert_allclose(x, np.array([1, 2]) / 9 ** (1 / 3), atol=1e-15)
    np.testing.assert_allclose(y, np.array([-4, 1]) / 65 ** (1 / 3), atol=1e-15)
    with pytest.raises(ValueError):
        skew_pair(1, 2)


# -- sets ------------------------------------------------------------------------------


def test_hadamard_rows_are_strongly_orthonormal_in_max_norm():
    assert strongly_orthonormal_set(PNormSpace(4, INF), HADAMARD)


def test_axis_pair_is_not_strongly_orthonormal_in_max_norm():
    space = PNormSpace(2, INF)
    assert not strongly_orthonormal_relative(space, [[1, 0], [0, 1]], 0)
    assert not strongly_orthonormal_set(space, [[1, 0], [0, 1]])


def test_cube_root_triple_is_strongly_orthonormal():
    assert strongly_orthonormal_set(PNormSpace(3, 3), [A, B, D])


def test_cube_root_triple_is_pairwise_orthogonal_both_ways():
    space = PNormSpace(3, 3)
    for u in (A, B, D):
        for v in (A, B, D):
            if u is not v:
                assert bj_defect(space, u, v) < 1e-15


def test_relative_search_detects_a_hidden_two_dimensional_flat():
    # every pair is strongly orthogonal, but x0 + s(x1 + x2) stays at norm 1 for small s < 0
    space = PNormSpace(3, INF)
    vecs = [[1, 1, 1], [1, 1, -1], [1, -1, 1]]
    assert all(strongly_bj_orthogonal(space, u, v) for u in vecs for v in vecs if u != v)
    assert not strongly_orthonormal_relative(space, vecs, 0)
    assert not line_values([1, 1, 1], [-2, 0, 0], INF, np.array([0.01])).item() > 1


def test_set_inputs_are_validated():
    space = PNormSpace(2, 2)
    with pytest.raises(ValueError, match="dependent"):
        strongly_orthonormal_set(space, [[1, 0], [-1, 0]])
    with pytest.raises(ValueError, match="unit"):
        strongly_orthonormal_set(space, [[2, 0], [0, 1]])
    with pytest.raises(IndexError):
        strongly_orthonormal_relative(space, [[1, 0], [0, 1]], 2)


@given(seeds, st.integers(2, 5))
def test_euclidean_orthonormal_bases_are_strongly_orthonormal(seed, n):
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    assert strongly_orthonormal_set(PNormSpace(n, 2), q.T)


# -- oracle agreement ----------------------------------------------------------------


@pytest.mark.parametrize("p", ALL_P)
def test_decisions_match_grid_on_random_and_constructed_pairs(p):
    rng = np.random.default_rng(11)
    space = PNormSpace(3, p)
    for i in range(60):
        if i % 3 == 0:
            x = rng.standard_normal(3)
            y = rng.standard_normal(3)
        else:
            x, y = orthogonal_pair(p, 3, rng, weak=(i % 3 == 2))
            if not np.any(y):
                continue
        x = x / lp_norm(x, p)
        y = y / lp_norm(y, p)
        assert bj_orthogonal(space, x, y) == bj_by_grid(x, y, p)
        assert strongly_bj_orthogonal(space, x, y) == strong_by_grid(x, y, p)


@pytest.mark.parametrize("p", ALL_P)
def test_grid_disagreements_are_sub_margin_drops(p):
    # a grid with margin 1e-6 calls x orthogonal to y when the true drop below
    # ||x|| is positive but under the margin; the exact decision is then "no"
    rng = np.random.default_rng(606)
    space = PNormSpace(3, p)
    for _ in range(500):
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        x, y = x / lp_norm(x, p), y / lp_norm(y, p)
        drop = lp_norm(x, p) - line_values(x, y, p).min()
        if bj_orthogonal(space, x, y) != bj_by_grid(x, y, p):
            assert 0 < drop <= 1e-6
            iv = argmin_interval(space, x, y)
            assert min(abs(iv.lo), abs(iv.hi)) > 1e-9
        # a margin below the grid's own drops removes the ambiguity
        assert bj_orthogonal(space, x, y) == bj_by_grid(x, y, p, margin=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 6.0])
def test_smooth_argmin_matches_golden_section(p):
    rng = np.random.default_rng(5)
    space = PNormSpace(4, p)
    for _ in range(20):
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        t = scalar_min(lambda s: lp_norm(x + s * y, p), -20, 20, 1e-2)
        iv = argmin_interval(space, x, y)
        assert iv.lo == iv.hi
        assert iv.lo == pytest.approx(t, abs=1e-6)


@pytest.mark.parametrize("p", [1.0, INF])
def test_piecewise_argmin_interval_matches_grid_flat_set(p):
    rng = np.random.default_rng(6)
    space = PNormSpace(3, p)
    for _ in range(40):
        x = rng.integers(-4, 5, size=3) / 4.0
        y = rng.integers(-4, 5, size=3) / 4.0
        if not np.any(x) or not np.any(y):
            continue
        iv = argmin_interval(space, x, y)
        level = lp_norm(x + iv.lo * y, p)
        assert lp_norm(x + iv.hi * y, p) == pytest.approx(level, abs=1e-12)
        vals = line_values(x, y, p)
        assert vals.min() >= level - 1e-12
        flat = GRID[vals <= level + 1e-12]
        assert np.all((flat >= iv.lo - 1e-12) & (flat <= iv.hi + 1e-12))
        if iv.width >= 2e-3:
            assert flat.min() <= iv.lo + 1e-3 and flat.max() >= iv.hi - 1e-3


@pytest.mark.parametrize("p", ALL_P)
def test_line_min_values_match_grid(p):
    rng = np.random.default_rng(8)
    space = PNormSpace(3, p)
    H = rng.standard_normal((25, 3))
    r = rng.standard_normal(3)
    got = line_min_values(space, H, r)
    for h, g in zip(H, got):
        t = scalar_min(lambda s: lp_norm(h + s * r, p), -100, 100, 1e-2)
        assert g == pytest.approx(lp_norm(h + t * r, p), abs=1e-9)


# -- properties ------------------------------------------------------------------------


@given(st.sampled_from(ALL_P), seeds, st.floats(0.1, 10), st.floats(0.1, 10), st.booleans(), st.booleans())
def test_bj_orthogonality_is_homogeneous(p, seed, a, b, neg_a, neg_b):
    rng = np.random.default_rng(seed)
    x, y = orthogonal_pair(p, 3, rng) if seed % 2 else (rng.standard_normal(3), rng.standard_normal(3))
    space = PNormSpace(3, p)
    a = -a if neg_a else a
    b = -b if neg_b else b
    assert bj_orthogonal(space, x, y) == bj_orthogonal(space, a * x, b * y)


@given(st.floats(1.05, 8), seeds)
def test_strict_convexity_makes_bj_and_strong_coincide(p, seed):
    rng = np.random.default_rng(seed)
    space = PNormSpace(3, p)
    x, y = orthogonal_pair(p, 3, rng) if seed % 2 else (rng.standard_normal(3), rng.standard_normal(3))
    assume(np.linalg.norm(y) > 1e-6)
    assert bj_orthogonal(space, x, y) == strongly_bj_orthogonal(space, x, y)


@given(st.floats(1.05, 8), st.floats(1.01, 6))
def test_skew_point_defect_vanishes_only_for_euclidean(p, k):
    space = PNormSpace(2, p)
    x, y = skew_pair(p, k)
    d = symmetry_defect(space, x, y)
    assert d == pytest.approx(skew_defect_closed_form(p, k), abs=1e-12)
    if abs(p - 2) > 1e-3:
        assert (d <= 1e-9) == (abs(k ** ((p - 1) ** 2) - k) <= 1e-9 * k)
    assert symmetry_defect(PNormSpace(2, 2), *skew_pair(2, k)) <= 1e-9


@pytest.mark.parametrize("p", [1.5, 2.5, 3.0, 4.0])
@pytest.mark.parametrize("k", [1.5, 2.0, 3.0])
def test_skew_point_defect_positive_off_euclidean(p, k):
    assert symmetry_defect(PNormSpace(2, p), *skew_pair(p, k)) > 1e-9


@given(st.floats(1.05, 8), st.floats(0, 2 * math.pi))
def test_bj_direction_is_orthogonal_to_its_input(p, theta):
    space = PNormSpace(2, p)
    x = space.normalize([math.cos(theta), math.sin(theta)])
    y = bj_direction_2d(space, x)
    assert space.is_unit(y, 1e-12)
    assert bj_orthogonal(space, x, y, 1e-12)
