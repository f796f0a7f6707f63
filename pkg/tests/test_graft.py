"""Grafting: level thresholds, vertex agreement, certificate constants."""

import math
import random
from fractions import Fraction

import pytest

from holderlevels.bernoulli import BernoulliWitnessFn
from holderlevels.exact import midpoint
from holderlevels.graft import (
    GRAFT_BUDGET,
    NotStandardError,
    graft,
    graft_certificate_constant,
    min_graft_level,
)
from holderlevels.paf import affine_from_corners, random_standard_paf
from holderlevels.triangles import ROOT_VERTICES, triangle_vertices


def test_min_graft_level_example():
    # M = 2/sqrt(3), alpha = 1/2: smallest n' with M 2**(-n'/2) < 1/100 is 14
    M = 2 / math.sqrt(3)
    n = min_graft_level(M, 0.5)
    assert n == 14
    assert M * 2 ** (-n / 2) < 0.01 <= M * 2 ** (-(n - 1) / 2)


def test_certificate_constant_below_budget():
    # whenever the step threshold holds the closed form stays below 1/8
    for alpha in (0.1, 0.5, 0.9):
        for M in (0.05, 1.0, 40.0):
            n = min_graft_level(M, alpha)
            assert graft_certificate_constant(M, alpha, n) < float(GRAFT_BUDGET)


def test_graft_rejects_small_level():
    g = affine_from_corners(Fraction(0), Fraction(0), Fraction(1)).standardize()
    w = BernoulliWitnessFn.for_alpha(0.5)
    with pytest.raises(ValueError, match="smallest admissible level is"):
        graft(g, 5, w)


def test_graft_rejects_nonstandard():
    g = affine_from_corners(Fraction(0), Fraction(1), Fraction(2)).refine(1)
    w = BernoulliWitnessFn.for_alpha(0.5)
    with pytest.raises(NotStandardError):
        graft(g, 20, w)


def test_constant_base_grafts_to_constant():
    g = affine_from_corners(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)).standardize()
    gf = graft(g, 4, BernoulliWitnessFn(Fraction(3, 4)))
    pts = [ROOT_VERTICES[0], midpoint(ROOT_VERTICES[0], ROOT_VERTICES[2]),
           triangle_vertices("0123"[:0] + "0" * 4)[1]]
    assert all(gf.eval(p) == Fraction(1, 2) for p in pts)


def test_graft_agrees_with_base_on_vertices():
    g = affine_from_corners(Fraction(0), Fraction(0), Fraction(1)).standardize()
    w = BernoulliWitnessFn.for_alpha(0.5)
    n = min_graft_level(g.lipschitz(), 0.5)
    gf = graft(g, n, w)
    rng = random.Random(5)
    for _ in range(25):
        word = "".join(str(rng.randrange(3)) for _ in range(n))
        base_vals = g.corner_values(word)
        for corner, p in enumerate(triangle_vertices(word)):
            assert gf.value_in_triangle(word, p) == base_vals[corner]


def test_apex_value_is_base_value():
    # phi is exactly 1 at the apex image, so the graft returns g(v3)
    g = random_standard_paf(4, 2, 0.5, 0.1, check=False)
    n = max(min_graft_level(g.lipschitz(), 0.5), g.level)
    gf = graft(g, n, BernoulliWitnessFn.for_alpha(0.5))
    word = "1" * n
    labels = gf.labels_for(word)
    apex = triangle_vertices(word)[labels[2]]
    assert gf.value_in_triangle(word, apex) == g.corner_values(word)[labels[2]]


def test_interior_value_between_base_corners():
    g = random_standard_paf(6, 2, 0.5, 0.1, check=False)
    n = max(min_graft_level(g.lipschitz(), 0.5), g.level)
    gf = graft(g, n, BernoulliWitnessFn.for_alpha(0.5))
    word = "0" * n
    vs = triangle_vertices(word)
    x = midpoint(midpoint(vs[0], vs[1]), vs[2])
    vals = g.corner_values(word)
    val = float(gf.value_in_triangle(word, x))
    assert min(map(float, vals)) - 1e-12 <= val <= max(map(float, vals)) + 1e-12


def test_grafted_holder_ratio_within_constant():
    # empirical per-triangle ratios stay under the closed-form constant
    g = random_standard_paf(12, 2, 0.5, 0.1, check=False)
    n = max(min_graft_level(g.lipschitz(), 0.5), g.level)
    gf = graft(g, n, BernoulliWitnessFn.for_alpha(0.5))
    rng = random.Random(1)
    word = "2" * n
    vs = triangle_vertices(word)
    pts = list(vs)
    for _ in range(8):
        i, j = rng.randrange(3), rng.randrange(3)
        pts.append(midpoint(pts[i], pts[j]))
    vals = [float(gf.value_in_triangle(word, p)) for p in pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dist = math.sqrt(float(pts[i].dist_sq(pts[j])))
            if dist == 0:
                continue
            ratio = abs(vals[i] - vals[j]) / dist**0.5
            assert ratio <= gf.certificate_constant * (1 + 1e-9)
