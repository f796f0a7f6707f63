"""Level-set approximations, conductivity, conservation and the measure."""

import json
from fractions import Fraction

import pytest

from holderlevels.levelset import (
    ApproxLevelSet,
    LevelCollisionError,
    LevelSetTree,
    LevelValue,
    approx_level_set,
    conductivity,
    conductivity_measure,
    conservation_check,
    extreme_labeling,
    kappa_exponent,
    level_set_to_json,
    well_conducting_census,
)
from holderlevels.paf import affine_from_corners, constant_fn, random_standard_paf

F = Fraction


@pytest.fixture
def ramp():
    """The affine function with corner values (0, 0, 1) at level 1."""
    return affine_from_corners(F(0), F(0), F(1), level=1)


def test_extreme_labeling_examples():
    lab = extreme_labeling((F(0), F(1), F(2)))
    assert (lab.vmin, lab.vmax) == (0, 2)
    assert not lab.low_tie_collapsed and not lab.high_tie_collapsed
    tie = extreme_labeling((F(0), F(0), F(1)))
    assert (tie.vmin, tie.vmax) == (0, 2) and tie.low_tie_collapsed
    const = extreme_labeling((F(5), F(5), F(5)))
    assert const.is_constant and const.vmin is None


def test_level_value_collision():
    fn = affine_from_corners(F(0), F(0), F(1), level=1)
    with pytest.raises(LevelCollisionError):
        LevelValue.checked(F(1, 2), fn)
    assert LevelValue.checked(F(1, 3), fn).r == F(1, 3)


def test_constant_function_empty_level_set(ramp):
    c = constant_fn(F(2), level=1)
    ls = approx_level_set(c, F(1, 3), 2, 1)
    assert ls.members == {}


def test_membership_examples(ramp):
    ls = approx_level_set(ramp, F(1, 3), 1, 1)
    assert set(ls.members) == {"0", "1"}
    ls2 = approx_level_set(ramp, F(2, 3), 1, 1)
    assert set(ls2.members) == {"2"}


def test_full_membership_matches_hull_condition(ramp):
    ls = approx_level_set(ramp, F(1, 3), 2, 1, method="full")
    for word in ls.members:
        vals = ramp.corner_values(word)
        assert min(vals) < F(1, 3) < max(vals)


def test_membership_against_geometric_oracle_l2(ramp):
    # the ramp is 2/sqrt(3) times the height, so corner values can be
    # computed straight from vertex coordinates, independently of the
    # value-table averaging the level-set walk uses
    from holderlevels.triangles import subdivision_addresses, triangle_vertices

    r = F(1, 3)
    expected = {}
    for word in subdivision_addresses(1, 2):
        heights = [v.y.sqrt3_coefficient() * 2 for v in triangle_vertices(word)]
        if min(heights) < r < max(heights):
            # the root's designated extremes sit at corners 0 and 2
            expected[word] = 0 if word in ("00", "22") else 1
    ls = approx_level_set(ramp, r, 1, 2)
    assert ls.members == expected


def test_conductivity_examples(ramp):
    assert conductivity(ramp, F(1, 3), "") == 1
    assert conductivity(ramp, F(1, 3), "0") == 1       # designated low corner
    assert conductivity(ramp, F(1, 3), "1") == F(1, 2)  # collapsed tie halves
    with pytest.raises(ValueError):
        conductivity(ramp, F(1, 3), "2")  # not a member for this level


def test_kappa_two_nonextreme_steps():
    f = affine_from_corners(F(0), F(1), F(2), level=2)
    # corner 1 is never extreme for this ramp, so two middle steps halve twice
    assert kappa_exponent(f, "11") == 2
    assert conductivity(f, F(9, 8) + F(1, 3 * 2**10), "11") == F(1, 4)


def test_kappa_rejects_bad_words():
    f = affine_from_corners(F(0), F(1), F(2), level=2)
    with pytest.raises(ValueError):
        kappa_exponent(f, "012", l=2)  # length not a multiple of l
    # any length-2 word is a boundary word at l=2
    assert kappa_exponent(f, "01", l=2) in (0, 1)


def test_conservation_example(ramp):
    res = conservation_check(ramp, F(1, 3), "", 1)
    assert res.lhs == F(3, 2) and res.rhs == 1 and res.passed


def test_conservation_equality_on_extreme_chain(ramp):
    # r near the maximum: the single descendant chain through the apex
    # inherits conductivity, so the sum equals it at every depth
    r = F(9, 10)
    for k in (1, 2, 3):
        res = conservation_check(ramp, r, "", k)
        assert res.lhs == res.rhs == 1


def test_measure_examples(ramp):
    mu = conductivity_measure(ramp, F(1, 3), 1)
    assert mu == {"0": F(2, 3), "1": F(1, 3)}
    chain = conductivity_measure(ramp, F(9, 10), 3)
    assert chain == {"222": F(1)}


def test_measure_normalization_and_domination(small_corpus):
    for fn, l, alpha, depth, pairs in small_corpus:
        for r, tree in pairs:
            tree.fill_measure(depth)
            for level in range(1, depth + 1):
                nodes = tree.nodes_at(level)
                assert sum(n.mu for n in nodes) == 1
                assert all(n.mu <= n.kappa for n in nodes)


def test_conservation_property(small_corpus):
    for fn, l, alpha, depth, pairs in small_corpus:
        for r, tree in pairs:
            for level in range(depth):
                for node in tree.nodes_at(level):
                    for k in range(1, min(3, depth - level) + 1):
                        res = tree.conservation(node.word, k)
                        assert res.passed, (node.word, k, res)


def test_nesting_every_member_has_member_child(small_corpus):
    for fn, l, alpha, depth, pairs in small_corpus:
        for r, tree in pairs:
            for level in range(depth):
                for node in tree.nodes_at(level):
                    assert node.children, (node.word, float(r))


def test_level_set_nonempty_at_all_depths(small_corpus):
    for fn, l, alpha, depth, pairs in small_corpus:
        for r, tree in pairs:
            assert all(tree.nodes_at(level) for level in range(depth + 1))


def test_monotone_shrink_at_affine_scale():
    # once triangles sit inside one affine piece, hulls nest, so every
    # member's parent is a member
    fn = random_standard_paf(3, 2, 0.5, 0.9, check=False)
    root = fn.corner_values("")
    r = min(root) + (max(root) - min(root)) * F(1, 3)
    sets = {n: approx_level_set(fn, r, n, 1, method="full") for n in (2, 3, 4, 5)}
    for n in (2, 3, 4):
        parents = set(sets[n].members)
        for word in sets[n + 1].members:
            assert word[:-1] in parents


def test_descendants_subset_of_full(small_corpus):
    fn, l, alpha, depth, pairs = small_corpus[0]
    r, tree = pairs[0]
    n = min(depth, 3)
    desc = approx_level_set(fn, r, n, l, tree=tree)
    full = approx_level_set(fn, r, n, l, method="full")
    assert set(desc.members) <= set(full.members)
    for w, e in desc.members.items():
        assert full.members[w] == e


def test_census_small_cases(ramp):
    res = well_conducting_census(ramp, None, 0, 1, F(1, 2), alpha=1.0)
    assert res.count == 1 and res.binomial_bound >= 1 and res.passed
    with pytest.raises(ValueError):
        well_conducting_census(ramp, None, 3, 1, F(1, 2), alpha=1.0)


def test_census_matches_direct_enumeration():
    fn = random_standard_paf(9, 3, 0.5, 0.9, check=False)
    from holderlevels.triangles import subdivision_addresses

    for n, l in ((4, 1), (2, 2)):
        d1 = F(1, 2)
        res = well_conducting_census(fn, None, n, l, d1, alpha=0.5)
        threshold = n * d1
        direct = sum(
            1 for w in subdivision_addresses(n, l)
            if kappa_exponent(fn, w, l) <= threshold
        )
        assert res.count == direct
        assert res.passed


def test_census_requires_integer_exponent(ramp):
    with pytest.raises(ValueError):
        well_conducting_census(ramp, None, 3, 1, F(1, 2), alpha=1.0)
    res = well_conducting_census(ramp, None, 4, 1, F(1, 2), alpha=1.0)
    assert res.threshold_exp == 2


def test_census_validates_level_value(ramp):
    with pytest.raises(LevelCollisionError):
        well_conducting_census(ramp, F(1, 2), 2, 1, F(1, 2), alpha=1.0)
    ok = well_conducting_census(ramp, F(1, 3), 2, 1, F(1, 2), alpha=1.0)
    assert ok.passed


def test_collision_raised_during_walk(ramp):
    # r = 1/4 equals a vertex value two levels down the ramp
    with pytest.raises(LevelCollisionError):
        LevelSetTree(ramp.refine(2), F(1, 4), 1, depth=2)


def test_kappa_sum_at_least_one(small_corpus):
    for fn, l, alpha, depth, pairs in small_corpus:
        for r, tree in pairs:
            ls = approx_level_set(fn, r, depth, l, tree=tree)
            assert ls.kappa_sum() >= 1


def test_serialization(ramp):
    tree = LevelSetTree(ramp, F(1, 3), 1, depth=1).fill_measure(1)
    ls = approx_level_set(ramp, F(1, 3), 1, 1, tree=tree)
    payload = json.loads(level_set_to_json(ls))
    assert payload["n"] == 1 and payload["l"] == 1
    members = {m["address"]: m for m in payload["members"]}
    assert members["0"]["kappa_exp"] == 0
    assert members["0"]["mu"] == "2/3"
    assert "level,count,kappa_sum,max_kappa" in ls.csv_summary()
