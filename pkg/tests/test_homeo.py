import random
from fractions import Fraction

import pytest

from cantordyn.space import DYADIC, Clopen, Point, Signature, is_partition
from cantordyn.homeo import (
    Odometer,
    PrefixMap,
    TowerSystem,
    as_prefix_map,
    centralizer_index_sequence,
    compose,
    difference_set,
    fixed_points,
    full_group_membership,
    inverse,
    period_structure,
    point_add,
    power,
    weak_distance,
)
from cantordyn.synth import truncation

from conftest import SIGS, mask, random_clopen, random_homeo

SWAP = PrefixMap.tree_pair(DYADIC, [((0,), (1,)), ((1,), (0,))])
DISS = PrefixMap.tree_pair(
    DYADIC, [((0,), (0, 0)), ((1, 0), (0, 1)), ((1, 1), (1,))]
)


def test_point_add_basic():
    sig = DYADIC
    x = Point.make(sig, (), (0,))
    y = point_add(x, 1)
    assert y == Point.make(sig, (1,), (0,))
    assert point_add(y, -1) == x
    ones = Point.make(sig, (), (1,))
    assert point_add(ones, 1) == Point.make(sig, (), (0,))


def test_point_add_mixed_radix():
    sig = Signature((), (2, 3))
    x = Point.make(sig, (), (0,))
    # 1 + 1 + ... cycles through all residues mod 6 on depth 2
    seen = set()
    y = x
    for _ in range(6):
        seen.add((y.digit(0), y.digit(1)))
        y = point_add(y, 1)
    assert len(seen) == 6
    # the depth-2 prefix returns after 6 steps; the carry moves deeper
    assert (y.digit(0), y.digit(1)) == (0, 0)


@pytest.mark.parametrize("sig", SIGS)
def test_group_laws(sig):
    rng = random.Random(13)
    e = PrefixMap.identity(sig)
    for _ in range(25):
        S = random_homeo(rng, sig)
        T = random_homeo(rng, sig)
        R = random_homeo(rng, sig)
        assert compose(S, e) == S == compose(e, S)
        assert compose(S, inverse(S)) == e
        assert compose(inverse(S), S) == e
        assert compose(compose(S, T), R) == compose(S, compose(T, R))
        assert inverse(compose(S, T)) == compose(inverse(T), inverse(S))
        assert power(S, 3) == compose(S, compose(S, S))
        assert power(S, -2) == inverse(compose(S, S))


@pytest.mark.parametrize("sig", SIGS)
def test_image_respects_set_algebra(sig):
    rng = random.Random(17)
    for _ in range(25):
        S = random_homeo(rng, sig)
        A = random_clopen(rng, sig)
        B = random_clopen(rng, sig)
        assert S.image(A | B) == S.image(A) | S.image(B)
        assert S.image(A & B) == S.image(A) & S.image(B)
        assert S.image(A.complement()) == S.image(A).complement()
        assert S.preimage(S.image(A)) == A
        assert inverse(S).image(A) == S.preimage(A)


def test_composition_matches_pointwise_tabulation():
    sig = DYADIC
    rng = random.Random(19)
    for _ in range(20):
        S = random_homeo(rng, sig)
        T = random_homeo(rng, sig)
        ST = compose(S, T)  # S after T
        for w in sig.words(3):
            A = Clopen.cylinder(sig, w)
            assert ST.image(A) == S.image(T.image(A))


@pytest.mark.parametrize("sig", SIGS)
def test_odometer_cycles_every_depth(sig):
    T = as_prefix_map(Odometer(sig, 1))
    for d in (1, 2, 3):
        n = sig.num_words(d)
        A = Clopen.cylinder(sig, sig.word_of_index(0, d))
        seen = []
        for _ in range(n):
            seen.append(A.words[0])
            A = T.image(A)
        assert len(set(seen)) == n
        assert A == Clopen.cylinder(sig, sig.word_of_index(0, d))


def test_weak_distance_known_values():
    sig = DYADIC
    ident = PrefixMap.identity(sig)
    assert weak_distance(ident, SWAP) == 2
    T = as_prefix_map(Odometer(sig, 1))
    for t in range(1, 5):
        assert weak_distance(T, truncation(sig, t)) == Fraction(2, 2**t)


def test_difference_set_empty_iff_equal():
    sig = DYADIC
    rng = random.Random(23)
    for _ in range(15):
        S = random_homeo(rng, sig)
        E = difference_set(S, S)
        assert E.core.is_empty and not E.removed
        T = compose(S, SWAP)
        E2 = difference_set(S, T)
        assert not E2.core.is_empty


def test_fixed_points():
    sig = DYADIC
    part, isolated = fixed_points(SWAP)
    assert part.is_empty and isolated == []
    part, isolated = fixed_points(PrefixMap.identity(sig))
    assert part == Clopen.full(sig)
    part, isolated = fixed_points(DISS)
    assert part.is_empty
    assert isolated == [
        Point.make(sig, (), (0,)),
        Point.make(sig, (), (1,)),
    ]


def test_period_structure():
    sig = DYADIC
    info = period_structure(SWAP, 4)
    assert info["exact_period_parts"][2] == Clopen.full(sig)
    assert not info["aperiodic_up_to_bound"]
    info = period_structure(Odometer(sig, 1), 6)
    assert info["aperiodic_up_to_bound"]
    assert all(p.is_empty for p in info["exact_period_parts"].values())
    Q = truncation(sig, 2)
    info = period_structure(Q, 4)
    assert info["exact_period_parts"][4] == Clopen.full(sig)


def test_full_group_membership():
    sig = DYADIC
    T = Odometer(sig, 1)
    pieces, missing = full_group_membership(SWAP, T, 2)
    assert missing is None
    assert pieces == {
        1: Clopen.cylinder(sig, (0,)),
        -1: Clopen.cylinder(sig, (1,)),
    }
    # the exponent partition reassembles the map
    for i, E in pieces.items():
        Ti = as_prefix_map(power(T, i))
        assert SWAP.image(E) == Ti.image(E)
    pieces, missing = full_group_membership(DISS, T, 3)
    assert pieces is None and not missing.is_empty


def test_centralizer_index_sequences():
    sig = DYADIC
    S = Odometer(sig, 1)
    for k in range(-3, 6):
        R = as_prefix_map(power(S, k))
        res = centralizer_index_sequence(R, S, 4)
        assert res["ok"]
        for i, p in zip(res["indices"], res["moduli"]):
            assert (i - k) % p == 0
    res = centralizer_index_sequence(SWAP, S, 4)
    assert not res["ok"] and res["failure_level"] <= 2


def test_centralizer_matches_commutation():
    sig = DYADIC
    S = Odometer(sig, 1)
    R = as_prefix_map(power(S, 3))
    assert compose(R, S) == compose(S, R)
    assert centralizer_index_sequence(R, S, 3)["indices"][0] == 1


def test_tower_system_refinement():
    sig = DYADIC
    t = TowerSystem.from_cycle(
        [Clopen.cylinder(sig, (0,)), Clopen.cylinder(sig, (1,))]
    )
    t.ensure_levels(3)
    assert t.heights() == [2, 4, 8]
    for level in t.levels:
        assert is_partition(list(level))
    # the tower agrees with the odometer on every materialized level
    T = as_prefix_map(Odometer(sig, 1))
    for level in t.levels:
        for i, A in enumerate(level[:-1]):
            assert T.image(A) == level[i + 1]
    assert t.tail_bound() == Fraction(1, 4)
