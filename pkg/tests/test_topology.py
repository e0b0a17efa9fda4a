import itertools
import math
import random

import pytest

from relmono.errors import CrowdedPunctures, DisconnectedCover
from relmono.family import CoverSpec, PuncturedBase
from relmono.topology import (act, commutator, concat, conjugate, inverse_word, keyhole_generators,
                              lift_path, realize_word, reduce_word, reduced_words,
                              schreier_from_permutations, schreier_generators, sheet_permutations)

SQRT_2_MINUS = CoverSpec(("mu",), ("mu**2 - (2 - lam)",))


def base(punctures, bp=0.5 + 1j, r=0.1):
    return PuncturedBase(tuple(punctures), bp, r)


def test_word_algebra():
    assert reduce_word([1, 2, -2, -1, 3]) == [3]
    assert inverse_word([1, -2, 3]) == [-3, 2, -1]
    assert commutator([1], [3]) == [1, 3, -1, -3]
    assert conjugate([2], [1]) == [2, 1, -2]
    assert concat([1, 2], [-2, 3]) == [1, 3]


def test_reduced_word_count():
    for n, L in ((2, 4), (3, 3)):
        words = list(reduced_words(n, L))
        assert len(words) == sum(2 * n * (2 * n - 1) ** (k - 1) for k in range(1, L + 1))
        assert all(reduce_word(w) == list(w) for w in words)


def test_generator_counts_and_order():
    assert len(keyhole_generators(base([0, 1, math.inf]))) == 2
    gens = keyhole_generators(base([0, 1, 2, math.inf]))
    assert len(gens) == 3
    phases = [math.atan2((p - gens.basepoint).imag, (p - gens.basepoint).real) for p in gens.punctures]
    assert phases == sorted(phases)
    assert len(keyhole_generators(base([]))) == 0


def test_keyhole_geometry():
    gens = keyhole_generators(base([0, 1, 2]))
    for loop, p in zip(gens.loops, gens.punctures):
        assert loop.is_closed and abs(loop.start - gens.basepoint) < 1e-12
        assert loop.distance_to(p) == pytest.approx(0.1, abs=1e-12)
        for q in gens.punctures:
            assert loop.distance_to(q) >= 0.1 - 1e-12


def test_crowded_punctures():
    with pytest.raises(CrowdedPunctures):
        keyhole_generators(base([0, 0.15]))


def test_approach_offset_clears_nearby_puncture():
    # the direct approach to 2+0.15i passes 1 at distance 0.075; an offset attachment clears it
    gens = keyhole_generators(base([1, 2 + 0.15j], bp=0j))
    loop = gens.loops[gens.index_of(2 + 0.15j) - 1]
    assert loop.distance_to(1) > 0.1


def test_exactly_collinear_punctures_are_crowded():
    with pytest.raises(CrowdedPunctures):
        keyhole_generators(base([1, 2], bp=0j))


def test_realize_word():
    gens = keyhole_generators(base([0, 1, 2]))
    assert realize_word([], gens).segments == ()
    p = realize_word([1, -1], gens)
    assert p.is_closed and len(p.segments) == 6
    assert realize_word([1, 3, -1, -3], gens).is_closed


def test_lift_degree_one_and_sheet_swap():
    gens = keyhole_generators(base([0, 1, 2]))
    assert lift_path(None, gens.loops[0], 0)[1] == 0
    i2, i0 = gens.index_of(2), gens.index_of(0)
    for s in (0, 1):
        assert lift_path(SQRT_2_MINUS, gens.loops[i2 - 1], s)[1] == 1 - s
        assert lift_path(SQRT_2_MINUS, gens.loops[i0 - 1], s)[1] == s


def test_sheet_action_is_homomorphism(thin_cover):
    gens = keyhole_generators(thin_cover.punctured_base)
    perms = sheet_permutations(thin_cover.cover, gens)
    rng = random.Random(8)
    for _ in range(4):
        w = [rng.choice([1, -1]) * rng.randint(1, len(gens)) for _ in range(rng.randint(1, 3))]
        s = rng.randrange(4)
        assert lift_path(thin_cover.cover, realize_word(w, gens), s)[1] == act(perms, w, s)


@pytest.mark.parametrize("n, expected", [(2, 3), (3, 5)])
def test_schreier_index_two(n, expected):
    perms = [(1, 0)] + [(0, 1)] * (n - 1)
    sch = schreier_from_permutations(perms)
    assert len(sch.words) == expected
    for w in sch.words:
        assert act(perms, w, 0) == 0


def test_schreier_degree_one():
    sch = schreier_from_permutations([(0,), (0,), (0,)])
    assert [list(w) for w in sch.words] == [[1], [2], [3]]


def test_schreier_nielsen_count(thin_cover):
    gens = keyhole_generators(thin_cover.punctured_base)
    sch = schreier_generators(thin_cover.cover, gens)
    assert len(sch.words) == 1 + 4 * (len(gens) - 1) == 13
    assert all(act(sch.perms, w, 0) == 0 for w in sch.words)


def test_rewrite_expand_round_trip():
    perms = [(1, 2, 0), (0, 2, 1), (2, 1, 0)]
    sch = schreier_from_permutations(perms)
    assert len(sch.words) == 1 + 3 * 2
    rng = random.Random(1)
    found = 0
    for w in itertools.islice(reduced_words(3, 5), 2000):
        if act(perms, w, 0) == 0 and rng.random() < 0.2:
            assert sch.expand(sch.rewrite(w)) == reduce_word(w)
            found += 1
    assert found > 10


def test_disconnected_cover():
    with pytest.raises(DisconnectedCover):
        schreier_from_permutations([(1, 0, 2, 3), (0, 1, 3, 2)])
