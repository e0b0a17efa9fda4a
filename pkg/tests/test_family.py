import cmath
import json
import math
import random

import pytest

from relmono import elliptic
from relmono.acceptance import CZ_SECTION, THIN_SECTION, chord_tangent_double
from relmono.errors import BranchUndefined, ConfigInvalid, OracleMismatch, RamifiedFiber
from relmono.family import (CoverSpec, EllipticFactor, FamilySpec, SectionSpec, eval_section,
                            pullback_section, punctures_of, seed_frame, trace_logs, trace_section)

BASE = {"basepoint": [0.5, 1.0], "clearance": 0.1}


def family(factors, cover=None, base=BASE):
    data = {"factors": [{"m": m} for m in factors], "base": base}
    if cover:
        data["cover"] = {"variables": cover[0], "equations": cover[1]}
    return FamilySpec.from_dict(data)


def finite(pts):
    return [p for p in pts if p is not math.inf]


def test_punctures_examples():
    assert punctures_of(family(["lam"])) == [0, 1, math.inf]
    assert punctures_of(family(["lam", "2 - lam"])) == [0, 1, 2, math.inf]
    assert punctures_of(family(["lam"], (["mu"], ["mu**2 - (2 - lam)"]))) == [0, 1, 2, math.inf]


def test_thin_cover_punctures_include_branch_point(thin_cover):
    assert finite(punctures_of(thin_cover)) == [-1, 0, 1, 2]
    assert thin_cover.degree == 4


def test_rational_factor_bad_points():
    f = EllipticFactor("1/(lam - 3)")
    assert sorted(complex(p).real for p in f.bad_points()) == [3, 4]


@pytest.mark.parametrize("bad", ["3", "lam +", "sin(lam)", "lam*q"])
def test_invalid_factors(bad):
    with pytest.raises(ConfigInvalid):
        family([bad])


def test_basepoint_on_puncture_rejected():
    with pytest.raises(ConfigInvalid):
        family(["lam"], base={"basepoint": [0, 0], "clearance": 0.1})


def test_seed_frame_orientation_and_oracle(legendre, fiber_product):
    fr = seed_frame(legendre, at=0.5)
    wa, wb = fr.pair(0)
    assert (wb / wa).imag > 0
    assert abs(wa - 2 * math.pi * 1.1803405990160962) < 1e-12  # 2 pi 2F1(1/2,1/2;1;1/2)
    f2 = seed_frame(fiber_product)
    assert f2.periods.shape == (4, 2)
    assert f2.periods[1, 1] == 0 and f2.periods[2, 0] == 0


def test_seed_frame_at_puncture(legendre):
    with pytest.raises(OracleMismatch):
        seed_frame(legendre, at=0.0)


def test_eval_section_examples(legendre, thin_cover):
    zero = eval_section(SectionSpec.zero(1), legendre, 0.3 + 0.2j)
    assert zero.is_zero
    tors = eval_section(SectionSpec((("0", "0"),)), legendre, 0.3 + 0.2j)
    assert tors.points[0] == (0, 0)
    at0 = eval_section(THIN_SECTION, thin_cover, 0j)
    (x1, y1), (x2, y2) = at0.points
    assert (x1, x2) == (2, 3)
    assert abs(abs(y1) - 2) < 1e-12 and abs(abs(y2) - math.sqrt(6)) < 1e-12


def test_sheets_give_all_signs(thin_cover):
    signs = set()
    for s in range(4):
        (_, y1), (_, y2) = eval_section(THIN_SECTION, thin_cover, 0j, sheet=s).points
        signs.add((y1.real > 0, y2.real > 0))
    assert len(signs) == 4


def test_section_off_curve_rejected(legendre):
    with pytest.raises(BranchUndefined):
        eval_section(SectionSpec((("2", "1"),)), legendre, 0.5 + 0.5j)


def test_weierstrass_residual_random_points(cz_cover):
    rng = random.Random(2)
    for _ in range(10):
        lam = complex(rng.uniform(-1, 3), rng.uniform(0.3, 2))
        for s in range(2):
            (x, y), = eval_section(CZ_SECTION, cz_cover, lam, sheet=s).points
            assert elliptic.on_curve_residual(x, y, lam) < 1e-8


def test_pullback_examples():
    down = CoverSpec(("mu",), ("mu**2 - (2 - lam)",))
    assert pullback_section(down, SectionSpec.zero(1)) == SectionSpec.zero(1)
    tors = SectionSpec((("0", "0"),))
    assert pullback_section(down, tors) == tors
    assert pullback_section(None, tors) == tors
    with pytest.raises(ConfigInvalid):
        pullback_section(down, CZ_SECTION)  # uses mu, which does not exist downstairs


TOWER = (["mu", "nu"], ["mu**2 - (2 - lam)", "nu**2 - (1 + lam)"])


def test_trace_of_pullback_doubles():
    up = family(["lam"], TOWER)
    pulled = pullback_section(up.cover, CZ_SECTION, up.cover.prefix(1))
    rng = random.Random(9)
    for _ in range(5):
        lam = complex(rng.uniform(-0.5, 2.5), rng.uniform(0.3, 1.2))
        mu = cmath.sqrt(2 - lam)
        (x, y), = trace_section(up, pulled, lam, down_aux=(mu,), n_down=1).points
        ex, ey = chord_tangent_double(2 + 0j, math.sqrt(2) * mu, lam)
        assert abs(x - ex) < 1e-8 * abs(ex) and abs(y - ey) < 1e-8 * abs(ey)


def test_trace_of_zero_and_odd_sections(cz_cover):
    assert trace_section(cz_cover, SectionSpec.zero(1), 0.4 + 0.7j).is_zero
    # mu -> -mu sends (2, sqrt(2) mu) to its negative: the fiber sum cancels
    assert trace_section(cz_cover, CZ_SECTION, 0.4 + 0.7j).is_zero


def test_trace_commutes_with_logarithms():
    up = family(["lam"], TOWER)
    rng = random.Random(4)
    for _ in range(3):
        lam = complex(rng.uniform(-0.5, 2.5), rng.uniform(0.3, 1.2))
        mu = -cmath.sqrt(2 - lam)
        sums, bases, n = trace_logs(up, CZ_SECTION, lam, (mu,), 1)
        assert n == 2
        (x, y), = trace_section(up, CZ_SECTION, lam, (mu,), 1).points
        u = elliptic.elliptic_log(x, y, lam)
        w1, w2 = bases[0]
        assert abs(elliptic.reduce_mod_lattice(u - sums[0], w1, w2)) < 1e-8


def test_trace_at_branch_value_is_ramified(cz_cover):
    with pytest.raises(RamifiedFiber):
        trace_logs(cz_cover, CZ_SECTION, 2.0)


def test_json_round_trip(thin_cover):
    data = json.loads(json.dumps(thin_cover.to_dict()))
    again = FamilySpec.from_dict(data)
    assert again.to_dict() == thin_cover.to_dict()
    assert again.punctures == thin_cover.punctures
    sec = SectionSpec.from_dict(json.loads(json.dumps(THIN_SECTION.to_dict())))
    assert sec == THIN_SECTION
    mixed = SectionSpec((None, ("0", "0")), torsion_hint=2)
    assert SectionSpec.from_dict(mixed.to_dict()) == mixed
