import cmath
import math

import numpy as np
import pytest

from relmono import elliptic
from relmono.errors import DegenerateFrame
from relmono.numerics import contour_integral
from relmono.geometry import Line, Path


def random_points(rng, n, m):
    out = []
    while len(out) < n:
        x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        y = cmath.sqrt(x * (x - 1) * (x - m))
        out.append((x, y if rng.random() < 0.5 else -y))
    return out


@pytest.mark.parametrize("m", [0.5, 0.3 + 0.4j, -1.2 + 0.1j, 2.5 - 0.7j])
def test_exp_inverts_log(m):
    rng = np.random.default_rng(1)
    w1, w2, _, _ = elliptic.seed_periods(m)
    for x, y in random_points(rng, 10, m):
        u = elliptic.elliptic_log(x, y, m)
        X, Y = elliptic.exp_point(u, w1, w2, m)
        assert abs(X - x) < 1e-9 * max(1, abs(x))
        assert abs(Y - y) < 1e-9 * max(1, abs(y))


def test_log_matches_direct_integration():
    m = 0.4 + 0.2j
    x0 = 2.0 + 1.0j
    y0 = cmath.sqrt(x0 * (x0 - 1) * (x0 - m))
    u = elliptic.elliptic_log(x0, y0, m)
    # d/dx of u along a path equals 1/y with y continued from y0
    x1 = x0 + 0.3 - 0.2j
    y1 = cmath.sqrt(x1 * (x1 - 1) * (x1 - m))
    y1 = y1 if abs(y1 - y0) < abs(y1 + y0) else -y1
    u1 = elliptic.elliptic_log(x1, y1, m)

    def inv_y(x, _ref=[y0]):
        y = cmath.sqrt(x * (x - 1) * (x - m))
        y = y if abs(y - _ref[0]) < abs(y + _ref[0]) else -y
        _ref[0] = y
        return 1 / y

    direct = contour_integral(inv_y, Path.from_segments([Line(x0, x1)]), tol=1e-12)
    w1, w2, _, _ = elliptic.seed_periods(m)
    diff = elliptic.reduce_mod_lattice(u1 - u - direct, w1, w2)
    assert abs(diff) < 1e-9


def test_two_torsion_log_is_half_period():
    m = 0.5
    w1, w2, _, _ = elliptic.seed_periods(m)
    for x in (0, 1, m):
        u = elliptic.elliptic_log(x, 0, m)
        a, b = elliptic.real_coordinates(2 * u, w1, w2)
        assert abs(a - round(a)) < 1e-9 and abs(b - round(b)) < 1e-9
        assert abs(elliptic.reduce_mod_lattice(u, w1, w2)) > 0.1


def test_reduced_basis_and_covering_radius():
    v1, v2 = elliptic.reduced_basis(1, 1j)
    assert abs(v1) == 1 and abs(v2) == 1
    assert abs(elliptic.covering_radius(1, 1j) - math.sqrt(0.5)) < 1e-15
    # hexagonal lattice: circumradius 1/sqrt(3)
    assert abs(elliptic.covering_radius(1, cmath.exp(1j * math.pi / 3)) - 1 / math.sqrt(3)) < 1e-14
    v1, v2 = elliptic.reduced_basis(1, 7 + 1j)
    assert abs((v2 / v1).real) <= 0.5 and abs(v2 / v1) >= 1
    with pytest.raises(DegenerateFrame):
        elliptic.reduced_basis(1, 2)


def test_seed_periods_satisfy_picard_fuchs():
    m, h = 0.3 + 0.2j, 1e-4
    wa0, _, dwa0, _ = elliptic.seed_periods(m)
    wap, _, _, _ = elliptic.seed_periods(m + h)
    wam, _, _, _ = elliptic.seed_periods(m - h)
    second = (wap - 2 * wa0 + wam) / h ** 2
    assert abs(second - elliptic.picard_fuchs(m, wa0, dwa0)) < 1e-5 * abs(second)


def test_exp_of_zero_is_neutral():
    w1, w2, _, _ = elliptic.seed_periods(0.5)
    assert elliptic.exp_point(0, w1, w2, 0.5) is None
    assert elliptic.exp_point(w1 + w2, w1, w2, 0.5) is None
