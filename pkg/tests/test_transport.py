import math
import random

import numpy as np
import pytest

from relmono import elliptic
from relmono.acceptance import CZ_SECTION, THIN_SECTION, TORSION_SECTION, chord_tangent_double
from relmono.betti import betti_coordinates
from relmono.errors import ConfigInvalid, RoundingFailure
from relmono.family import SectionSpec, eval_section, seed_frame
from relmono.geometry import Arc, Line, Path
from relmono.numerics import Tolerance
from relmono.topology import keyhole_generators
from relmono.transport import (continue_logarithm, continue_periods, log_at, loop_cocycle,
                               loop_monodromy, loop_transport, symplectic_form)


def small_loop(bp, center, radius):
    start = center + radius
    return Path.from_segments([Line(bp, start), Arc(center, radius, 0.0, 2 * math.pi), Line(start, bp)])


def matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0])))
                 for i in range(len(A)))


def test_constant_path(legendre):
    f0 = log_at(legendre, CZ_SECTION_DOWN, seed_frame(legendre))
    bp = legendre.base.basepoint
    assert continue_periods(legendre, Path.constant(bp), f0).state is f0.state
    f1 = continue_logarithm(legendre, CZ_SECTION_DOWN, Path.constant(bp), f0)
    assert np.array_equal(f1.log, f0.log)


CZ_SECTION_DOWN = TORSION_SECTION


def test_null_homotopic_loop_returns(cz_cover):
    f0 = log_at(cz_cover, CZ_SECTION, seed_frame(cz_cover))
    bp = cz_cover.base.basepoint
    f1 = continue_logarithm(cz_cover, CZ_SECTION, small_loop(bp, bp + 0.3 + 0.3j, 0.2), f0)
    assert np.max(np.abs(f1.state - f0.state)) < 1e-8
    assert np.max(np.abs(f1.log - f0.log)) < 1e-8
    assert f1.sheet == f0.sheet


def test_trivial_loop_identity(legendre):
    out = loop_monodromy(legendre, [])
    assert out.matrix == ((1, 0), (0, 1)) and out.residual < 1e-12


def test_legendre_generators(legendre):
    gens = keyhole_generators(legendre.punctured_base)
    r0 = loop_monodromy(legendre, [gens.index_of(0)], gens=gens)
    r1 = loop_monodromy(legendre, [gens.index_of(1)], gens=gens)
    # frozen from continuation with the dual-oracle seed frame
    assert r0.matrix == ((1, 2), (0, 1))
    assert r1.matrix == ((1, 0), (-2, 1))
    assert matmul(r0.matrix, r1.matrix) != matmul(r1.matrix, r0.matrix)
    assert max(r0.residual, r1.residual) < 1e-6


def test_fiber_product_block_structure(fiber_product):
    gens = keyhole_generators(fiber_product.punctured_base)
    P = symplectic_form(2)
    eye = np.eye(2, dtype=int)
    # lam = 0 is bad only for m = lam, lam = 2 only for m = 2 - lam, lam = 1 for both
    for p, trivial in ((0, [1]), (1, []), (2, [0])):
        M = np.array(loop_monodromy(fiber_product, [gens.index_of(p)], gens=gens).matrix)
        assert np.array_equal(M.T @ P @ M, P)
        assert not M[0:2, 2:4].any() and not M[2:4, 0:2].any()
        for k in range(2):
            block = M[2 * k:2 * k + 2, 2 * k:2 * k + 2]
            assert np.array_equal(block, eye) == (k in trivial)


def test_homomorphism(fiber_product):
    gens = keyhole_generators(fiber_product.punctured_base)
    for w1, w2 in (([1], [2]), ([2, -3], [1, 1])):
        lhs = loop_monodromy(fiber_product, w1 + w2, gens=gens).matrix
        rhs = matmul(loop_monodromy(fiber_product, w1, gens=gens).matrix,
                     loop_monodromy(fiber_product, w2, gens=gens).matrix)
        assert lhs == rhs


def test_zero_section_cocycle(legendre):
    for x in (1, 2, -1):
        assert loop_cocycle(legendre, SectionSpec.zero(1), [x]).vector == (0, 0)


def test_log_at_examples(legendre, thin_cover):
    f = seed_frame(legendre)
    assert log_at(legendre, SectionSpec.zero(1), f).log[0] == 0
    u = log_at(legendre, TORSION_SECTION, f).log[0]
    wa, wb = f.pair(0)
    a, b = elliptic.real_coordinates(2 * u, wa, wb)
    assert abs(a - round(a)) < 1e-9 and abs(b - round(b)) < 1e-9 and abs(u) > 0.1
    # doubling the logarithm agrees with the tangent construction
    g = log_at(thin_cover, THIN_SECTION, seed_frame(thin_cover))
    pt = eval_section(THIN_SECTION, thin_cover, g.at, aux=g.aux)
    for k, m in enumerate(thin_cover.m_values(g.at)):
        w1, w2 = g.pair(k)
        X, Y = elliptic.exp_point(2 * g.log[k], w1, w2, m)
        ex, ey = chord_tangent_double(*pt.points[k], m)
        assert abs(X - ex) < 1e-8 * abs(ex) and abs(Y - ey) < 1e-8 * abs(ey)


def test_torsion_cocycle_closed_form(legendre):
    f0 = log_at(legendre, TORSION_SECTION, seed_frame(legendre))
    beta = np.array(betti_coordinates(f0).beta)
    assert np.allclose(2 * beta, np.round(2 * beta), atol=1e-9)
    for w in ([1], [2], [1, -2], [2, 2, 1]):
        out = loop_transport(legendre, w, TORSION_SECTION)
        A = np.array(out.monodromy.matrix).T
        expected = beta @ (A - np.eye(2))
        assert np.allclose(out.cocycle.vector, np.round(expected), atol=0)
        assert np.allclose(expected, np.round(expected), atol=1e-9)


def test_thin_kernel_word_nonzero(thin_cover):
    gens = keyhole_generators(thin_cover.punctured_base)
    word = [gens.index_of(0), gens.index_of(2), -gens.index_of(0), -gens.index_of(2)]
    out = loop_transport(thin_cover, word, THIN_SECTION, gens=gens)
    assert out.monodromy.matrix == tuple(tuple(int(i == j) for j in range(4)) for i in range(4))
    assert out.end_sheet == out.start_sheet == 0
    assert out.cocycle.vector == (2, 0, 0, 0)  # frozen from continuation


def test_loop_must_be_closed(legendre):
    open_path = Path.from_segments([Line(legendre.base.basepoint, 0.3 + 0.5j)])
    with pytest.raises(ConfigInvalid):
        loop_monodromy(legendre, open_path)


def test_sheet_changing_loop_has_no_cocycle(cz_cover):
    gens = keyhole_generators(cz_cover.punctured_base)
    with pytest.raises(ConfigInvalid):
        loop_cocycle(cz_cover, CZ_SECTION, [gens.index_of(2)], gens=gens)


def test_unattainable_round_tol(legendre):
    with pytest.raises(RoundingFailure):
        loop_monodromy(legendre, [1], tol=Tolerance(ode_tol=1e-12, round_tol=1e-16))
