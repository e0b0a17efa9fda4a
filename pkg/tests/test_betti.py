import math

import numpy as np
import pytest

from relmono.acceptance import MU_LINE_SECTION, THIN_SECTION, TORSION_SECTION, mu_line
from relmono.betti import BettiSample, betti_coordinates, betti_grid, detect_torsion
from relmono.errors import ConfigInvalid, RegionTouchesPuncture
from relmono.family import SectionSpec, seed_frame
from relmono.topology import keyhole_generators, realize_word
from relmono.transport import continue_logarithm, log_at, loop_transport

REGION = (0.3, 0.7, 0.8, 1.2)


def test_zero_section_grid(legendre):
    grid = betti_grid(legendre, SectionSpec.zero(1), REGION, (3, 3))
    assert all(s.beta == (0.0, 0.0) for s in grid.samples)


def test_torsion_grid_constant(legendre):
    grid = betti_grid(legendre, TORSION_SECTION, (-0.4, 0.4, 0.5, 1.3), (5, 5))
    B = np.array([s.beta for s in grid.valid()])
    assert np.max(np.abs(B - B[0])) < 1e-7
    assert np.allclose(2 * B[0], np.round(2 * B[0]), atol=1e-9)
    verdict = detect_torsion(grid.valid(), 12)
    assert verdict.status == "torsion" and verdict.order == 2


def test_thin_section_not_constant(thin_cover):
    f0 = log_at(thin_cover, THIN_SECTION, seed_frame(thin_cover))
    grid = betti_grid(thin_cover, THIN_SECTION, REGION, (5, 5))
    B = np.array([s.beta for s in grid.valid()])
    assert len(B) == 25 and np.ptp(B, axis=0).max() > 1e-3
    assert max(s.residual for s in grid.valid()) < 1e-8
    # the sample at the basepoint reproduces the basepoint determination
    at_bp = [s for s in grid.samples if abs(s.at - thin_cover.base.basepoint) < 1e-12][0]
    assert np.allclose(at_bp.beta, betti_coordinates(f0).beta, atol=1e-12)
    assert detect_torsion(grid.valid(), 12).status == "non_torsion"


def test_lattice_shift_moves_beta_by_integers(thin_cover):
    f = log_at(thin_cover, THIN_SECTION, seed_frame(thin_cover))
    n = np.array([1, -2, 3, 0])
    shifted = f.with_(log=f.log + n @ f.periods)
    diff = np.array(betti_coordinates(shifted).beta) - np.array(betti_coordinates(f).beta)
    assert np.allclose(diff, n, atol=1e-9)


def test_affine_action_on_generators():
    fam = mu_line()
    gens = keyhole_generators(fam.punctured_base)
    f0 = log_at(fam, MU_LINE_SECTION, seed_frame(fam))
    b0 = np.array(betti_coordinates(f0).beta)
    for x in range(1, len(gens) + 1):
        out = loop_transport(fam, [x], MU_LINE_SECTION, gens=gens)
        f1 = continue_logarithm(fam, MU_LINE_SECTION, realize_word([x], gens), f0)
        b1 = np.array(betti_coordinates(f1).beta)
        A = np.array(out.monodromy.matrix).T
        # beta_end A = beta_start + c
        assert np.allclose(b1 @ A, b0 + np.array(out.cocycle.vector), atol=1e-8)


def test_skipped_cells_and_csv(legendre):
    grid = betti_grid(legendre, TORSION_SECTION, (-0.3, 0.3, -0.3, 0.3), (5, 5))
    skipped = [s for s in grid.samples if s.skipped]
    assert [s.at for s in skipped] == [0j]
    lines = grid.to_csv().splitlines()
    assert lines[0] == "re,im,beta_1,beta_2,residual"
    assert len(lines) == 26
    assert sum(1 for ln in lines[1:] if ln.endswith(",-1")) == 1


def test_region_inside_clearance(legendre):
    with pytest.raises(RegionTouchesPuncture):
        betti_grid(legendre, TORSION_SECTION, (-0.05, 0.05, -0.05, 0.05), (3, 3))


def sample(beta, k):
    return BettiSample(complex(k, 1), tuple(beta), 0.0)


def test_detect_torsion_examples():
    v = detect_torsion([sample((0.5, 0.0), k) for k in range(6)], 12)
    assert v.status == "torsion" and v.order == 2
    v = detect_torsion([sample((0.2357, 0.0), k) for k in range(6)], 8)
    assert v.status == "inconclusive"
    v = detect_torsion([sample((1 / 3, 0.75 + 4), k) for k in range(6)], 12)
    assert v.status == "torsion" and v.order == 12
    # wrap-around near an integer still counts as constant
    v = detect_torsion([sample((1 - 1e-12 if k % 2 else 1e-12, 0.5), k) for k in range(6)], 4)
    assert v.status == "torsion" and v.order == 2
    with pytest.raises(ConfigInvalid):
        detect_torsion([sample((0.5, 0), 0)] * 6, 4)
