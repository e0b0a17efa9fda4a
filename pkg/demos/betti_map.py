"""Betti coordinates of a torsion and a non-torsion section on a small grid."""
import numpy as np

from relmono.acceptance import THIN_SECTION, TORSION_SECTION, legendre, thin_cover
from relmono.betti import betti_grid, detect_torsion

for name, fam, sec in (("2-torsion (0,0) on Legendre", legendre(), TORSION_SECTION),
                       ("two-factor section on the degree-4 cover", thin_cover(), THIN_SECTION)):
    grid = betti_grid(fam, sec, (0.3, 0.7, 0.8, 1.2), (4, 4))
    B = np.array([s.beta for s in grid.valid()])
    print(name)
    print("  beta at the corners:", np.round(B[[0, -1]], 6).tolist())
    print("  spread per coordinate:", np.ptp(B, axis=0).round(6).tolist())
    print("  verdict:", detect_torsion(grid.valid(), 12).to_dict())
