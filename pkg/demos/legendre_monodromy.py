"""Monodromy of the Legendre family around lam = 0 and lam = 1.

Seeds a period frame at the basepoint, carries it around each keyhole loop
and prints the rounded integer matrices. Both are congruent to the identity
mod 2 and they do not commute.
"""
from relmono.acceptance import legendre
from relmono.family import seed_frame
from relmono.topology import keyhole_generators
from relmono.transport import loop_monodromy

fam = legendre()
gens = keyhole_generators(fam.punctured_base)
frame = seed_frame(fam)
wa, wb = frame.pair(0)
print(f"basepoint {fam.base.basepoint}: omega_a = {wa:.10f}, omega_b = {wb:.10f}, tau = {wb / wa:.10f}")

for p in gens.punctures:
    out = loop_monodromy(fam, [gens.index_of(p)], gens=gens)
    print(f"loop around {p.real:g}: rho = {out.matrix}  (rounding residual {out.residual:.1e})")
