"""Betti coordinates, grids of them, and the torsion test built on constancy."""
from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigInvalid, RegionTouchesPuncture
from .family import FamilySpec, SectionSpec, seed_frame
from .frame import Frame
from .geometry import Line, Path
from .numerics import Tolerance, rational_reconstruct
from .transport import continue_logarithm, log_at, real_solve


@dataclass(frozen=True)
class BettiSample:
    at: complex
    beta: tuple
    residual: float

    @property
    def skipped(self) -> bool:
        return self.residual < 0


def betti_coordinates(frame: Frame) -> BettiSample:
    """Real ``beta`` with ``log = beta . Omega`` (one complex equation per factor)."""
    if frame.log is None:
        raise ConfigInvalid("frame carries no logarithm")
    beta, resid = real_solve(frame.log, frame.periods)
    return BettiSample(frame.at, tuple(float(b) for b in beta), resid)


@dataclass(frozen=True)
class BettiGrid:
    samples: tuple  # row-major, imaginary part outer
    shape: Tuple[int, int]
    g: int

    def valid(self) -> List[BettiSample]:
        return [s for s in self.samples if not s.skipped]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im"] + [f"beta_{i + 1}" for i in range(2 * self.g)] + ["residual"])
        for s in self.samples:
            betas = ["nan"] * (2 * self.g) if s.skipped else [repr(b) for b in s.beta]
            w.writerow([repr(s.at.real), repr(s.at.imag)] + betas + [repr(s.residual) if not s.skipped else "-1"])
        return buf.getvalue()


def betti_grid(family: FamilySpec, section: SectionSpec, region: Sequence[float],
               resolution: Sequence[int], tol: Tolerance = Tolerance(), sheet: int = 0) -> BettiGrid:
    """Betti coordinates on an ``n x m`` grid over ``region = (re0, re1, im0, im1)``.

    Frames reach the grid from the basepoint along a straight segment and
    then follow a breadth-first spanning tree of grid edges, so that all
    samples share one coherent determination.
    """
    re0, re1, im0, im1 = map(float, region)
    n, m = map(int, resolution)
    if n < 1 or m < 1 or re1 < re0 or im1 < im0:
        raise ConfigInvalid("region must be (re0, re1, im0, im1) with positive resolution")
    xs = np.linspace(re0, re1, n) if n > 1 else np.array([re0])
    ys = np.linspace(im0, im1, m) if m > 1 else np.array([im0])
    pts = [[complex(x, y) for x in xs] for y in ys]
    punct = family.punctures
    r = family.base.clearance

    def clear_point(z):
        return all(abs(z - p) > r for p in punct)

    def clear_segment(a, b):
        seg = Line(a, b)
        return all(seg.distance_to(p) > r for p in punct)

    ok = {(i, j) for i in range(m) for j in range(n) if clear_point(pts[i][j])}
    if not ok:
        raise RegionTouchesPuncture("every grid point lies within clearance of a puncture")
    bp = family.base.basepoint
    entry = min((k for k in ok if clear_segment(bp, pts[k[0]][k[1]])),
                key=lambda k: (abs(pts[k[0]][k[1]] - bp), k), default=None)
    if entry is None:
        raise RegionTouchesPuncture("no grid point can be reached from the basepoint in a straight line")

    f0 = log_at(family, section, seed_frame(family, tol=tol, sheet=sheet), tol)
    first = Path.from_segments([Line(bp, pts[entry[0]][entry[1]])]) if pts[entry[0]][entry[1]] != bp \
        else Path.constant(bp)
    frames = {entry: continue_logarithm(family, section, first, f0, tol)}
    queue = deque([entry])
    while queue:
        i, j = queue.popleft()
        for di, dj in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            k = (i + di, j + dj)
            if k in ok and k not in frames and clear_segment(pts[i][j], pts[k[0]][k[1]]):
                path = Path.from_segments([Line(pts[i][j], pts[k[0]][k[1]])])
                frames[k] = continue_logarithm(family, section, path, frames[(i, j)], tol)
                queue.append(k)
    samples = []
    for i in range(m):
        for j in range(n):
            fr = frames.get((i, j))
            if fr is None:
                samples.append(BettiSample(pts[i][j], tuple([math.nan] * (2 * family.g)), -1.0))
            else:
                samples.append(betti_coordinates(fr))
    return BettiGrid(tuple(samples), (m, n), family.g)


@dataclass(frozen=True)
class TorsionVerdict:
    status: str  # "torsion" | "non_torsion" | "inconclusive"
    order: Optional[int] = None
    deviation: float = 0.0
    rationals: Optional[tuple] = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "deviation": self.deviation}
        if self.order is not None:
            out["order"] = self.order
        if self.rationals is not None:
            out["rationals"] = [str(q) for q in self.rationals]
        return out


def _circular_spread(values: np.ndarray) -> float:
    """Largest distance mod 1 of any value from the first one."""
    d = values - values[0]
    d = d - np.round(d)
    return float(np.max(np.abs(d), initial=0.0))


def detect_torsion(samples: Sequence[BettiSample], max_order: int,
                   tol: Tolerance = Tolerance()) -> TorsionVerdict:
    """Constancy of ``beta`` (mod 1) across samples, then rational recognition."""
    good = [s for s in samples if not s.skipped]
    if len({s.at for s in good}) < 5:
        raise ConfigInvalid("torsion detection needs at least 5 samples at distinct points")
    B = np.array([s.beta for s in good], dtype=float)
    deviation = max(_circular_spread(B[:, k]) for k in range(B.shape[1]))
    if deviation > 10 * tol.rel_tol:
        return TorsionVerdict("non_torsion", deviation=deviation)
    rationals = []
    for k in range(B.shape[1]):
        x = float(B[0, k] - math.floor(B[0, k]))
        q = rational_reconstruct(x, max_order, 10 * tol.rel_tol)
        if q is None:
            return TorsionVerdict("inconclusive", deviation=deviation)
        rationals.append(q % 1)
    order = 1
    for q in rationals:
        order = order * q.denominator // math.gcd(order, q.denominator)
    if order > max_order:
        return TorsionVerdict("inconclusive", deviation=deviation, rationals=tuple(rationals))
    return TorsionVerdict("torsion", order, deviation, tuple(rationals))
