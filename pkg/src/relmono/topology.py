"""Keyhole generators, free-group words, path lifting and Schreier generators.

Words are lists of signed 1-based generator indices. A word acts on the
left: its rightmost letter is traversed first, so the word ``[a, b]`` is
the loop "``b``, then ``a``". With this reading, sheet permutations give a
left action and the period representation is a homomorphism.
"""
from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .errors import ConfigInvalid, CrowdedPunctures, DisconnectedCover, SheetAmbiguity
from .family import CoverSpec, PuncturedBase
from .geometry import Arc, Line, Path
from .numerics import Tolerance

Word = List[int]


# --------------------------------------------------------------------------
# word algebra


def reduce_word(word: Sequence[int]) -> Word:
    out: Word = []
    for x in word:
        if x == 0:
            raise ConfigInvalid("generator indices are 1-based; 0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return out


def inverse_word(word: Sequence[int]) -> Word:
    return [-x for x in reversed(word)]


def concat(*words: Sequence[int]) -> Word:
    out: Word = []
    for w in words:
        out.extend(w)
    return reduce_word(out)


def commutator(a: Sequence[int], b: Sequence[int]) -> Word:
    """``[a, b] = a b a^-1 b^-1``."""
    return concat(a, b, inverse_word(a), inverse_word(b))


def conjugate(u: Sequence[int], w: Sequence[int]) -> Word:
    """``u w u^-1``."""
    return concat(u, w, inverse_word(u))


def reduced_words(n_gens: int, max_len: int):
    """All freely reduced words of length ``1..max_len``, in shortlex order."""
    letters = [x for i in range(1, n_gens + 1) for x in (i, -i)]
    layer: List[Word] = [[]]
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for x in letters:
                if not w or w[-1] != -x:
                    nxt.append(w + [x])
        yield from nxt
        layer = nxt


# --------------------------------------------------------------------------
# generators of the punctured line


@dataclass(frozen=True)
class GeneratorSet:
    loops: tuple
    basepoint: complex
    punctures: tuple  # finite punctures, in generator order

    def __len__(self) -> int:
        return len(self.loops)

    def index_of(self, puncture: complex, tol: float = 1e-9) -> int:
        """1-based generator index of the loop around ``puncture``."""
        for i, p in enumerate(self.punctures):
            if abs(p - complex(puncture)) <= tol * (1 + abs(p)):
                return i + 1
        raise ConfigInvalid(f"{puncture} is not a finite puncture")


def keyhole_generators(base: PuncturedBase) -> GeneratorSet:
    """One keyhole loop per finite puncture, ordered by argument seen from
    the basepoint: straight approach, counterclockwise circle of radius
    ``clearance``, straight return."""
    b = complex(base.basepoint)
    r = base.clearance
    pts = [complex(p) for p in base.punctures if p is not math.inf]
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            if abs(p - q) <= 2 * r:
                raise CrowdedPunctures(f"punctures {p} and {q} are within twice the clearance")
    pts.sort(key=lambda p: (cmath.phase(p - b), abs(p - b)))
    loops = []
    for p in pts:
        loops.append(_keyhole(b, p, r, [q for q in pts if q != p]))
    return GeneratorSet(tuple(loops), b, tuple(pts))


def _keyhole(b: complex, p: complex, r: float, others) -> Path:
    base_angle = cmath.phase(b - p)
    for k in range(0, 25):
        delta = 0.0 if k == 0 else (1 if k % 2 else -1) * 0.05 * ((k + 1) // 2)
        theta = base_angle + delta
        attach = p + r * cmath.exp(1j * theta)
        approach = Line(b, attach)
        if all(approach.distance_to(q) > r for q in others):
            circle = Arc(p, r, theta, 2 * math.pi)
            return Path.from_segments([approach, circle, approach.reversed()])
    raise CrowdedPunctures(f"no straight approach from {b} to {p} keeps clear of the other punctures")


def realize_word(word: Sequence[int], gens: GeneratorSet) -> Path:
    """Closed path at the basepoint; the rightmost letter is traversed first."""
    path = Path.constant(gens.basepoint)
    for x in reversed(list(word)):
        i = abs(x) - 1
        if not 0 <= i < len(gens.loops):
            raise ConfigInvalid(f"letter {x} does not name one of {len(gens.loops)} generators")
        loop = gens.loops[i]
        path = path + (loop if x > 0 else loop.reversed())
    return path


# --------------------------------------------------------------------------
# covers


def _match_sheet(values, fiber, tol: Tolerance) -> int:
    dists = sorted((max(abs(a - b) for a, b in zip(values, s)) if s else 0.0, i)
                   for i, s in enumerate(fiber))
    if len(dists) > 1:
        for i, s in enumerate(fiber):
            for t in fiber[i + 1:]:
                if max(abs(a - b) for a, b in zip(s, t)) < 10 * tol.rel_tol:
                    raise SheetAmbiguity("two cover points over the path end nearly coincide")
        if dists[0][0] * 2 >= dists[1][0]:
            raise SheetAmbiguity("lifted endpoint is not close to a unique cover point")
    return dists[0][1]


def lift_path(cover: Optional[CoverSpec], path: Path, start_sheet: int,
              tol: Tolerance = Tolerance(), samples_per_segment: int = 8):
    """Continue the cover variables along ``path`` from ``start_sheet``.

    Sheets at a point are indexed by the canonical ordering of
    :meth:`CoverSpec.solve` there. Returns ``(track, end_sheet)`` where
    ``track`` is a list of ``(lam, values)`` at sample points.
    """
    from .family import follow_cover

    if cover is None:
        return [(path.start, ()), (path.end, ())], start_sheet
    fiber0 = cover.solve(path.start)
    if not 0 <= start_sheet < len(fiber0):
        raise ConfigInvalid(f"sheet {start_sheet} out of range for degree {len(fiber0)}")
    vals = fiber0[start_sheet]
    track = [(path.start, vals)]
    n = samples_per_segment
    for seg in path.segments:
        for j in range(n):
            piece = Path.from_segments([_subsegment(seg, j / n, (j + 1) / n)])
            vals = follow_cover(cover, piece, vals)
            track.append((piece.end, vals))
    end_sheet = _match_sheet(vals, cover.solve(path.end), tol)
    return track, end_sheet


class _Sub:
    """Reparametrized piece ``[t0, t1]`` of a segment."""

    def __init__(self, seg, t0, t1):
        self.seg, self.t0, self.t1 = seg, t0, t1

    def point(self, t):
        return self.seg.point(self.t0 + (self.t1 - self.t0) * t)

    def velocity(self, t):
        return (self.t1 - self.t0) * self.seg.velocity(self.t0 + (self.t1 - self.t0) * t)

    @property
    def start(self):
        return complex(self.point(0.0))

    @property
    def end(self):
        return complex(self.point(1.0))

    @property
    def length(self):
        return self.seg.length * (self.t1 - self.t0)

    def distance_to(self, p):
        return self.seg.distance_to(p)


def _subsegment(seg, t0, t1):
    return _Sub(seg, t0, t1)


def sheet_permutations(cover: Optional[CoverSpec], gens: GeneratorSet,
                       tol: Tolerance = Tolerance()) -> List[tuple]:
    """Per generator ``x``, the tuple ``perm`` with ``perm[i] = x . i`` (0-based sheets)."""
    if cover is None:
        return [(0,) for _ in gens.loops]
    deg = len(cover.solve(gens.basepoint))
    table = []
    for loop in gens.loops:
        perm = tuple(lift_path(cover, loop, i, tol)[1] for i in range(deg))
        if sorted(perm) != list(range(deg)):
            raise SheetAmbiguity("lifted generator does not permute the sheets")
        table.append(perm)
    return table


def act(perms: Sequence[tuple], word: Sequence[int], sheet: int) -> int:
    """Sheet reached by lifting ``word`` from ``sheet`` (rightmost letter first)."""
    for x in reversed(list(word)):
        perm = perms[abs(x) - 1]
        sheet = perm[sheet] if x > 0 else perm.index(sheet)
    return sheet


@dataclass(frozen=True)
class SchreierData:
    """Schreier transversal and generators of the stabilizer of sheet 0.

    ``edges[k] = (i, x)`` records that Schreier generator ``k + 1`` is
    ``t_{x.i}^-1 x t_i``; ``words[k]`` is that word, freely reduced.
    """

    perms: tuple
    transversal: tuple
    edges: tuple
    words: tuple

    def rewrite(self, word: Sequence[int]) -> Word:
        """Express a stabilizer word in Schreier letters."""
        index = {e: k + 1 for k, e in enumerate(self.edges)}
        sheet = 0
        traversed = []
        for x in reversed(list(word)):
            if x > 0:
                k = index.get((sheet, x))
                if k is not None:
                    traversed.append(k)
                sheet = self.perms[x - 1][sheet]
            else:
                prev = self.perms[-x - 1].index(sheet)
                k = index.get((prev, -x))
                if k is not None:
                    traversed.append(-k)
                sheet = prev
        if sheet != 0:
            raise ConfigInvalid(f"word {list(word)} does not stabilize the base sheet")
        return reduce_word(list(reversed(traversed)))

    def expand(self, word: Sequence[int]) -> Word:
        """Base word of a word in Schreier letters."""
        out: Word = []
        for x in word:
            w = self.words[abs(x) - 1]
            out.extend(w if x > 0 else inverse_word(w))
        return reduce_word(out)


def schreier_generators(cover: Optional[CoverSpec], gens: GeneratorSet,
                        tol: Tolerance = Tolerance(), perms=None) -> SchreierData:
    """Reidemeister-Schreier generators for the stabilizer of sheet 0."""
    if perms is None:
        perms = sheet_permutations(cover, gens, tol)
    return schreier_from_permutations(perms)


def schreier_from_permutations(perms: Sequence[tuple]) -> SchreierData:
    perms = tuple(tuple(p) for p in perms)
    n = len(perms)
    deg = len(perms[0]) if perms else 1
    trans: dict = {0: []}
    queue = deque([0])
    letters = [x for i in range(1, n + 1) for x in (i, -i)]
    while queue:
        i = queue.popleft()
        for x in letters:
            j = act(perms, [x], i)
            if j not in trans:
                trans[j] = [x] + trans[i]
                queue.append(j)
    if len(trans) != deg:
        raise DisconnectedCover(f"generators reach {len(trans)} of {deg} sheets")
    edges, words = [], []
    for i in range(deg):
        for x in range(1, n + 1):
            j = perms[x - 1][i]
            w = concat(inverse_word(trans[j]), [x], trans[i])
            if w:
                edges.append((i, x))
                words.append(tuple(w))
    transversal = tuple(tuple(trans[i]) for i in range(deg))
    return SchreierData(perms, transversal, tuple(edges), tuple(words))
