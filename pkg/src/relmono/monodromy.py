"""Exact integer layer: cocycle tables, kernel words, lattice rank, coboundaries.

A word's rightmost letter is traversed first. Traversing letter ``x`` after
a path with data ``(A, e)`` gives ``(A A_x, c_x + e A_x)`` where
``A_x = rho_x^T``; at the end ``rho(w) = A^T`` and ``c(w) = e``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import intlinalg as il
from .errors import ConfigInvalid, NotKernelWord
from .topology import Word, commutator, conjugate, inverse_word, reduce_word, reduced_words

IntMatrix = Tuple[Tuple[int, ...], ...]


def block_form(g: int) -> IntMatrix:
    P = [[0] * (2 * g) for _ in range(2 * g)]
    for k in range(g):
        P[2 * k][2 * k + 1] = 1
        P[2 * k + 1][2 * k] = -1
    return il.freeze(P)


def is_symplectic(M, P) -> bool:
    return il.matmul(il.matmul(il.transpose(M), P), M) == [list(r) for r in P]


def _sp_inverse(M, P) -> IntMatrix:
    # M^T P M = P  =>  M^-1 = P^-1 M^T P with P^-1 = -P for the block form
    Pinv = [[-x for x in row] for row in P]
    return il.freeze(il.matmul(il.matmul(Pinv, il.transpose(M)), P))


@dataclass(frozen=True)
class CocycleTable:
    """Integer data ``(rho_i, c_i)`` on generators, with symplectic form ``P``."""

    g: int
    generators: tuple  # of (rho: IntMatrix, c: tuple)
    form: IntMatrix = None

    def __post_init__(self):
        if self.form is None:
            object.__setattr__(self, "form", block_form(self.g))
        n = 2 * self.g
        gens = []
        for rho, c in self.generators:
            rho, c = il.freeze(rho), tuple(int(v) for v in c)
            if len(rho) != n or any(len(r) != n for r in rho) or len(c) != n:
                raise ConfigInvalid(f"generator data must be {n}x{n} matrices and length-{n} vectors")
            gens.append((rho, c))
        object.__setattr__(self, "generators", tuple(gens))

    @property
    def n(self) -> int:
        return len(self.generators)

    def symplectic_defects(self) -> List[int]:
        return [i + 1 for i, (rho, _) in enumerate(self.generators) if not is_symplectic(rho, self.form)]

    def letter(self, x: int):
        """``(A_x, c_x)`` for a signed letter, ``A_x = rho_x^T``."""
        if x == 0 or abs(x) > self.n:
            raise ConfigInvalid(f"letter {x} does not name one of {self.n} generators")
        cache = self.__dict__.setdefault("_letters", {})
        out = cache.get(x)
        if out is None:
            rho, c = self.generators[abs(x) - 1]
            A = il.freeze(il.transpose(rho))
            if x > 0:
                out = (A, c)
            else:
                Ainv = _sp_inverse(A, self.form)
                out = (Ainv, tuple(-v for v in il.vecmat(c, Ainv)))
            cache[x] = out
        return out

    def to_dict(self) -> dict:
        return {"g": self.g, "form": [list(r) for r in self.form],
                "generators": [{"rho": [list(r) for r in rho], "c": list(c)} for rho, c in self.generators]}

    @classmethod
    def from_dict(cls, data: dict) -> "CocycleTable":
        try:
            gens = tuple((il.freeze(d["rho"]), tuple(d["c"])) for d in data["generators"])
            form = il.freeze(data["form"]) if "form" in data else None
            return cls(int(data["g"]), gens, form)
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed cocycle table: {exc}") from exc


def compose_cocycle(table: CocycleTable, word: Sequence[int]):
    """``(rho(w), c(w))`` by exact composition along the word."""
    n = 2 * table.g
    A = il.identity(n)
    e = [0] * n
    for x in reversed(list(word)):
        Ax, cx = table.letter(x)
        A = il.matmul(A, Ax)
        e = [a + b for a, b in zip(cx, il.vecmat(e, Ax))]
    return il.freeze(il.transpose(A)), tuple(e)


def extended_matrix(table: CocycleTable, word: Sequence[int]) -> IntMatrix:
    """``theta(w) = [[rho(w), c(w)^T], [0, 1]]``."""
    rho, c = compose_cocycle(table, word)
    n = len(rho)
    rows = [list(rho[i]) + [c[i]] for i in range(n)]
    rows.append([0] * n + [1])
    return il.freeze(rows)


def is_identity(M) -> bool:
    return all(M[i][j] == (1 if i == j else 0) for i in range(len(M)) for j in range(len(M)))


# --------------------------------------------------------------------------
# cover groupoid data


@dataclass(frozen=True)
class SheetCocycleTable:
    """Per base generator ``x``: ``rho_x``, the sheet permutation and the
    vectors ``d(i, x)`` measured against the principal log on sheet ``x . i``."""

    g: int
    rhos: tuple
    perms: tuple
    d: tuple  # d[x-1][i]
    form: IntMatrix = None

    def __post_init__(self):
        if self.form is None:
            object.__setattr__(self, "form", block_form(self.g))

    @property
    def degree(self) -> int:
        return len(self.perms[0]) if self.perms else 1

    def compose(self, word: Sequence[int], sheet: int = 0):
        """``(rho, c, end_sheet)`` of the lift of ``word`` starting on ``sheet``."""
        n = 2 * self.g
        A = il.identity(n)
        e = [0] * n
        for x in reversed(list(word)):
            i = abs(x) - 1
            Ax = il.transpose(self.rhos[i])
            if x > 0:
                dx = self.d[i][sheet]
                sheet = self.perms[i][sheet]
            else:
                prev = self.perms[i].index(sheet)
                Ax = _sp_inverse(Ax, self.form)
                dx = [-v for v in il.vecmat(self.d[i][prev], Ax)]
                sheet = prev
            A = il.matmul(A, Ax)
            e = [a + b for a, b in zip(dx, il.vecmat(e, Ax))]
        return il.freeze(il.transpose(A)), tuple(e), sheet

    def schreier_table(self, words: Sequence[Sequence[int]]) -> CocycleTable:
        gens = []
        for w in words:
            rho, c, end = self.compose(w, 0)
            if end != 0:
                raise ConfigInvalid(f"word {list(w)} does not stabilize sheet 0")
            gens.append((rho, c))
        return CocycleTable(self.g, tuple(gens), self.form)

    def base_table(self) -> CocycleTable:
        if self.degree != 1:
            raise ConfigInvalid("a base cocycle table needs a degree-1 cover")
        return CocycleTable(self.g, tuple((r, tuple(dd[0])) for r, dd in zip(self.rhos, self.d)), self.form)

    def to_dict(self) -> dict:
        return {"g": self.g, "rhos": [[list(r) for r in rho] for rho in self.rhos],
                "perms": [list(p) for p in self.perms], "d": [[list(v) for v in dx] for dx in self.d]}


# --------------------------------------------------------------------------
# kernel words


def kernel_words(table: CocycleTable, max_len: int, seeds: Sequence[Sequence[int]] = (),
                 conj_len: int = 2, exhaustive_limit: int = 20000,
                 max_vertices: int = 200000) -> List[Word]:
    """Freely reduced words in ``ker rho``.

    Sources: valid seeds; a bounded search; commutators of generator pairs
    with commuting images; conjugates ``u w u^-1`` (``|u| <= conj_len``) of
    the seeds and commutators. The search enumerates all reduced words up
    to ``max_len`` when there are at most ``exhaustive_limit`` of them;
    otherwise it returns the fundamental cycles of a breadth-first spanning
    tree of the radius ``floor(max_len/2)`` ball of the Cayley graph of the
    image, whose products contain every kernel word of length ``<= max_len``.
    """
    if max_len < 1:
        raise ConfigInvalid("max_len must be at least 1")
    found: Dict[tuple, None] = {}

    def add(w):
        w = tuple(reduce_word(w))
        if w and w not in found:
            found[w] = None

    structural = []
    for s in seeds:
        s = reduce_word(s)
        if s and is_identity(compose_cocycle(table, s)[0]):
            structural.append(s)
    for i, j in itertools.combinations(range(1, table.n + 1), 2):
        a, b = table.generators[i - 1][0], table.generators[j - 1][0]
        if il.matmul(a, b) == il.matmul(b, a):
            structural.append(commutator([i], [j]))
    for w in structural:
        add(w)

    n = table.n
    total = sum(2 * n * (2 * n - 1) ** (k - 1) for k in range(1, max_len + 1)) if n else 0
    if total <= exhaustive_limit:
        for w in _exhaustive_kernel(table, max_len):
            add(w)
    else:
        for w in _cayley_cycles(table, max_len // 2, max_vertices):
            add(w)

    if conj_len > 0 and structural:
        conjugators = [list(u) for u in reduced_words(n, conj_len)]
        for w in structural:
            for u in conjugators:
                add(conjugate(u, w))
    return [list(w) for w in found]


def _exhaustive_kernel(table: CocycleTable, max_len: int):
    n2 = 2 * table.g
    letters = [x for i in range(1, table.n + 1) for x in (i, -i)]
    rho_of = {x: _letter_rho(table, x) for x in letters}
    layer = [([], il.freeze(il.identity(n2)))]
    for _ in range(max_len):
        nxt = []
        for w, M in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                M2 = il.freeze(il.matmul(M, rho_of[x]))
                w2 = w + [x]
                if is_identity(M2):
                    yield w2
                nxt.append((w2, M2))
        layer = nxt


def _letter_rho(table, x):
    A, _ = table.letter(x)
    return il.freeze(il.transpose(A))


def _cayley_cycles(table: CocycleTable, radius: int, max_vertices: int):
    n2 = 2 * table.g
    letters = [x for i in range(1, table.n + 1) for x in (i, -i)]
    rho_of = {x: _letter_rho(table, x) for x in letters}
    ident = il.freeze(il.identity(n2))
    tree = {ident: []}
    frontier = [ident]
    seen_edges = set()
    for depth in range(radius + 1):
        nxt = []
        for M in frontier:
            t = tree[M]
            for x in letters:
                M2 = il.freeze(il.matmul(rho_of[x], M))  # word x . t
                if M2 in tree:
                    key = (M, x) if (M, x) <= (M2, -x) else (M2, -x)
                    if key in seen_edges:
                        continue
                    seen_edges.add(key)
                    w = reduce_word(inverse_word(tree[M2]) + [x] + t)
                    if w:
                        yield w
                elif depth < radius and len(tree) < max_vertices:
                    tree[M2] = [x] + t
                    seen_edges.add((M, x) if (M, x) <= (M2, -x) else (M2, -x))
                    nxt.append(M2)
        frontier = nxt


# --------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class LatticeReport:
    rank: int
    hnf_basis: tuple
    witnesses: tuple  # of (word, vector)
    max_len: Optional[int] = None

    def to_dict(self) -> dict:
        return {"rank": self.rank, "hnf_basis": [list(r) for r in self.hnf_basis],
                "witnesses": [{"word": list(w), "c": list(c)} for w, c in self.witnesses],
                "max_word_len": self.max_len}


def relative_lattice_rank(table: CocycleTable, words: Sequence[Sequence[int]],
                          max_len: Optional[int] = None) -> LatticeReport:
    """HNF of the cocycle values on kernel words (the relative monodromy lattice)."""
    wits = []
    for w in words:
        rho, c = compose_cocycle(table, w)
        if not is_identity(rho):
            raise NotKernelWord(f"word {list(w)} has nontrivial monodromy")
        wits.append((tuple(w), c))
    basis = il.hnf([c for _, c in wits])
    return LatticeReport(len(basis), tuple(tuple(r) for r in basis), tuple(wits), max_len)


@dataclass(frozen=True)
class CoboundaryResult:
    status: str  # "coboundary" | "not_coboundary" | "inconsistent_input"
    n: Optional[tuple] = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.n is not None:
            out["n"] = list(self.n)
        if self.detail:
            out["detail"] = self.detail
        return out


def coboundary_solve(table: CocycleTable) -> CoboundaryResult:
    """Decide whether some integer ``n`` has ``c_i = n (rho_i^T - I)`` for all ``i``."""
    bad = table.symplectic_defects()
    if bad:
        return CoboundaryResult("inconsistent_input", detail=f"generators {bad} are not symplectic")
    dim = 2 * table.g
    if table.n == 0:
        return CoboundaryResult("coboundary", tuple([0] * dim))
    B = [[] for _ in range(dim)]
    rhs: List[int] = []
    for rho, c in table.generators:
        At = il.transpose(rho)
        for i in range(dim):
            B[i].extend(At[i][j] - (1 if i == j else 0) for j in range(dim))
        rhs.extend(c)
    x = il.solve_left(B, rhs)
    if x is None:
        return CoboundaryResult("not_coboundary")
    return CoboundaryResult("coboundary", tuple(x))


def orbit_lattice_rank(table: CocycleTable, v: Sequence[int], max_rounds: int = 64) -> int:
    """Rank of the saturated lattice spanned by ``v`` under the ``rho_i`` and their inverses."""
    if not any(v):
        raise ConfigInvalid("orbit_lattice_rank needs a nonzero vector")
    mats = []
    for x in range(1, table.n + 1):
        for s in (x, -x):
            mats.append(_letter_rho(table, s))
    basis = il.hnf([list(v)])
    for _ in range(max_rounds):
        rows = list(basis)
        for M in mats:
            for b in basis:
                rows.append([sum(M[i][j] * b[j] for j in range(len(b))) for i in range(len(M))])
        new = il.hnf(rows)
        if new == basis:
            break
        basis = new
    return len(basis)
