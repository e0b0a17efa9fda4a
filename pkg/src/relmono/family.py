"""Families of Legendre curves over punctured lines, their covers and sections.

A family is a fiber product of Legendre factors ``y^2 = x(x-1)(x-m(lam))``
over the ``lam``-line, optionally pulled back to a finite cover given by a
triangular tower of polynomial equations in auxiliary variables. Sections
are per-factor coordinate expressions in ``lam`` and the cover variables.
Expressions are strings parsed with sympy.
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import sympy as sp

from . import elliptic
from .errors import (
    BranchCut,
    BranchUndefined,
    ConfigInvalid,
    NoConvergence,
    NumericalFailure,
    OracleMismatch,
    RamifiedFiber,
)
from .frame import Frame
from .geometry import Line, Path
from .numerics import Tolerance, integrate_ode

LAM = sp.Symbol("lam")
_RESERVED = {"lam", "I", "E", "pi", "sqrt"}


def _parse(expr: str, names: Sequence[str]) -> sp.Expr:
    local = {n: sp.Symbol(n) for n in names}
    local["lam"] = LAM
    try:
        out = sp.sympify(expr, locals=local)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigInvalid(f"cannot parse expression {expr!r}: {exc}") from exc
    allowed = {LAM, *local.values()}
    stray = out.free_symbols - allowed
    if stray:
        raise ConfigInvalid(f"expression {expr!r} uses unknown symbols {sorted(map(str, stray))}")
    return out


def _lambdify(args, expr):
    return sp.lambdify(args, expr, modules=["cmath", "math"])


def _poly_roots(poly: sp.Poly) -> list:
    """Distinct complex roots (square-free part, high-precision sympy roots)."""
    if poly.degree() <= 0:
        return []
    try:
        poly = poly.sqf_part()
        roots = sp.Poly(poly.as_expr(), poly.gens[0]).nroots(n=30, maxsteps=200)
    except (sp.polys.polyerrors.PolynomialError, NotImplementedError):
        coeffs = [complex(c) for c in poly.all_coeffs()]
        return [complex(r) for r in np.roots(coeffs)]
    return [complex(r) for r in roots]


def _dedup(points, tol=1e-9):
    out = []
    for p in sorted(points, key=lambda c: (round(c.real, 9), round(c.imag, 9))):
        if all(abs(p - q) > tol * (1 + abs(p)) for q in out):
            out.append(p)
    return out


def _clean(z: complex) -> complex:
    re = 0.0 if abs(z.real) < 1e-12 else z.real
    im = 0.0 if abs(z.imag) < 1e-12 else z.imag
    return complex(re, im)


# --------------------------------------------------------------------------
# Specs


@dataclass(frozen=True)
class EllipticFactor:
    """Legendre factor with parameter map ``m(lam)`` (a rational function)."""

    m: str

    @cached_property
    def expr(self) -> sp.Expr:
        e = _parse(self.m, ())
        if not e.has(LAM):
            raise ConfigInvalid(f"factor m={self.m!r} is constant (isotrivial)")
        if not e.is_rational_function(LAM):
            raise ConfigInvalid(f"factor m={self.m!r} is not a rational function of lam")
        return sp.cancel(e)

    @cached_property
    def m_of(self):
        return _lambdify([LAM], self.expr)

    @cached_property
    def dm_of(self):
        return _lambdify([LAM], sp.diff(self.expr, LAM))

    @cached_property
    def linear(self):
        """``(a, b)`` when ``m = a + b lam`` (fast path), else None."""
        e = sp.expand(self.expr)
        if e.is_polynomial(LAM) and sp.degree(e, LAM) == 1:
            p = sp.Poly(e, LAM)
            return complex(p.coeff_monomial(1)), complex(p.coeff_monomial(LAM))
        return None

    def bad_points(self) -> list:
        num, den = sp.fraction(sp.together(self.expr))
        num1 = sp.expand(num - den)
        pts = []
        for poly in (num, num1, den):
            p = sp.Poly(poly, LAM)
            if p.degree() > 0:
                pts.extend(_poly_roots(p))
        return pts

    def to_dict(self):
        return {"m": self.m}


@dataclass(frozen=True)
class PuncturedBase:
    """Punctured ``lam``-line: finite punctures (``inf`` is implicit), basepoint, clearance."""

    punctures: tuple = ()
    basepoint: complex = complex(0.5, 0.5)
    clearance: float = 0.1

    def __post_init__(self):
        if self.clearance <= 0:
            raise ConfigInvalid("clearance must be positive")
        for p in self.punctures:
            if abs(complex(p) - self.basepoint) <= self.clearance:
                raise ConfigInvalid(f"basepoint {self.basepoint} lies within clearance of puncture {p}")

    def with_punctures(self, punctures) -> "PuncturedBase":
        return PuncturedBase(tuple(punctures), self.basepoint, self.clearance)

    def to_dict(self):
        return {"punctures": [[p.real, p.imag] for p in map(complex, self.punctures)],
                "basepoint": [self.basepoint.real, self.basepoint.imag],
                "clearance": self.clearance}


@dataclass(frozen=True)
class CoverSpec:
    """Triangular tower: equation ``k`` is a polynomial in ``variables[k]``
    whose coefficients involve ``lam`` and the earlier variables."""

    variables: tuple
    equations: tuple

    def __post_init__(self):
        if len(self.variables) != len(self.equations):
            raise ConfigInvalid("cover needs exactly one equation per auxiliary variable")
        for v in self.variables:
            if not str(v).isidentifier() or v in _RESERVED:
                raise ConfigInvalid(f"invalid auxiliary variable name {v!r}")

    @cached_property
    def symbols(self):
        return [sp.Symbol(v) for v in self.variables]

    @cached_property
    def polys(self):
        out = []
        for k, eq in enumerate(self.equations):
            e = _parse(eq, self.variables[: k + 1])
            later = set(self.symbols[k + 1:]) & e.free_symbols
            if later:
                raise ConfigInvalid(f"equation {eq!r} uses later variables {later}")
            poly = sp.Poly(sp.expand(e), self.symbols[k])
            if poly.degree() < 1:
                raise ConfigInvalid(f"equation {eq!r} does not involve {self.variables[k]}")
            out.append(poly)
        return out

    @cached_property
    def _coeff_funcs(self):
        funcs = []
        for k, poly in enumerate(self.polys):
            args = [LAM, *self.symbols[:k]]
            funcs.append([_lambdify(args, c) for c in poly.all_coeffs()])
        return funcs

    @property
    def degree(self) -> int:
        return int(np.prod([p.degree() for p in self.polys])) if self.polys else 1

    def prefix(self, n: int) -> "CoverSpec":
        return CoverSpec(tuple(self.variables[:n]), tuple(self.equations[:n]))

    def level_roots(self, k: int, lam: complex, prefix: Sequence[complex]) -> list:
        coeffs = [complex(f(lam, *prefix)) for f in self._coeff_funcs[k]]
        if coeffs[0] == 0:
            raise RamifiedFiber(f"leading coefficient of {self.equations[k]!r} vanishes at lam={lam}")
        if len(coeffs) == 3:
            a, b, c = coeffs
            s = cmath.sqrt(b * b - 4 * a * c)
            return [(-b + s) / (2 * a), (-b - s) / (2 * a)]
        if len(coeffs) == 2:
            return [-coeffs[1] / coeffs[0]]
        return [complex(r) for r in np.roots(coeffs)]

    def solve(self, lam: complex) -> list:
        """All fiber points over ``lam``, sorted lexicographically by (Re, Im)."""
        sols = [()]
        for k in range(len(self.polys)):
            sols = [s + (r,) for s in sols for r in self.level_roots(k, lam, s)]
        return sorted(sols, key=lambda s: tuple(v for z in s for v in (round(z.real, 10), round(z.imag, 10))))

    def follow(self, lam: complex, previous: Sequence[complex]):
        """Solution nearest to ``previous`` at ``lam`` and the worst ratio of
        nearest to second-nearest root distance over the tower levels."""
        vals = []
        worst = 0.0
        for k in range(len(self.polys)):
            roots = self.level_roots(k, lam, vals)
            dists = sorted((abs(r - previous[k]), i) for i, r in enumerate(roots))
            vals.append(roots[dists[0][1]])
            if len(dists) > 1:
                second = dists[1][0]
                worst = max(worst, dists[0][0] / second if second > 0 else math.inf)
        return tuple(vals), worst

    def branch_points(self) -> list:
        pts = []
        for k, poly in enumerate(self.polys):
            var = self.symbols[k]
            cands = [sp.discriminant(poly.as_expr(), var) if poly.degree() > 1 else sp.Integer(1),
                     poly.LC()]
            for c in cands:
                expr = sp.expand(c)
                for j in range(k - 1, -1, -1):
                    if expr.has(self.symbols[j]):
                        expr = sp.resultant(expr, self.polys[j].as_expr(), self.symbols[j])
                expr = sp.expand(expr)
                if expr.free_symbols - {LAM}:
                    raise ConfigInvalid("could not eliminate cover variables for the branch locus")
                if expr.has(LAM):
                    pts.extend(_poly_roots(sp.Poly(expr, LAM)))
                elif expr == 0:
                    raise ConfigInvalid(f"equation {self.equations[k]!r} is degenerate over the whole base")
        return pts

    def to_dict(self):
        return {"variables": list(self.variables), "equations": list(self.equations)}


@dataclass(frozen=True)
class FamilySpec:
    factors: tuple
    base: PuncturedBase
    cover: Optional[CoverSpec] = None

    def __post_init__(self):
        if not self.factors:
            raise ConfigInvalid("a family needs at least one elliptic factor")
        for f in self.factors:
            f.expr  # noqa: B018  (validates the expression eagerly)
        if self.cover is not None:
            self.cover.polys  # noqa: B018
        bp = self.base.basepoint
        for p in self.punctures:
            if abs(p - bp) <= self.base.clearance:
                raise ConfigInvalid(f"basepoint {bp} lies within clearance of puncture {p}")

    @property
    def g(self) -> int:
        return len(self.factors)

    @property
    def degree(self) -> int:
        return 1 if self.cover is None else self.cover.degree

    @cached_property
    def punctures(self) -> tuple:
        return tuple(p for p in punctures_of(self) if p is not math.inf)

    @property
    def punctured_base(self) -> PuncturedBase:
        return self.base.with_punctures(self.punctures)

    @cached_property
    def sheets(self) -> list:
        """Cover fiber over the basepoint in canonical order (sheet labels 0..deg-1)."""
        if self.cover is None:
            return [()]
        sols = self.cover.solve(self.base.basepoint)
        if len(sols) != self.cover.degree:
            raise ConfigInvalid("cover degree does not match the number of solutions at the basepoint")
        return sols

    def m_values(self, lam: complex) -> list:
        return [complex(f.m_of(lam)) for f in self.factors]

    def aux_at(self, lam: complex, sheet: int = 0) -> tuple:
        """Cover values at ``lam`` on ``sheet``, continued along the straight
        segment from the basepoint."""
        if self.cover is None:
            return ()
        vals = self.sheets[sheet]
        start = self.base.basepoint
        if lam == start:
            return vals
        return follow_cover(self.cover, Path.from_segments([Line(start, lam)]), vals)

    def to_dict(self):
        out = {"factors": [f.to_dict() for f in self.factors], "base": self.base.to_dict()}
        if self.cover is not None:
            out["cover"] = self.cover.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        try:
            factors = tuple(EllipticFactor(str(f["m"])) for f in data["factors"])
            b = data.get("base", {})
            base = PuncturedBase(
                tuple(_complex(p) for p in b.get("punctures", [])),
                _complex(b.get("basepoint", [0.5, 0.5])),
                float(b.get("clearance", 0.1)),
            )
            cov = data.get("cover")
            cover = None
            if cov:
                cover = CoverSpec(tuple(cov["variables"]), tuple(cov["equations"]))
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed family: {exc}") from exc
        return cls(factors, base, cover)


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigInvalid(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


@dataclass(frozen=True)
class SectionSpec:
    """Per-factor coordinates; ``None`` marks the zero section of a factor."""

    points: tuple
    torsion_hint: Optional[int] = None

    @classmethod
    def zero(cls, g: int) -> "SectionSpec":
        return cls(tuple([None] * g))

    def compiled(self, variables: Sequence[str]):
        args = [LAM, *[sp.Symbol(v) for v in variables]]
        out = []
        for pt in self.points:
            if pt is None:
                out.append(None)
                continue
            x = _parse(pt[0], variables)
            y = _parse(pt[1], variables)
            out.append((_lambdify(args, x), _lambdify(args, y)))
        return out

    def free_variables(self) -> set:
        names = set()
        for pt in self.points:
            if pt is None:
                continue
            for e in pt:
                names |= {str(s) for s in sp.sympify(e).free_symbols}
        return names - {"lam"}

    def to_dict(self):
        pts = ["zero" if p is None else {"x": p[0], "y": p[1]} for p in self.points]
        out = {"points": pts}
        if self.torsion_hint is not None:
            out["torsion_hint"] = self.torsion_hint
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SectionSpec":
        try:
            pts = []
            for p in data["points"]:
                if p in ("zero", None):
                    pts.append(None)
                else:
                    pts.append((str(p["x"]), str(p["y"])))
            hint = data.get("torsion_hint")
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed section: {exc}") from exc
        return cls(tuple(pts), None if hint is None else int(hint))


@dataclass(frozen=True)
class FiberPoint:
    points: tuple  # per factor (x, y) or None
    sheet: int = 0

    @property
    def is_zero(self) -> bool:
        return all(p is None for p in self.points)


# --------------------------------------------------------------------------
# Operations


def punctures_of(family: FamilySpec) -> list:
    """Bad fibers of every factor, cover branch points and configured extra
    punctures, deduplicated and sorted, followed by ``math.inf``."""
    pts = []
    for f in family.factors:
        pts.extend(f.bad_points())
    if family.cover is not None:
        pts.extend(family.cover.branch_points())
    pts.extend(complex(p) for p in family.base.punctures)
    return [_clean(p) for p in _dedup(pts)] + [math.inf]


def follow_cover(cover: CoverSpec, path: Path, start_values, max_ratio: float = 0.3):
    """Continue cover values along ``path`` by nearest-root tracking."""
    vals = tuple(start_values)
    for seg in path.segments:
        t, h = 0.0, 1 / 16
        while t < 1.0:
            h = min(h, 1.0 - t)
            new, ratio = cover.follow(complex(seg.point(t + h)), vals)
            if ratio > max_ratio:
                h /= 2
                if h < 1e-12:
                    raise NumericalFailure("cover tracking step underflow near a branch point")
                continue
            vals = new
            t += h
            h *= 1.5
    return vals


def seed_frame(family: FamilySpec, at: Optional[complex] = None,
               tol: Tolerance = Tolerance(), sheet: int = 0) -> Frame:
    """Period frame at ``at`` (default: basepoint) from the hypergeometric
    seed, cross-checked factor by factor against contour integration."""
    at = family.base.basepoint if at is None else complex(at)
    state = []
    for f in family.factors:
        m = complex(f.m_of(at))
        if abs(m) < 1e-12 or abs(m - 1) < 1e-12 or not cmath.isfinite(m):
            raise OracleMismatch(f"periods diverge at lam={at} (bad fiber)")
        try:
            wa, wb, dwa, dwb = _seed_or_nudge(f, at, tol)
            ca, cb = elliptic.contour_periods(m, tol=min(1e-12, tol.rel_tol))
        except (NoConvergence, BranchCut) as exc:
            raise OracleMismatch(f"period oracles failed at lam={at}: {exc}") from exc
        for seeded, quad in ((wa, ca), (wb, cb)):
            err = min(abs(seeded - quad), abs(seeded + quad)) / abs(seeded)
            if err > tol.rel_tol:
                raise OracleMismatch(f"seeded and contour periods differ by {err:.3g} at lam={at}")
        state.append((wa, dwa, wb, dwb))
    aux = family.aux_at(at, sheet) if family.cover is not None else ()
    return Frame(np.array(state, dtype=complex), at=at, sheet=sheet, aux=aux)


def _seed_or_nudge(factor: EllipticFactor, at: complex, tol: Tolerance):
    m = complex(factor.m_of(at))
    if not (m.imag == 0 and (m.real <= 0 or m.real >= 1)):
        return elliptic.seed_periods(m)
    # m on a real cut: seed slightly off the line and transport back
    dm = complex(factor.dm_of(at))
    step = 1e-3 * (1j / dm if dm != 0 else 1j)
    start = at + step
    wa, wb, dwa, dwb = elliptic.seed_periods(complex(factor.m_of(start)))
    fld = period_field([factor])
    y = integrate_ode(fld, [wa, dwa, wb, dwb], Path.from_segments([Line(start, at)]), tol)
    return complex(y[0]), complex(y[2]), complex(y[1]), complex(y[3])


def period_field(factors: Sequence[EllipticFactor]):
    """Holomorphic field ``dY/dlam`` for the stacked state
    ``[w_a, dw_a/dm, w_b, dw_b/dm]`` of every factor (Picard-Fuchs)."""
    funcs = []
    for f in factors:
        lin = f.linear
        if lin is not None:
            a, b = lin
            funcs.append((lambda lam, a=a, b=b: a + b * lam, lambda lam, b=b: b))
        else:
            funcs.append((f.m_of, f.dm_of))
    g = len(factors)

    def field(lam, y):
        out = np.empty(4 * g, dtype=y.dtype)
        for k, (mf, dmf) in enumerate(funcs):
            m = mf(lam)
            dm = dmf(lam)
            denom = m * (1 - m)
            c1 = 1 - 2 * m
            wa, dwa, wb, dwb = y[4 * k: 4 * k + 4]
            out[4 * k] = dwa * dm
            out[4 * k + 1] = (0.25 * wa - c1 * dwa) / denom * dm
            out[4 * k + 2] = dwb * dm
            out[4 * k + 3] = (0.25 * wb - c1 * dwb) / denom * dm
        return out

    return field


def eval_section(section: SectionSpec, family: FamilySpec, at: complex,
                 sheet: int = 0, aux: Optional[Sequence[complex]] = None,
                 tol: Tolerance = Tolerance()) -> FiberPoint:
    """Section coordinates at ``at``. Cover values come from ``aux`` when
    given, otherwise from ``sheet`` continued from the basepoint."""
    at = complex(at)
    names = family.cover.variables if family.cover is not None else ()
    if aux is None:
        aux = family.aux_at(at, sheet)
    funcs = _compiled(section, names)
    pts = []
    for k, fn in enumerate(funcs):
        if fn is None:
            pts.append(None)
            continue
        try:
            x = complex(fn[0](at, *aux))
            y = complex(fn[1](at, *aux))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise BranchUndefined(f"section is singular at lam={at}: {exc}") from exc
        if not (cmath.isfinite(x) and cmath.isfinite(y)):
            raise BranchUndefined(f"section is singular at lam={at}")
        m = complex(family.factors[k].m_of(at))
        if elliptic.on_curve_residual(x, y, m) > tol.rel_tol:
            raise BranchUndefined(
                f"factor {k}: point ({x}, {y}) is off the curve at lam={at}")
        pts.append((x, y))
    return FiberPoint(tuple(pts), sheet)


_COMPILED: dict = {}


def _compiled(section: SectionSpec, names):
    key = (section.points, tuple(names))
    fn = _COMPILED.get(key)
    if fn is None:
        fn = section.compiled(names)
        _COMPILED[key] = fn
    return fn


def check_section(section: SectionSpec, family: FamilySpec, n: int = 10,
                  seed: int = 0, tol: Tolerance = Tolerance()) -> float:
    """Largest Weierstrass residual of ``section`` at ``n`` random points and sheets."""
    if len(section.points) != family.g:
        raise ConfigInvalid(f"section has {len(section.points)} factors, family has {family.g}")
    names = family.cover.variables if family.cover is not None else ()
    missing = section.free_variables() - set(names)
    if missing:
        raise ConfigInvalid(f"section uses variables {sorted(missing)} not defined by the cover")
    rng = random.Random(seed)
    funcs = _compiled(section, names)
    worst = 0.0
    for _ in range(n):
        lam = complex(rng.uniform(-3, 3), rng.uniform(0.2, 3))
        sols = family.cover.solve(lam) if family.cover is not None else [()]
        aux = sols[rng.randrange(len(sols))]
        for k, fn in enumerate(funcs):
            if fn is None:
                continue
            x, y = complex(fn[0](lam, *aux)), complex(fn[1](lam, *aux))
            m = complex(family.factors[k].m_of(lam))
            worst = max(worst, elliptic.on_curve_residual(x, y, m))
    if worst > tol.rel_tol:
        raise ConfigInvalid(f"section is not on the curve (residual {worst:.3g})")
    return worst


def pullback_section(cover: Optional[CoverSpec], section_downstairs: SectionSpec,
                     downstairs: Optional[CoverSpec] = None) -> SectionSpec:
    """``q*``: the same coordinate expressions read over the cover.

    ``downstairs`` (a prefix of ``cover``) names the variables the section
    may use; fibers are identified by the identity on coordinates.
    """
    allowed = set(downstairs.variables) if downstairs is not None else set()
    if cover is not None and downstairs is not None:
        if tuple(cover.variables[: len(downstairs.variables)]) != tuple(downstairs.variables):
            raise ConfigInvalid("downstairs cover must be a prefix of the upstairs tower")
    used = section_downstairs.free_variables()
    if not used <= allowed:
        raise ConfigInvalid(f"section uses {sorted(used - allowed)}, not defined downstairs")
    return SectionSpec(section_downstairs.points, section_downstairs.torsion_hint)


def lattice_basis(m: complex):
    """Some basis of the period lattice at parameter ``m`` (not continued)."""
    m = complex(m)
    if m.imag == 0 and (m.real <= 0 or m.real >= 1):
        m = complex(m.real, 1e-300)
    wa, wb, _, _ = elliptic.seed_periods(m)
    return wa, wb


def trace_logs(family: FamilySpec, section: SectionSpec, at: complex,
               down_aux: Sequence[complex] = (), n_down: int = 0,
               tol: Tolerance = Tolerance()):
    """Sum of elliptic logarithms of the section over the fiber of the cover
    ``family.cover -> family.cover.prefix(n_down)`` above ``(at, down_aux)``.

    Returns ``(per-factor log sums, lattice bases, number of fiber points)``.
    """
    at = complex(at)
    cover = family.cover
    sols = cover.solve(at) if cover is not None else [()]
    fiber = [s for s in sols
             if all(abs(s[i] - down_aux[i]) <= 1e-8 * (1 + abs(down_aux[i])) for i in range(n_down))]
    if not fiber:
        raise ConfigInvalid("no cover point lies over the given downstairs point")
    for i, s in enumerate(fiber):
        for t in fiber[i + 1:]:
            if max(abs(a - b) for a, b in zip(s, t)) < 10 * tol.rel_tol:
                raise RamifiedFiber(f"cover is ramified over lam={at}")
    bases = [lattice_basis(f.m_of(at)) for f in family.factors]
    sums = [0j] * family.g
    for aux in fiber:
        pt = eval_section(section, family, at, aux=aux, tol=tol)
        for k, p in enumerate(pt.points):
            if p is not None:
                sums[k] += elliptic.elliptic_log(p[0], p[1], family.factors[k].m_of(at))
    return sums, bases, len(fiber)


def trace_section(family: FamilySpec, section_upstairs: SectionSpec, at: complex,
                  down_aux: Sequence[complex] = (), n_down: int = 0,
                  tol: Tolerance = Tolerance()) -> FiberPoint:
    """``Tr``: group-law sum of the section over the cover fiber above a
    downstairs point, computed as a sum of logarithms and exponentiated."""
    sums, bases, _ = trace_logs(family, section_upstairs, at, down_aux, n_down, tol)
    pts = []
    for k, f in enumerate(family.factors):
        w1, w2 = bases[k]
        pts.append(elliptic.exp_point(sums[k], w1, w2, complex(f.m_of(at)),
                                      zero_tol=max(1e-9, tol.rel_tol)))
    return FiberPoint(tuple(pts))
