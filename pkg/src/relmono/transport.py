"""Analytic continuation of period frames and logarithm determinations.

Conventions (fixed once for the whole package):

* ``Omega`` is the ``2g x g`` period stack of a :class:`Frame`.
* For a loop ``h`` at the basepoint, ``A_h`` is defined by
  ``Omega_end = A_h Omega_start``; the monodromy representation is
  ``rho(h) = A_h^T``. Because words are traversed right to left, ``rho`` is
  a homomorphism.
* The cocycle is the integer row vector ``c(h)`` with
  ``log_end - log_start = c(h) Omega_start``. It obeys
  ``c(h1 h2) = c(h1) + c(h2) rho(h1)^T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import elliptic
from .errors import (
    BranchMatchAmbiguity,
    BranchUndefined,
    ConfigInvalid,
    DegenerateFrame,
    RoundingFailure,
    StepUnderflow,
)
from .family import FamilySpec, SectionSpec, _compiled, period_field, seed_frame
from .frame import Frame
from .geometry import Path
from .numerics import Tolerance, integrate_ode
from .topology import GeneratorSet, _match_sheet, keyhole_generators, realize_word

__all__ = [
    "Frame", "MonodromyOutcome", "CocycleOutcome", "LoopOutcome",
    "continue_periods", "log_at", "continue_logarithm",
    "loop_monodromy", "loop_cocycle", "loop_transport", "real_rows", "real_solve",
    "symplectic_form", "sheet_cocycle_table",
]


@dataclass(frozen=True)
class MonodromyOutcome:
    matrix: tuple  # rho(h) = A_h^T, row-major integer tuples
    residual: float

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=object)


@dataclass(frozen=True)
class CocycleOutcome:
    vector: tuple
    residual: float


@dataclass(frozen=True)
class LoopOutcome:
    """Joint transport result along a path from the basepoint back to it.

    ``vector`` is measured against the principal logarithm on ``end_sheet``,
    so for paths that change sheets it is the groupoid datum ``d(i, path)``.
    """

    monodromy: MonodromyOutcome
    cocycle: Optional[CocycleOutcome]
    start_sheet: int
    end_sheet: int


def symplectic_form(g: int) -> np.ndarray:
    P = np.zeros((2 * g, 2 * g), dtype=int)
    for k in range(g):
        P[2 * k, 2 * k + 1] = 1
        P[2 * k + 1, 2 * k] = -1
    return P


def real_rows(periods: np.ndarray) -> np.ndarray:
    """``2g x 2g`` real matrix whose rows are ``(Re w_i, Im w_i)``."""
    return np.hstack([periods.real, periods.imag]).astype(float)


def real_solve(target: np.ndarray, periods: np.ndarray):
    """Real coefficients ``x`` with ``x . Omega = target`` and the solve residual."""
    R = real_rows(periods)
    if np.linalg.cond(R) > 1e12:
        raise DegenerateFrame("period vectors are nearly R-linearly dependent")
    t = np.concatenate([np.asarray(target).real, np.asarray(target).imag]).astype(float)
    x = np.linalg.solve(R.T, t)
    resid = float(np.max(np.abs(x @ R - t), initial=0.0)) / max(1.0, float(np.max(np.abs(t), initial=0.0)))
    return x, resid


def _round(values: np.ndarray, tol: Tolerance, what: str):
    rounded = np.rint(values)
    residual = float(np.max(np.abs(values - rounded), initial=0.0))
    if residual > tol.round_tol:
        raise RoundingFailure(f"{what}: distance to integers {residual:.3g} exceeds round_tol {tol.round_tol:g}")
    return rounded.astype(int), residual


# --------------------------------------------------------------------------
# logarithms


def _principal_log(x, y, m, w1, w2):
    u = elliptic.elliptic_log(x, y, m)
    a, b = elliptic.real_coordinates(u, w1, w2)
    return u - math.floor(a + 0.5) * w1 - math.floor(b + 0.5) * w2


def log_at(family: FamilySpec, section: SectionSpec, frame: Frame,
           tol: Tolerance = Tolerance()) -> Frame:
    """Populate ``frame.log`` with the determination in the centred
    fundamental parallelogram of the frame's lattice."""
    names = family.cover.variables if family.cover is not None else ()
    funcs = _compiled(section, names)
    z = frame.at
    logs = np.zeros(family.g, dtype=complex)
    for k, fn in enumerate(funcs):
        if fn is None:
            continue
        x, y = _eval_point(fn, z, frame.aux)
        m = complex(family.factors[k].m_of(z))
        if elliptic.on_curve_residual(x, y, m) > tol.rel_tol:
            raise BranchUndefined(f"factor {k}: section is off the curve at lam={z}")
        w1, w2 = frame.pair(k)
        logs[k] = _principal_log(x, y, m, w1, w2)
    return frame.with_(log=logs)


def _eval_point(fn, z, aux):
    try:
        x = complex(fn[0](z, *aux))
        y = complex(fn[1](z, *aux))
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise BranchUndefined(f"section is singular at lam={z}: {exc}") from exc
    if not (math.isfinite(abs(x)) and math.isfinite(abs(y))):
        raise BranchUndefined(f"section is singular at lam={z}")
    return x, y


# --------------------------------------------------------------------------
# continuation


class _Tracker:
    """Step hook: follows cover variables, section branches and log
    determinations, vetoing steps that are too coarse to match reliably."""

    def __init__(self, family, section, path, frame0, tol):
        self.family = family
        self.cover = family.cover
        self.path = path
        self.tol = tol
        self.aux = tuple(frame0.aux)
        self.z = frame0.at
        self.funcs = None
        if section is not None:
            names = self.cover.variables if self.cover is not None else ()
            self.funcs = _compiled(section, names)
            if frame0.log is None:
                raise ConfigInvalid("continue_logarithm needs a frame with a log determination")
            self.logs = np.array(frame0.log, dtype=complex)
            self.prev = None  # (z, logs) one step back
            self.ys = [None if fn is None else _eval_point(fn, self.z, self.aux)[1] for fn in self.funcs]

    def __call__(self, seg_idx, t, y):
        z = complex(self.path.segments[seg_idx].point(t))
        aux = self.aux
        if self.cover is not None:
            aux, ratio = self.cover.follow(z, self.aux)
            if ratio > 0.3:
                return False
        if self.funcs is None:
            self.aux, self.z = aux, z
            return True
        new_logs = self.logs.copy()
        new_ys = list(self.ys)
        for k, fn in enumerate(self.funcs):
            if fn is None:
                continue
            x, yy = _eval_point(fn, z, aux)
            # y follows the previous value (continuity beats principal branches)
            if abs(yy + self.ys[k]) < abs(yy - self.ys[k]):
                yy = -yy
            new_ys[k] = yy
            m = complex(self.family.factors[k].m_of(z))
            w1, w2 = complex(y[4 * k]), complex(y[4 * k + 2])
            u0 = elliptic.elliptic_log(x, yy, m)
            if self.prev is None or self.prev[0] == self.z:
                pred = self.logs[k]
            else:
                z0, l0 = self.prev
                pred = self.logs[k] + (self.logs[k] - l0[k]) * (z - self.z) / (self.z - z0)
            a, b = elliptic.real_coordinates(pred - u0, w1, w2)
            cand = u0 + round(a) * w1 + round(b) * w2
            v1, v2 = elliptic.reduced_basis(w1, w2)
            limit = 0.25 * min(elliptic.covering_radius(v1, v2), abs(v1))
            if abs(cand - pred) > limit:
                return False
            new_logs[k] = cand
        self.prev = (self.z, self.logs)
        self.logs, self.ys, self.aux, self.z = new_logs, new_ys, aux, z
        return True


def _continue(family, section, path, frame0, tol):
    if abs(frame0.at - path.start) > 1e-9 * (1 + abs(path.start)):
        raise ConfigInvalid("frame does not sit at the start of the path")
    if not path.segments:
        return frame0
    tracker = _Tracker(family, section, path, frame0, tol)
    y0 = frame0.state.reshape(-1)
    hook = tracker if (section is not None or family.cover is not None) else None
    try:
        y = integrate_ode(period_field(family.factors), y0, path, tol, on_step=hook)
    except StepUnderflow as exc:
        if section is not None:
            raise BranchMatchAmbiguity(f"log matching could not be refined: {exc}") from exc
        raise
    state = np.asarray(y, dtype=complex).reshape(family.g, 4)
    sheet = frame0.sheet
    if family.cover is not None:
        sheet = _match_sheet(tracker.aux, family.cover.solve(path.end), tol)
    log = tracker.logs.copy() if section is not None else None
    return Frame(state, at=path.end, sheet=sheet, aux=tracker.aux, log=log)


def continue_periods(family: FamilySpec, path: Path, frame0: Frame,
                     tol: Tolerance = Tolerance()) -> Frame:
    """Transport the period frame (and cover values) along ``path``."""
    out = _continue(family, None, path, frame0, tol)
    return out.with_(log=None) if out is not frame0 else frame0


def continue_logarithm(family: FamilySpec, section: SectionSpec, path: Path,
                       frame0: Frame, tol: Tolerance = Tolerance()) -> Frame:
    """Transport periods and the log determination jointly along ``path``."""
    return _continue(family, section, path, frame0, tol)


# --------------------------------------------------------------------------
# loops


def _as_path(family: FamilySpec, loop: Union[Path, Sequence[int]], gens: Optional[GeneratorSet]):
    if isinstance(loop, Path):
        return loop
    if gens is None:
        gens = keyhole_generators(family.punctured_base)
    return realize_word(loop, gens)


def loop_transport(family: FamilySpec, loop, section: Optional[SectionSpec] = None,
                   tol: Tolerance = Tolerance(), gens: Optional[GeneratorSet] = None,
                   start_sheet: int = 0, start: Optional[Frame] = None) -> LoopOutcome:
    """Transport around a closed path (or word) at the basepoint and round."""
    path = _as_path(family, loop, gens)
    if not path.is_closed or abs(path.start - family.base.basepoint) > 1e-9:
        raise ConfigInvalid("loops must start and end at the basepoint")
    f0 = start if start is not None else seed_frame(family, tol=tol, sheet=start_sheet)
    if section is not None and f0.log is None:
        f0 = log_at(family, section, f0, tol)
    f1 = _continue(family, section, path, f0, tol)
    P0 = f0.periods
    A_real = real_rows(f1.periods) @ np.linalg.inv(real_rows(P0))
    A, res_m = _round(A_real, tol, "monodromy matrix")
    rho = A.T
    mono = MonodromyOutcome(tuple(tuple(int(v) for v in row) for row in rho), res_m)
    coc = None
    if section is not None:
        ref = f0 if f1.sheet == f0.sheet else log_at(
            family, section, seed_frame(family, tol=tol, sheet=f1.sheet), tol)
        diff = f1.log - ref.log
        x, solve_res = real_solve(diff, P0)
        vec, res_c = _round(x, tol, "cocycle vector")
        coc = CocycleOutcome(tuple(int(v) for v in vec), max(res_c, solve_res))
    return LoopOutcome(mono, coc, f0.sheet, f1.sheet)


def loop_monodromy(family: FamilySpec, loop, tol: Tolerance = Tolerance(),
                   gens: Optional[GeneratorSet] = None) -> MonodromyOutcome:
    return loop_transport(family, loop, None, tol, gens).monodromy


def loop_cocycle(family: FamilySpec, section: SectionSpec, loop,
                 tol: Tolerance = Tolerance(), gens: Optional[GeneratorSet] = None,
                 start_sheet: int = 0) -> CocycleOutcome:
    out = loop_transport(family, loop, section, tol, gens, start_sheet)
    if out.end_sheet != out.start_sheet:
        raise ConfigInvalid(f"loop moves sheet {out.start_sheet} to {out.end_sheet}; "
                            "the cocycle is defined on stabilizer words")
    return out.cocycle


def sheet_cocycle_table(family: FamilySpec, section: Optional[SectionSpec] = None,
                        tol: Tolerance = Tolerance(), gens: Optional[GeneratorSet] = None):
    """Transport every keyhole generator from every sheet.

    Returns a :class:`~relmono.monodromy.SheetCocycleTable`; without a
    section the cocycle vectors are zero.
    """
    from .monodromy import SheetCocycleTable

    if gens is None:
        gens = keyhole_generators(family.punctured_base)
    deg = family.degree
    n = 2 * family.g
    rhos, perms, ds = [], [], []
    for i in range(len(gens)):
        rho = None
        perm, d = [], []
        for s in range(deg):
            if section is None and deg > 1 and s > 0:
                # periods do not see the sheet; only the permutation is needed
                from .topology import lift_path
                perm.append(lift_path(family.cover, gens.loops[i], s, tol)[1])
                d.append((0,) * n)
                continue
            out = loop_transport(family, [i + 1], section, tol, gens, start_sheet=s)
            if rho is not None and out.monodromy.matrix != rho:
                raise RoundingFailure(f"generator {i + 1}: monodromy differs between sheets")
            rho = out.monodromy.matrix
            perm.append(out.end_sheet)
            d.append(out.cocycle.vector if out.cocycle is not None else (0,) * n)
        if sorted(perm) != list(range(deg)):
            raise RoundingFailure(f"generator {i + 1} does not permute the sheets")
        rhos.append(rho)
        perms.append(tuple(perm))
        ds.append(tuple(d))
    return SheetCocycleTable(family.g, tuple(rhos), tuple(perms), tuple(ds))
