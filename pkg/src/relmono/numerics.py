"""Numerical foundation: adaptive ODE transport, contour quadrature, the
hypergeometric seed ``2F1(1/2, 1/2; 1; z)``, Carlson's ``R_F`` and rational
recognition.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    BranchCut,
    ConfigInvalid,
    DegenerateArguments,
    NoConvergence,
    NonFinite,
    StepUnderflow,
)
from .geometry import Path

__all__ = [
    "Tolerance",
    "integrate_ode",
    "contour_integral",
    "hyper_2f1_halfhalfone",
    "hyper_2f1_halfhalfone_deriv",
    "carlson_rf",
    "rational_reconstruct",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerances shared by every layer.

    ``ode_tol`` bounds the local truncation error per integrator step,
    ``round_tol`` is the largest accepted distance of a computed matrix or
    vector entry from the nearest integer, ``rel_tol`` is the agreement
    required between independent numerical methods. ``precision`` selects the
    integrator's working dtype (``"double"`` or ``"extended"``).
    """

    ode_tol: float = 1e-12
    round_tol: float = 1e-4
    rel_tol: float = 1e-8
    precision: str = "double"

    def __post_init__(self):
        if not (0 < self.ode_tol < 0.5):
            raise ConfigInvalid(f"ode_tol must lie in (0, 0.5), got {self.ode_tol}")
        if not (0 < self.round_tol < 0.5):
            raise ConfigInvalid(f"round_tol must lie in (0, 0.5), got {self.round_tol}")
        if not (self.rel_tol > 0):
            raise ConfigInvalid(f"rel_tol must be positive, got {self.rel_tol}")
        if self.precision not in ("double", "extended"):
            raise ConfigInvalid(f"unknown precision {self.precision!r}")

    @property
    def dtype(self):
        return np.clongdouble if self.precision == "extended" else np.complex128

    def halved(self) -> "Tolerance":
        return Tolerance(self.ode_tol / 2, self.round_tol, self.rel_tol, self.precision)

    def to_dict(self) -> dict:
        return {"ode_tol": self.ode_tol, "round_tol": self.round_tol,
                "rel_tol": self.rel_tol, "precision": self.precision}


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

_H_MIN = 1e-13


def _integrate_segment(field, y, seg, tol, dtype, on_step, h_init):
    ode_tol = tol.ode_tol

    def rhs(t, yv):
        z = complex(seg.point(t))
        return np.asarray(field(z, yv), dtype=dtype) * dtype(complex(seg.velocity(t)))

    t = 0.0
    h = h_init
    k1 = rhs(t, y)
    while t < 1.0:
        if h < _H_MIN:
            raise StepUnderflow(f"step size underflow at z={complex(seg.point(t)):.6g}")
        h = min(h, 1.0 - t)
        ks = [k1]
        for i in range(1, 7):
            acc = y.copy()
            for aij, kj in zip(_A[i], ks):
                if aij:
                    acc = acc + (h * aij) * kj
            ks.append(rhs(t + _C[i] * h, acc))
        y_new = acc  # row 7 of the tableau equals the 5th order weights (FSAL)
        err = np.zeros_like(y)
        for ei, ki in zip(_E, ks):
            if ei:
                err = err + (h * ei) * ki
        if not np.all(np.isfinite(y_new)):
            raise NonFinite(f"non-finite state near z={complex(seg.point(t)):.6g}")
        mag = np.maximum(np.abs(y), np.abs(y_new))
        floor = 1e-3 * float(np.max(mag)) + 1e-300
        scale = ode_tol * np.maximum(mag, floor)
        ratio = float(np.max(np.abs(err) / scale))
        if ratio <= 1.0 and (on_step is None or on_step(t + h, y_new)):
            t += h
            y = y_new
            k1 = ks[6]
            grow = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            h *= grow
        elif ratio <= 1.0:
            h *= 0.5
        else:
            h *= max(0.1, 0.9 * ratio ** -0.25)
    return y, h


def integrate_ode(
    field: Callable,
    y0,
    path: Path,
    tol: Tolerance = Tolerance(),
    on_step: Optional[Callable] = None,
) -> np.ndarray:
    """Integrate the holomorphic system ``dy/dz = field(z, y)`` along ``path``.

    Each segment is integrated in its own parameter with an adaptive
    Dormand-Prince 5(4) stepper; rejected steps are retried with a smaller
    step. ``on_step(segment_index, t, y)`` may veto an otherwise acceptable
    step by returning False, which halves the step.
    """
    dtype = tol.dtype
    y = np.array(y0, dtype=dtype)
    if not np.all(np.isfinite(y)):
        raise NonFinite("initial state is not finite")
    h = 0.05
    for idx, seg in enumerate(path.segments):
        hook = None if on_step is None else (lambda t, yv, _i=idx: on_step(_i, t, yv))
        y, h = _integrate_segment(field, y, seg, tol, dtype, hook, max(min(h, 0.05), 1e-4))
    return y


def _trapezoid_closed(f, contour, rel_tol, n0=32, n_max=2 ** 16):
    prev = None
    n = n0
    while n <= n_max:
        ts = np.arange(n) / n
        vals = np.asarray(f(contour.point(ts))) * contour.velocity(ts)
        val = complex(np.mean(vals))
        if not cmath.isfinite(val):
            raise NonFinite("non-finite integrand on contour")
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        if prev is not None and abs(val) < 1e-300 and abs(prev) < 1e-300:
            return 0j
        if prev is not None and abs(val - prev) <= 1e-15 * n * float(np.max(np.abs(vals))):
            return val
        prev = val
        n *= 2
    raise NoConvergence("periodic trapezoid rule did not converge")


def contour_integral(f: Callable, contour, tol: float = 1e-10) -> complex:
    """Integrate ``f(z) dz`` along a contour.

    Smooth closed curves (full circles, ellipses) use the periodic trapezoid
    rule with node doubling, which converges geometrically for analytic
    integrands; ``f`` must then accept numpy arrays. Open paths are integrated
    segment by segment with adaptive Gauss-Kronrod quadrature.
    """
    segments = contour.segments if isinstance(contour, Path) else (contour,)
    total = 0j
    for seg in segments:
        if getattr(seg, "closed", False):
            total += _trapezoid_closed(f, seg, tol)
            continue

        def g(t, _s=seg):
            return complex(f(complex(_s.point(t)))) * complex(_s.velocity(t))

        val, err = integrate.quad(g, 0.0, 1.0, complex_func=True, epsabs=0.0,
                                  epsrel=tol, limit=400)
        if not cmath.isfinite(val):
            raise NonFinite("non-finite contour integral")
        err = abs(complex(err))  # complex_func reports (real, imag) estimates as one complex
        if err > max(10 * tol * abs(val), 1e-14):
            raise NoConvergence(f"quadrature error estimate {err:.3g} above tolerance")
        total += val
    return complex(total)


def _check_cut(z: complex):
    if not cmath.isfinite(z):
        raise NonFinite("argument is not finite")
    if z.imag == 0 and z.real >= 1:
        raise BranchCut(f"2F1(1/2,1/2;1;z) is not analytic at z={z.real} on [1, inf)")


def _series(z: complex) -> complex:
    term, total, n = 1 + 0j, 1 + 0j, 0
    while abs(term) > 1e-17 * abs(total):
        term *= ((n + 0.5) / (n + 1)) ** 2 * z
        total += term
        n += 1
        if n > 10000:
            raise NoConvergence("hypergeometric series did not converge")
    return total


def _agm(a: complex, b: complex) -> complex:
    for _ in range(100):
        if abs(a - b) <= 1e-14 * abs(a):
            # quadratic convergence: one more step reaches rounding level
            return 0.5 * (a + b)
        a, g = 0.5 * (a + b), cmath.sqrt(a * b)
        # "right" choice of the geometric mean keeps the analytic branch
        b = g if abs(a - g) <= abs(a + g) else -g
    raise NoConvergence("AGM iteration did not converge")


def hyper_2f1_halfhalfone(z) -> complex:
    """Principal branch of ``2F1(1/2, 1/2; 1; z)`` on ``C \\ [1, inf)``.

    Direct power series inside ``|z| <= 1/2``; elsewhere the quadratic
    (Landen) transformation iterated to convergence, i.e.
    ``1 / AGM(1, sqrt(1 - z))`` with the right choice of square roots.
    """
    z = complex(z)
    _check_cut(z)
    if abs(z) <= 0.5:
        return _series(z)
    return 1.0 / _agm(1 + 0j, cmath.sqrt(1 - z))


def hyper_2f1_halfhalfone_deriv(z) -> complex:
    """Derivative in ``z``, by the Cauchy integral on a circle clear of the cut."""
    z = complex(z)
    _check_cut(z)
    dist = abs(z - 1) if z.real <= 1 else abs(z.imag)
    r = 0.25 * dist
    n = 48
    acc = 0j
    for k in range(n):
        e = cmath.exp(2j * math.pi * k / n)
        acc += hyper_2f1_halfhalfone(z + r * e) / e
    return acc / (n * r)


def carlson_rf(x, y, z) -> complex:
    """Carlson's symmetric elliptic integral ``R_F(x, y, z)``.

    Duplication iteration followed by the fifth order Taylor correction.
    Arguments must avoid the closed negative real axis and at most one of
    them may vanish.
    """
    args = [complex(x), complex(y), complex(z)]
    if sum(1 for a in args if a == 0) > 1:
        raise DegenerateArguments("R_F needs at most one zero argument")
    for a in args:
        if not cmath.isfinite(a):
            raise NonFinite("R_F argument is not finite")
        if a.imag == 0 and a.real < 0:
            raise DegenerateArguments(f"R_F argument {a.real} lies on the branch cut")
    xt, yt, zt = args
    a0 = (xt + yt + zt) / 3
    q = (3e-16) ** (-1 / 6) * max(abs(a0 - xt), abs(a0 - yt), abs(a0 - zt))
    a = a0
    f = 1.0
    for _ in range(200):
        if f * q < abs(a):
            break
        sx, sy, sz = cmath.sqrt(xt), cmath.sqrt(yt), cmath.sqrt(zt)
        lam = sx * sy + sx * sz + sy * sz
        xt, yt, zt = (xt + lam) / 4, (yt + lam) / 4, (zt + lam) / 4
        a = (a + lam) / 4
        f /= 4
    else:
        raise NoConvergence("R_F duplication did not converge")
    X = (a0 - args[0]) * f / a
    Y = (a0 - args[1]) * f / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / cmath.sqrt(a)


def rational_reconstruct(x: float, max_den: int, tol: float = 1e-9) -> Optional[Fraction]:
    """Best rational ``p/q`` with ``q <= max_den`` if it lies within ``tol`` of ``x``."""
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    if not math.isfinite(x):
        return None
    frac = Fraction(x).limit_denominator(max_den)
    return frac if abs(x - frac) <= tol else None
