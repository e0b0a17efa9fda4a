"""Single Legendre curve ``y^2 = x (x - 1) (x - m)`` with differential ``dx/y``.

Periods, the Picard-Fuchs field, the elliptic logarithm (through Carlson's
``R_F``) and the exponential map (Weierstrass ``p`` from its q-expansion).
Points are ``(x, y)`` pairs; the neutral element is ``None``.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import BranchCut, DegenerateFrame
from .geometry import ConfocalEllipse
from .numerics import (
    carlson_rf,
    contour_integral,
    hyper_2f1_halfhalfone,
    hyper_2f1_halfhalfone_deriv,
)

TWO_PI = 2 * math.pi
_DIRECTIONS = [cmath.exp(0.25j * math.pi * k) for k in range(8)]


def picard_fuchs(m: complex, w: complex, dw: complex) -> complex:
    """Second derivative of a period in ``m``: m(1-m) w'' + (1-2m) w' - w/4 = 0."""
    return (0.25 * w - (1 - 2 * m) * dw) / (m * (1 - m))


def seed_periods(m: complex):
    """Period pair with first derivatives at a parameter value ``m``.

    Returns ``(omega_a, omega_b, d omega_a/dm, d omega_b/dm)`` with
    ``omega_a = 2 pi F(m)`` (cycle around ``[0, m]``) and
    ``omega_b = +-2 pi i F(1 - m)`` (cycle around ``[m, 1]``), the sign chosen
    so that ``Im(omega_b / omega_a) > 0``.
    """
    m = complex(m)
    if m.imag == 0 and (m.real <= 0 or m.real >= 1):
        raise BranchCut(f"seed parameter m={m.real} lies on a real cut; move the basepoint")
    wa = TWO_PI * hyper_2f1_halfhalfone(m)
    dwa = TWO_PI * hyper_2f1_halfhalfone_deriv(m)
    wb = 1j * TWO_PI * hyper_2f1_halfhalfone(1 - m)
    dwb = -1j * TWO_PI * hyper_2f1_halfhalfone_deriv(1 - m)
    if (wb / wa).imag < 0:
        wb, dwb = -wb, -dwb
    return wa, wb, dwa, dwb


def _sqrt_away(e: complex, center: complex):
    """Branch of ``sqrt(z - e)`` with its cut on the ray from ``e`` away from ``center``."""
    d = center - e
    d = d / abs(d) if d != 0 else 1.0
    sd = cmath.sqrt(d)
    return lambda z: sd * np.sqrt((z - e) / d)


def _segment_sqrt(a: complex, b: complex):
    """Branch of ``sqrt((z-a)(z-b))`` analytic off the segment ``[a, b]``."""
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    return lambda z: (z - c) * np.sqrt(1 - (h / (z - c)) ** 2)


def loop_period(a: complex, b: complex, other: complex, tol: float = 1e-12) -> complex:
    """``oint dx/y`` over an ellipse around the branch points ``a``, ``b``.

    The third finite branch point ``other`` stays outside the ellipse. The
    sign depends on the branch of ``y``; callers compare up to sign.
    """
    rho = 0.5 * ConfocalEllipse.elliptic_radius(a, b, other)
    ell = ConfocalEllipse(a, b, rho)
    s_seg = _segment_sqrt(a, b)
    s_other = _sqrt_away(other, ell.center)
    return contour_integral(lambda z: 1.0 / (s_other(z) * s_seg(z)), ell, tol)


def contour_periods(m: complex, tol: float = 1e-12):
    """Independent quadrature oracle for the period pair of :func:`seed_periods`."""
    m = complex(m)
    return loop_period(0j, m, 1 + 0j, tol), loop_period(m, 1 + 0j, 0j, tol)


def elliptic_log(x: complex, y: complex, m: complex) -> complex:
    """A determination of ``int_O^P dx/y`` for ``P = (x, y)`` (defined mod periods).

    Uses ``int_x^{x + d inf} dt / sqrt(f(t)) = 2 R_F(X/d, Y/d, Z/d) / sqrt(d)``
    along a ray of direction ``d`` chosen to stay clear of the branch points.
    """
    x, y, m = complex(x), complex(y), complex(m)
    diffs = (x, x - 1, x - m)
    best, best_score = None, -1.0
    for d in _DIRECTIONS:
        score = min(math.pi - abs(cmath.phase(v / d)) if v != 0 else math.pi for v in diffs)
        if score > best_score + 1e-12:
            best, best_score = d, score
    d = best
    sd = cmath.sqrt(d)
    scaled = [v / d for v in diffs]
    along_ray = 2 * carlson_rf(*scaled) / sd
    y_branch = sd ** 3 * cmath.sqrt(scaled[0]) * cmath.sqrt(scaled[1]) * cmath.sqrt(scaled[2])
    # u(P) = -int_P^O dx/y, with the sign of y relative to the ray branch
    return -along_ray if abs(y - y_branch) <= abs(y + y_branch) else along_ray


def reduced_basis(w1: complex, w2: complex):
    """Gauss-reduce a lattice basis; returns ``(v1, v2)`` with ``tau = v2/v1`` in the fundamental domain."""
    if (w2 / w1).imag == 0:
        raise DegenerateFrame("period pair is real-linearly dependent")
    if (w2 / w1).imag < 0:
        w2 = -w2
    for _ in range(200):
        if abs(w2) < abs(w1):
            w1, w2 = w2, -w1
        k = round(((w2 / w1).real))
        if k == 0:
            break
        w2 = w2 - k * w1
    if abs(w2) < abs(w1):
        w1, w2 = w2, -w1
    return w1, w2


def covering_radius(w1: complex, w2: complex) -> float:
    v1, v2 = reduced_basis(w1, w2)
    tau = v2 / v1
    p = tau if tau.real >= 0 else -tau.conjugate()
    # circumradius of the non-obtuse triangle (0, 1, p)
    a, b, c = 1.0, abs(p), abs(p - 1)
    area = 0.5 * abs(p.imag)
    return abs(v1) * a * b * c / (4 * area)


def _wp_unit(v: complex, tau: complex, derivative: bool):
    """``p`` (or ``p'``) of the lattice ``Z + Z tau`` at ``v``, from the
    q-expansion; ``v`` should be reduced so that ``|Im v| <= Im tau / 2``."""
    q = cmath.exp(2j * math.pi * tau)
    pv = math.pi * v
    s = cmath.sin(pv)
    if not derivative:
        e2, tail = 1 + 0j, 0j
        qn = 1 + 0j
        for n in range(1, 400):
            qn *= q
            t = n * qn / (1 - qn)
            e2 -= 24 * t
            term = t * cmath.cos(2 * n * pv)
            tail += term
            if n > 3 and abs(term) <= 1e-17 * (1 + abs(tail)) and abs(t) <= 1e-17:
                break
        return -e2 / 3 + 1 / (s * s) - 8 * tail
    tail = 0j
    qn = 1 + 0j
    for n in range(1, 400):
        qn *= q
        term = n * n * qn / (1 - qn) * cmath.sin(2 * n * pv)
        tail += term
        if n > 3 and abs(term) <= 1e-17 * (1 + abs(tail)):
            break
    return -2 * cmath.cos(pv) / s ** 3 + 16 * tail


def reduce_mod_lattice(u: complex, w1: complex, w2: complex) -> complex:
    """Representative of ``u`` in the parallelogram centred at 0."""
    a, b = real_coordinates(u, w1, w2)
    return u - round(a) * w1 - round(b) * w2


def real_coordinates(u: complex, w1: complex, w2: complex):
    """Real ``(a, b)`` with ``u = a w1 + b w2``."""
    det = (w1.conjugate() * w2).imag
    a = (u.conjugate() * w2).imag / det
    b = (w1.conjugate() * u).imag / det
    return a, b


def exp_point(u: complex, w1: complex, w2: complex, m: complex, zero_tol: float = 1e-9):
    """Point of the curve with logarithm ``u``; ``None`` for the neutral element.

    ``x = (1 + m)/3 + 4 p(u)``, ``y = 4 p'(u)`` where ``p`` is the Weierstrass
    function of the period lattice of ``dx/y``.
    """
    v1, v2 = reduced_basis(w1, w2)
    tau = v2 / v1
    ur = reduce_mod_lattice(complex(u), v1, v2)
    v = ur / v1
    if abs(ur) <= zero_tol * abs(v1):
        return None
    scale = math.pi / v1
    wp = scale ** 2 * _wp_unit(v, tau, False)
    dwp = scale ** 3 * _wp_unit(v, tau, True)
    return ((1 + m) / 3 + 4 * wp, 4 * dwp)


def on_curve_residual(x: complex, y: complex, m: complex) -> float:
    rhs = x * (x - 1) * (x - m)
    return abs(y * y - rhs) / max(1.0, abs(rhs), abs(y) ** 2)
