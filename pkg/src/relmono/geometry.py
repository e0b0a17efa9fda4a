"""Parametrized curves in the complex plane.

Every segment is parametrized over ``t in [0, 1]`` and exposes ``point(t)``
and ``velocity(t)`` (the derivative with respect to ``t``). Both accept
scalars or numpy arrays. A :class:`Path` is an ordered tuple of segments that
join continuously.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = ["Line", "Arc", "ConfocalEllipse", "Path", "distance_to_segment", "polyline"]


@dataclass(frozen=True)
class Line:
    start: complex
    end: complex

    closed = False

    def point(self, t):
        return self.start + (self.end - self.start) * t

    def velocity(self, t):
        return (self.end - self.start) * np.ones_like(t)

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def reversed(self) -> "Line":
        return Line(self.end, self.start)

    def distance_to(self, p: complex) -> float:
        return distance_to_segment(p, self.start, self.end)


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius * exp(i (theta0 + t * sweep))``."""

    center: complex
    radius: float
    theta0: float
    sweep: float

    @property
    def closed(self) -> bool:
        return math.isclose(abs(self.sweep), 2 * math.pi)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * (self.theta0 + self.sweep * t))

    def velocity(self, t):
        return 1j * self.sweep * self.radius * np.exp(1j * (self.theta0 + self.sweep * t))

    @property
    def start(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.theta0)

    @property
    def end(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * (self.theta0 + self.sweep))

    @property
    def length(self) -> float:
        return abs(self.sweep) * self.radius

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.theta0 + self.sweep, -self.sweep)

    def distance_to(self, p: complex) -> float:
        d = p - self.center
        if abs(self.sweep) >= 2 * math.pi - 1e-12:
            return abs(abs(d) - self.radius)
        ts = np.linspace(0.0, 1.0, 257)
        return float(np.min(np.abs(self.point(ts) - p)))


@dataclass(frozen=True)
class ConfocalEllipse:
    """Closed ellipse with foci ``a`` and ``b``, traversed counterclockwise.

    ``z(t) = c + h cosh(rho + 2 pi i t)`` with ``c = (a+b)/2``, ``h = (b-a)/2``.
    """

    a: complex
    b: complex
    rho: float

    closed = True

    @property
    def center(self) -> complex:
        return 0.5 * (self.a + self.b)

    @property
    def half(self) -> complex:
        return 0.5 * (self.b - self.a)

    def point(self, t):
        return self.center + self.half * np.cosh(self.rho + 2j * np.pi * t)

    def velocity(self, t):
        return self.half * 2j * np.pi * np.sinh(self.rho + 2j * np.pi * t)

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    end = start

    @property
    def length(self) -> float:
        ts = np.linspace(0.0, 1.0, 513)
        return float(np.sum(np.abs(np.diff(self.point(ts)))))

    def reversed(self):
        raise NotImplementedError("ellipses are only used as closed contours")

    @staticmethod
    def elliptic_radius(a: complex, b: complex, p: complex) -> float:
        """Elliptic coordinate ``rho`` of ``p`` relative to foci ``a``, ``b``."""
        c, h = 0.5 * (a + b), 0.5 * (b - a)
        w = (p - c) / h
        return abs((cmath.acosh(w)).real)


def distance_to_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


@dataclass(frozen=True)
class Path:
    """Ordered, continuous sequence of segments (a PathSpec)."""

    segments: tuple
    start: complex
    end: complex

    @classmethod
    def from_segments(cls, segments: Iterable, start: complex | None = None) -> "Path":
        segs = tuple(segments)
        if not segs:
            if start is None:
                raise ValueError("empty path needs an explicit start point")
            return cls((), complex(start), complex(start))
        for s0, s1 in zip(segs, segs[1:]):
            if abs(s0.end - s1.start) > 1e-9 * (1 + abs(s0.end)):
                raise ValueError("path segments do not join continuously")
        return cls(segs, complex(segs[0].start), complex(segs[-1].end))

    @classmethod
    def constant(cls, point: complex) -> "Path":
        return cls((), complex(point), complex(point))

    def __add__(self, other: "Path") -> "Path":
        if abs(self.end - other.start) > 1e-9 * (1 + abs(self.end)):
            raise ValueError("paths do not join")
        if not self.segments:
            return other
        if not other.segments:
            return self
        return Path(self.segments + other.segments, self.start, other.end)

    def reversed(self) -> "Path":
        return Path(tuple(s.reversed() for s in reversed(self.segments)), self.end, self.start)

    @property
    def is_closed(self) -> bool:
        return abs(self.end - self.start) <= 1e-9 * (1 + abs(self.start))

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def distance_to(self, p: complex) -> float:
        if not self.segments:
            return abs(p - self.start)
        return min(s.distance_to(p) for s in self.segments)

    def sample(self, per_segment: int = 64) -> np.ndarray:
        if not self.segments:
            return np.array([self.start])
        ts = np.linspace(0.0, 1.0, per_segment + 1)
        return np.concatenate([np.asarray(s.point(ts)) for s in self.segments])


def polyline(points: Sequence[complex]) -> Path:
    pts = [complex(p) for p in points]
    return Path.from_segments([Line(a, b) for a, b in zip(pts, pts[1:]) if a != b], start=pts[0])
