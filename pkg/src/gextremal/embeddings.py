"""G as a retract of the 2x2 spectral ball, the tetrablock and the pentablock."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import PointG, as_point, in_g


class Target(enum.Enum):
    SPECTRAL_BALL = "SpectralBall"
    TETRABLOCK = "Tetrablock"
    PENTABLOCK = "Pentablock"


@dataclass(frozen=True)
class Mat2:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError("matrix entries must be finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, arr) -> "Mat2":
        arr = np.asarray(arr, dtype=complex)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c


def _target(target) -> Target:
    return Target(target) if isinstance(target, str) else target


def embed(s, target, frame: Optional[Callable[[PointG], np.ndarray]] = None):
    """iota(s).  ``frame`` optionally supplies an invertible F(s) for F^-1 C F."""
    s = as_point(s)
    if not in_g(s.s1, s.s2):
        raise ValueError(f"{s} is not in G")
    target = _target(target)
    if target is Target.SPECTRAL_BALL:
        C = np.array([[0, 1], [-s.s2, s.s1]], dtype=complex)
        if frame is not None:
            F = np.asarray(frame(s), dtype=complex)
            C = np.linalg.solve(F, C @ F)
        return Mat2.from_array(C)
    if target is Target.TETRABLOCK:
        return (s.s1 / 2, s.s1 / 2, s.s2)
    return (0j, s.s1, s.s2)


def retract_map(x, source) -> PointG:
    """kappa, the left inverse of embed."""
    source = _target(source)
    if source is Target.SPECTRAL_BALL:
        A = x if isinstance(x, Mat2) else Mat2.from_array(x)
        return PointG(A.trace, A.det)
    z1, z2, z3 = (complex(v) for v in x)
    if source is Target.TETRABLOCK:
        return PointG(z1 + z2, z3)
    return PointG(z2, z3)


def spectral_radius(A) -> float:
    A = A if isinstance(A, Mat2) else Mat2.from_array(A)
    # eigenvalues solve lambda^2 - tr lambda + det = 0
    tr, det = A.trace, A.det
    root = np.sqrt(tr * tr - 4 * det + 0j)
    return float(max(abs((tr + root) / 2), abs((tr - root) / 2)))
