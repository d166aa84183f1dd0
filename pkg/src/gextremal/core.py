"""Points of the symmetrized bidisc, datums, and disc automorphisms."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class PointG:
    """A point (s1, s2) of C^2; s1 is the sum coordinate, s2 the product."""

    s1: complex
    s2: complex

    def __post_init__(self):
        s1, s2 = complex(self.s1), complex(self.s2)
        if not (cmath.isfinite(s1) and cmath.isfinite(s2)):
            raise ValueError(f"non-finite point ({s1}, {s2})")
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2], dtype=complex)

    def __iter__(self):
        yield self.s1
        yield self.s2


def as_point(s) -> PointG:
    if isinstance(s, PointG):
        return s
    s1, s2 = s
    return PointG(s1, s2)


@dataclass(frozen=True)
class Datum:
    """Discrete pair (p, q) or infinitesimal (p, v) in G.

    Build with :meth:`discrete` or :meth:`infinitesimal`.
    """

    p: PointG
    q: Optional[PointG] = None
    v: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "p", as_point(self.p))
        if (self.q is None) == (self.v is None):
            raise ValueError("datum needs exactly one of a second point or a tangent vector")
        if self.q is not None:
            object.__setattr__(self, "q", as_point(self.q))
        else:
            v1, v2 = (complex(x) for x in self.v)
            if not (cmath.isfinite(v1) and cmath.isfinite(v2)):
                raise ValueError("non-finite tangent vector")
            object.__setattr__(self, "v", (v1, v2))

    @classmethod
    def discrete(cls, p, q) -> "Datum":
        return cls(as_point(p), q=as_point(q))

    @classmethod
    def infinitesimal(cls, p, v) -> "Datum":
        return cls(as_point(p), v=tuple(v))

    @property
    def is_infinitesimal(self) -> bool:
        return self.v is not None

    @property
    def nondegenerate(self) -> bool:
        if self.is_infinitesimal:
            return self.v != (0j, 0j)
        return self.p != self.q

    def points(self) -> list[PointG]:
        return [self.p] if self.is_infinitesimal else [self.p, self.q]


@dataclass(frozen=True)
class DiscDatum:
    """A datum in the unit disc.

    Discrete: base points ``z`` and ``w``.  Infinitesimal: base point ``z``
    and tangent ``w``.
    """

    z: complex
    w: complex
    infinitesimal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", complex(self.w))
        if abs(self.z) >= 1 or (not self.infinitesimal and abs(self.w) >= 1):
            raise ValueError(f"base points of a disc datum must lie in the open disc: {self}")

    @property
    def nondegenerate(self) -> bool:
        if self.infinitesimal:
            return self.w != 0
        return self.z != self.w


@dataclass(frozen=True)
class Mobius:
    """The disc automorphism z -> c (z - a) / (1 - conj(a) z)."""

    c: complex = 1 + 0j
    a: complex = 0j

    def __post_init__(self):
        c, a = complex(self.c), complex(self.a)
        if abs(abs(c) - 1) > UNIT_TOL:
            raise ValueError(f"rotation factor must be unimodular, got |c| = {abs(c)!r}")
        if not abs(a) < 1:
            raise ValueError(f"Blaschke parameter must lie in the open disc, got {a!r}")
        object.__setattr__(self, "c", c / abs(c))
        object.__setattr__(self, "a", a)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls()

    @classmethod
    def blaschke(cls, a) -> "Mobius":
        return cls(1, a)

    @classmethod
    def from_matrix(cls, mat) -> "Mobius":
        """Recover (c, a) from a 2x2 matrix of z -> (Az + B)/(Cz + D)."""
        (A, B), (C, D) = np.asarray(mat, dtype=complex)
        if abs(A) < abs(B):
            raise ValueError("matrix does not represent a disc automorphism")
        return cls(A / D, -B / A)

    def matrix(self) -> np.ndarray:
        return np.array([[self.c, -self.c * self.a], [-self.a.conjugate(), 1]], dtype=complex)

    def __call__(self, z):
        return self.c * (z - self.a) / (1 - np.conj(self.a) * z)

    def derivative(self, z):
        return self.c * (1 - abs(self.a) ** 2) / (1 - np.conj(self.a) * z) ** 2

    def compose(self, other: "Mobius") -> "Mobius":
        """self o other."""
        return Mobius.from_matrix(self.matrix() @ other.matrix())

    def inverse(self) -> "Mobius":
        return Mobius(self.c.conjugate(), -self.a * self.c)

    def reflect(self) -> "Mobius":
        return Mobius(self.c.conjugate(), self.a.conjugate())

    def is_identity(self, tol: float = 1e-14) -> bool:
        return abs(self.c - 1) <= tol and abs(self.a) <= tol


class Region(enum.Enum):
    G = "G"
    GAMMA_CLOSURE = "GammaClosure"
    DISTINGUISHED_BOUNDARY = "DistinguishedBoundary"
    ROYAL = "Royal"
    ROYAL_CLOSURE = "RoyalClosure"
    FLAT_LEAF = "FlatLeaf"


def in_g(s1, s2):
    """Vectorised open-set test."""
    return np.abs(s1 - np.conj(s1) * s2) < 1 - np.abs(s2) ** 2


def region_membership(s, region: Region, tol: float = 1e-9, beta: complex = 0j) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    s1, s2 = as_point(s)
    if region is Region.G:
        return bool(in_g(s1, s2))
    if region is Region.GAMMA_CLOSURE:
        return abs(s1) <= 2 + tol and abs(s1 - s1.conjugate() * s2) <= 1 - abs(s2) ** 2 + tol
    if region is Region.DISTINGUISHED_BOUNDARY:
        return (abs(s1) <= 2 + tol and abs(abs(s2) - 1) <= tol
                and abs(s1 - s1.conjugate() * s2) <= tol)
    if region is Region.ROYAL:
        return abs(s1 * s1 - 4 * s2) <= tol and abs(s2) < 1
    if region is Region.ROYAL_CLOSURE:
        return abs(s1 * s1 - 4 * s2) <= tol and abs(s2) <= 1 + tol
    if region is Region.FLAT_LEAF:
        beta = complex(beta)
        return abs(s1 - beta - beta.conjugate() * s2) <= tol and abs(s2) < 1
    raise ValueError(f"unknown region {region!r}")


def sym_pi(lambda1, lambda2) -> PointG:
    return PointG(lambda1 + lambda2, lambda1 * lambda2)


def lift(s) -> tuple[complex, complex]:
    """Roots of x^2 - s1 x + s2, ordered by (real, imag)."""
    s1, s2 = as_point(s)
    disc = cmath.sqrt(s1 * s1 - 4 * s2)
    big = s1 + disc if abs(s1 + disc) >= abs(s1 - disc) else s1 - disc
    if big == 0:
        return 0j, 0j
    r1 = big / 2
    r2 = s2 / r1 if r1 != 0 else s1 - r1  # r1 underflowed to zero
    return tuple(sorted((r1, r2), key=lambda x: (x.real, x.imag)))


def flat_beta(s) -> complex:
    s1, s2 = as_point(s)
    if not in_g(s1, s2):
        raise ValueError(f"point ({s1}, {s2}) is not in G")
    return (s1 - s1.conjugate() * s2) / (1 - abs(s2) ** 2)


def _modulus(zeta: DiscDatum) -> float:
    if zeta.infinitesimal:
        return abs(zeta.w) / (1 - abs(zeta.z) ** 2)
    return abs((zeta.z - zeta.w) / (1 - zeta.w.conjugate() * zeta.z))


def disc_modulus(zeta: DiscDatum) -> float:
    if not zeta.nondegenerate:
        raise ValueError("degenerate disc datum")
    return _modulus(zeta)


def mobius_apply(m: Mobius, x: Union[complex, DiscDatum]):
    if isinstance(x, DiscDatum):
        if x.infinitesimal:
            return DiscDatum(m(x.z), m.derivative(x.z) * x.w, True)
        return DiscDatum(m(x.z), m(x.w))
    x = complex(x)
    if abs(x) > 1 + 1e-15:
        raise ValueError("point outside the closed disc")
    return m(x)


def mobius_reflect(m: Mobius) -> Mobius:
    return m.reflect()


def blaschke_factor(a, z):
    return (z - a) / (1 - np.conj(a) * z)


def is_unimodular(x, tol: float = UNIT_TOL) -> bool:
    return math.isclose(abs(x), 1.0, abs_tol=tol)
