"""Quadratic defining polynomials of geodesics."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .caratheodory import phi
from .core import Datum, PointG, as_point
from .geodesics import GeodesicMap, _upsilon_from_components, retraction, solve_kobayashi


@dataclass(frozen=True)
class QuadPoly2:
    """c00 + c10 s1 + c01 s2 + c20 s1^2 + c11 s1 s2 + c02 s2^2."""

    c00: complex = 0j
    c10: complex = 0j
    c01: complex = 0j
    c20: complex = 0j
    c11: complex = 0j
    c02: complex = 0j

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, complex(getattr(self, f.name)))

    def coefficients(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=complex)

    @classmethod
    def from_coefficients(cls, coeffs) -> "QuadPoly2":
        return cls(*(complex(c) for c in coeffs))

    def __call__(self, s1, s2):
        return self.c00 + s1 * (self.c10 + self.c20 * s1 + self.c11 * s2) + s2 * (self.c01 + self.c02 * s2)

    def scaled(self, factor) -> "QuadPoly2":
        return QuadPoly2.from_coefficients(self.coefficients() * factor)

    def normalized(self) -> "QuadPoly2":
        """Scale so the s1^2 coefficient is -1."""
        if self.c20 == 0:
            raise ValueError("no s1^2 term to normalize by")
        return self.scaled(-1 / self.c20)

    def self_conjugacy_error(self) -> float:
        """Deviation from P(s) = s2^2 conj(P(conj(s1)/conj(s2), 1/conj(s2)))."""
        return float(max(abs(self.c02 - np.conj(self.c00)), abs(self.c11 - np.conj(self.c10)),
                         abs(self.c01.imag), abs(self.c20.imag)))


def poly_eval(P: QuadPoly2, s) -> complex:
    s = as_point(s)
    return complex(P(s.s1, s.s2))


def _reparametrized(k: GeodesicMap):
    """(omega, q) for k o upsilon^-1, where q has k2 = q~/q."""
    k = k.rebase()
    if k.degree != 2:
        raise ValueError("flat geodesics have a linear defining equation, not a quadratic one")
    u = k.upsilon
    zeros = [complex(u(a)) for a in k.k2.zeros]
    value = k.k2(u.inverse()(1.0))
    base = np.prod([(1 - a) / (1 - np.conj(a)) for a in zeros])
    theta = value / base
    c = np.conj(np.sqrt(theta))
    q = np.array([c])
    for a in zeros:
        q = npoly.polymul(q, [1, -np.conj(a)])
    return k.omega, q


def variety_polynomial(k: GeodesicMap) -> QuadPoly2:
    """Quadratic P vanishing exactly on k(D), in closed form from q."""
    omega, q = _reparametrized(k)
    node = np.conj(omega)
    qn = npoly.polyval(node, q)
    dqn = npoly.polyval(node, npoly.polyder(q))
    q0 = q[0]
    q2 = 2 * q[2] if len(q) > 2 else 0j
    return QuadPoly2(
        c00=-2 * np.conj(q2),
        c10=2 * np.conj(dqn),
        c01=4 * (2 * q0.real - qn),
        c20=-qn,
        c11=2 * dqn,
        c02=-2 * q2,
    )


def defining_values(k: GeodesicMap, s1, s2):
    """(2 - w s1)^2 (q~(Phi) - s2 q(Phi)) / (w^2 s2 - 1), the polynomial's defining form."""
    omega, q = _reparametrized(k)
    x = phi(omega, s1, s2)
    qt = np.conj(q[::-1])  # z^2 conj(q(1/conj z))
    qt = np.concatenate([np.zeros(3 - len(qt)), qt]) if len(qt) < 3 else qt
    val = npoly.polyval(x, qt) - s2 * npoly.polyval(x, q)
    return (2 - omega * s1) ** 2 * val / (omega**2 * s2 - 1)


def fit_polynomial(k: GeodesicMap, samples: int = 24, seed: int = 0) -> QuadPoly2:
    """Recover P by least squares from the defining form at random points of G."""
    rng = np.random.default_rng(seed)
    z = 0.8 * np.sqrt(rng.random((2, samples))) * np.exp(2j * np.pi * rng.random((2, samples)))
    s1, s2 = z[0] + z[1], z[0] * z[1]
    rows = np.column_stack([np.ones_like(s1), s1, s2, s1**2, s1 * s2, s2**2])
    coeffs, *_ = np.linalg.lstsq(rows, defining_values(k, s1, s2), rcond=None)
    return QuadPoly2.from_coefficients(coeffs)


def family_polynomial(kind: str, param):
    """Bivariate polynomials as {(i, j): coefficient}.

    ``Pr`` is in (s1, s2); ``Hr`` and ``Vbeta`` are in (z, w).  Exact
    arithmetic is preserved for Fraction parameters.
    """
    if kind == "Pr":
        r = param
        poly = {(1, 0): 2 * r, (2, 0): -(1 + r), (0, 1): 4 - 4 * r, (1, 1): 2 * r}
    elif kind == "Hr":
        r = param
        poly = {(2, 1): 2 * r, (1, 2): 2 * r, (1, 1): 2 - 6 * r, (2, 0): -(1 + r),
                (0, 2): -(1 + r), (1, 0): 2 * r, (0, 1): 2 * r}
    elif kind == "Vbeta":
        b = complex(param)
        poly = {(1, 0): 1, (0, 1): 1, (0, 0): -b, (1, 1): -b.conjugate()}
    else:
        raise ValueError(f"unknown family polynomial {kind!r}")
    return {key: c for key, c in poly.items() if c != 0}


def evaluate_bivariate(poly, x, y):
    return sum(c * x**i * y**j for (i, j), c in poly.items())


def _mul(a, b):
    out = {}
    for (i, j), c in a.items():
        for (k, l), d in b.items():
            key = (i + k, j + l)
            out[key] = out.get(key, 0) + c * d
    return out


def compose_with_sym(poly):
    """Expand P(z + w, z w) as a polynomial in (z, w)."""
    total = {}
    s1 = {(1, 0): 1, (0, 1): 1}
    s2 = {(1, 1): 1}
    for (i, j), c in poly.items():
        term = {(0, 0): c}
        for _ in range(i):
            term = _mul(term, s1)
        for _ in range(j):
            term = _mul(term, s2)
        for key, v in term.items():
            total[key] = total.get(key, 0) + v
    return {key: v for key, v in total.items() if v != 0}


class DifferenceFit(NamedTuple):
    constant: complex
    residual: float


def _left_inverse(k: GeodesicMap, omega):
    """Mobius m with m o Phi_omega o k = id."""
    p1 = 2 * k.n1
    p2 = k.k2.theta * k.k2.num
    return _upsilon_from_components(omega, p1, p2, k.k2.den).inverse()


def extremal_difference_constant(delta: Datum, omega1, omega2, P: QuadPoly2,
                                 checks: int = 100, seed: int = 0) -> DifferenceFit:
    """Fit c in C1 - C2 = c P / (L1 L2) and verify it at ``checks`` other points.

    C_j = m_j o Phi_{w_j} with C_j o k = id, and L_j is the linear
    denominator of C_j, scaled so that L_j = 2 - w_j s1 when m_j is a
    rotation.
    """
    k = solve_kobayashi(delta).geodesic.rebase()
    maps = [(_left_inverse(k, w), w) for w in (omega1, omega2)]

    def scaled_difference(s1, s2):
        out = 0
        dens = 1
        for sign, (m, w) in zip((1, -1), maps):
            (a, b), (c, d) = m.matrix()
            num = a * (2 * w * s2 - s1) + b * (2 - w * s1)
            den = c * (2 * w * s2 - s1) + d * (2 - w * s1)
            out = out + sign * num / den
            dens = dens * den
        return out * dens

    rng = np.random.default_rng(seed)
    z = 0.8 * np.sqrt(rng.random((2, checks + 1))) * np.exp(2j * np.pi * rng.random((2, checks + 1)))
    s1, s2 = z[0] + z[1], z[0] * z[1]
    pv = P(s1, s2)
    if abs(pv[0]) < 1e-8:
        raise ValueError("fitting point lies on the variety")
    c = scaled_difference(s1[0], s2[0]) / pv[0]
    res = np.max(np.abs(scaled_difference(s1[1:], s2[1:]) - c * pv[1:]))
    return DifferenceFit(complex(c), float(res))


def on_range(k: GeodesicMap, s: PointG, tol: float = 1e-9) -> bool:
    """s in k(D), decided by retracting and comparing."""
    a = retraction(k)(s.s1, s.s2)
    return abs(a[0] - s.s1) + abs(a[1] - s.s2) <= tol

