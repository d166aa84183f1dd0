"""Complex geodesics of G: canonical families, transport, Kobayashi solver, royal nodes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .blaschke import Blaschke, InterpolationError, lsq_interpolate, schur_interpolate
from .caratheodory import (Classification, DatumType, diagnose_datum, mtilde,
                           phi, phi_datum, transport_datum)
from .core import Datum, DiscDatum, Mobius, PointG, flat_beta


class Family(enum.Enum):
    ROYAL = "Royal"
    FLAT = "Flat"
    PURELY_UNBALANCED = "PurelyUnbalanced"
    PURELY_BALANCED = "PurelyBalanced"
    EXCEPTIONAL = "Exceptional"
    GENERAL = "General"


FAMILY_ALIASES = {
    "k_r": Family.PURELY_UNBALANCED,
    "g_r": Family.PURELY_BALANCED,
    "h_r": Family.EXCEPTIONAL,
    "royal": Family.ROYAL,
    "f_beta": Family.FLAT,
    "flat": Family.FLAT,
}


class GeodesicError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GeodesicMap:
    """k with Phi_omega o k = upsilon, k2 Blaschke, then post-composed with transport.

    The first coordinate is 2 * n1 / q where q is the denominator of k2.
    """

    family: Family
    omega: complex
    upsilon: Mobius
    k2: Blaschke
    transport: Mobius = field(default_factory=Mobius.identity)
    param: Optional[complex] = None

    @cached_property
    def n1(self) -> np.ndarray:
        w, c, al = self.omega, self.upsilon.c, self.upsilon.a
        theta, num, q = self.k2.theta, self.k2.num, self.k2.den
        lin = np.array([1, -np.conj(al)])
        top = npoly.polysub(w * theta * npoly.polymul(num, lin),
                            c * npoly.polymul([-al, 1], q))
        bottom = np.array([1 + w * c * al, -np.conj(al) - w * c])
        quo, rem = npoly.polydiv(top, bottom)
        if np.max(np.abs(rem)) > 1e-8 * max(1.0, np.max(np.abs(top))):
            raise GeodesicError("normal-form data do not define a rational Gamma-inner map")
        return quo

    @property
    def degree(self) -> int:
        return self.k2.degree

    def base(self, z):
        q = npoly.polyval(z, self.k2.den)
        return 2 * npoly.polyval(z, self.n1) / q, self.k2(z)

    def base_derivative(self, z):
        q, dq = npoly.polyval(z, self.k2.den), npoly.polyval(z, npoly.polyder(self.k2.den))
        n, dn = npoly.polyval(z, self.n1), npoly.polyval(z, npoly.polyder(self.n1))
        return 2 * (dn * q - n * dq) / q**2, self.k2.derivative(z)

    def evaluate(self, z):
        s1, s2 = self.base(z)
        if self.transport.is_identity(0):
            return s1, s2
        return mtilde(self.transport, s1, s2)

    def derivative(self, z):
        d1, d2 = self.base_derivative(z)
        if self.transport.is_identity(0):
            return np.array([d1, d2])
        from .caratheodory import mtilde_jacobian
        s1, s2 = self.base(z)
        return mtilde_jacobian(self.transport, s1, s2) @ np.array([d1, d2])

    def __call__(self, z) -> PointG:
        s1, s2 = self.evaluate(complex(z))
        return PointG(s1, s2)

    def push(self, zeta: DiscDatum) -> Datum:
        if zeta.infinitesimal:
            return Datum.infinitesimal(self(zeta.z), tuple(self.derivative(zeta.z) * zeta.w))
        return Datum.discrete(self(zeta.z), self(zeta.w))

    def rebase(self) -> "GeodesicMap":
        """Absorb the transport into the normal-form data."""
        m = self.transport
        if m.is_identity(0):
            return self
        tau, al = m.c, m.a
        theta, num, q = self.k2.theta, self.k2.num, self.k2.den
        n1 = self.n1
        top = npoly.polyadd(npoly.polysub(theta * num, 2 * al * n1), al**2 * q)
        bot = npoly.polyadd(npoly.polysub(q, 2 * np.conj(al) * n1), np.conj(al) ** 2 * theta * num)
        top = np.trim_zeros(top, "b") if np.any(top) else top
        deg = self.k2.degree
        zeros = tuple(npoly.polyroots(top[: deg + 1])) if deg else ()
        value = tau**2 * npoly.polyval(1.0, top) / npoly.polyval(1.0, bot)
        k2 = Blaschke.through(zeros, 1.0, value)
        omega = m.reflect()(self.omega)
        upsilon = Mobius(tau, -al).compose(self.upsilon)
        return GeodesicMap(self.family, omega, upsilon, k2, Mobius.identity(), self.param)


def _upsilon_from_components(omega, p1, p2, q):
    """Phi_omega o (p1/q, p2/q) with the common boundary factor removed."""
    top = npoly.polysub(2 * omega * np.asarray(p2), p1)
    bot = npoly.polysub(2 * np.asarray(q), omega * np.asarray(p1))
    roots = npoly.polyroots(np.trim_zeros(bot, "b"))
    node = min(roots, key=lambda z: abs(npoly.polyval(z, top)))
    top, r1 = npoly.polydiv(top, [-node, 1])
    bot, r2 = npoly.polydiv(bot, [-node, 1])
    if max(abs(r1[0]), abs(r2[0])) > 1e-8:
        raise GeodesicError("Phi_omega o k has no cancelling boundary factor")
    (b, a), (d, c) = np.resize(top, 2), np.resize(bot, 2)
    return Mobius.from_matrix([[a, b], [c, d]])


def _from_components(family, omega, p1, p2, q, param=None) -> GeodesicMap:
    q = np.asarray(q, dtype=complex)
    scale = q[0]
    p1, p2, q = np.asarray(p1) / scale, np.asarray(p2) / scale, q / scale
    p2t = np.trim_zeros(np.asarray(p2, dtype=complex), "b")
    zeros = tuple(npoly.polyroots(p2t)) if len(p2t) > 1 else ()
    value = npoly.polyval(1.0, p2) / npoly.polyval(1.0, q)
    k2 = Blaschke.through(zeros, 1.0, value)
    upsilon = _upsilon_from_components(omega, p1, p2, q)
    return GeodesicMap(family, complex(omega), upsilon, k2, Mobius.identity(), param)


def canonical_geodesic(family, **params) -> GeodesicMap:
    """Canonical geodesics: ``k_r``, ``g_r``, ``h_r`` (param r), ``f_beta`` (beta), ``royal``."""
    if isinstance(family, str):
        family = FAMILY_ALIASES[family]
    if family is Family.ROYAL:
        return GeodesicMap(family, 1 + 0j, Mobius(-1, 0), Blaschke(1, (0, 0)))
    if family is Family.FLAT:
        beta = complex(params.get("beta", 0))
        if abs(beta) >= 1:
            raise ValueError("beta must lie in the open disc")
        upsilon = Mobius((2 - beta.conjugate()) / (2 - beta), beta / (2 - beta.conjugate()))
        return GeodesicMap(family, 1 + 0j, upsilon, Blaschke(1, (0,)), param=beta)
    r = float(params["r"])
    if family is Family.PURELY_UNBALANCED:
        if not 0 < r < 1:
            raise ValueError("k_r needs 0 < r < 1")
        return GeodesicMap(family, 1 + 0j, Mobius(-1, 0), Blaschke(1, (0, r)), param=r)
    if family is Family.PURELY_BALANCED:
        if not 0 < r < 1:
            raise ValueError("g_r needs 0 < r < 1")
        return _from_components(family, 1, [-r, 2, -r], [0, -r, 1], [1, -r], r)
    if family is Family.EXCEPTIONAL:
        if not r > 0:
            raise ValueError("h_r needs r > 0")
        i = 1j
        return _from_components(family, 1, [i, 2 * r, -i], [0, i, r - i], [r + i, -i], r)
    raise ValueError(f"no canonical geodesic for {family}")


def closed_form(family, z, r=None, beta=0j):
    """Direct formulas for the canonical maps, used as an independent check."""
    if isinstance(family, str):
        family = FAMILY_ALIASES[family]
    if family is Family.ROYAL:
        return 2 * z, z * z
    if family is Family.FLAT:
        return beta + np.conj(beta) * z, z
    if family is Family.PURELY_UNBALANCED:
        return 2 * (1 - r) * z / (1 - r * z), z * (z - r) / (1 - r * z)
    if family is Family.PURELY_BALANCED:
        b = (z - r) / (1 - r * z)
        return z + b, z * b
    if family is Family.EXCEPTIONAL:
        m = ((r - 1j) * z + 1j) / (r + 1j - 1j * z)
        return z + m, z * m
    raise ValueError(family)


def mobius_fixed_points(m: Mobius, tol: float = 1e-9):
    """Fixed points of m in the closed disc (roots of conj(a) z^2 + (c-1) z - c a)."""
    if m.is_identity(tol):
        raise ValueError("identity fixes every point")
    coeffs = np.trim_zeros(np.array([-m.c * m.a, m.c - 1, np.conj(m.a)]), "b")
    roots = npoly.polyroots(coeffs) if len(coeffs) > 1 else np.array([])
    return [complex(z) for z in roots if abs(z) <= 1 + tol]


def balanced_geodesic(m: Mobius) -> GeodesicMap:
    """(z + m(z), z m(z)) for an automorphism with a fixed point on the circle."""
    if m.is_identity(1e-14):
        return canonical_geodesic(Family.ROYAL)
    fixed = [z for z in mobius_fixed_points(m) if abs(abs(z) - 1) <= 1e-9]
    if not fixed:
        raise ValueError("m has no fixed point on the unit circle")
    (A, B), (C, D) = m.matrix()
    p1 = [B, A + D, C]
    p2 = [0, B, A]
    q = [D, C]
    node = fixed[0] / abs(fixed[0])
    kind = Family.EXCEPTIONAL if len(fixed) == 1 else Family.PURELY_BALANCED
    return _from_components(kind, np.conj(node), p1, p2, q)


def geodesic_eval(k: GeodesicMap, z) -> PointG:
    if abs(z) > 1 + 1e-12:
        raise ValueError("evaluation point outside the closed disc")
    return k(z)


def aut_apply(m: Mobius, x):
    if isinstance(x, GeodesicMap):
        return replace(x, transport=m.compose(x.transport))
    if isinstance(x, Datum):
        return transport_datum(m, x)
    s = x if isinstance(x, PointG) else PointG(*x)
    return PointG(*mtilde(m, s.s1, s.s2))


class KobayashiError(ArithmeticError):
    pass


class KobayashiSolution(NamedTuple):
    geodesic: GeodesicMap
    zeta: DiscDatum
    residual: float
    classification: Classification


KOB_TOL = 1e-8


def _pull_back(k: GeodesicMap, omega, delta: Datum) -> DiscDatum:
    img = phi_datum(omega, delta)
    u = k.upsilon.inverse()
    if img.infinitesimal:
        return DiscDatum(u(img.z), u.derivative(img.z) * img.w, True)
    return DiscDatum(u(img.z), u(img.w))


def _residual(k: GeodesicMap, zeta: DiscDatum, delta: Datum) -> float:
    got = k.push(zeta)
    err = abs(got.p.s1 - delta.p.s1) + abs(got.p.s2 - delta.p.s2)
    if delta.is_infinitesimal:
        err += sum(abs(a - b) for a, b in zip(got.v, delta.v))
    else:
        err += abs(got.q.s1 - delta.q.s1) + abs(got.q.s2 - delta.q.s2)
    return float(err)


def solve_kobayashi(delta: Datum, method: str = "schur", seed: int = 0) -> KobayashiSolution:
    """The complex geodesic through delta and its preimage datum zeta."""
    info = diagnose_datum(delta)
    if info.type is DatumType.FLAT:
        k = canonical_geodesic(Family.FLAT, beta=flat_beta(delta.p))
        omega = k.omega
    elif info.type is DatumType.ROYAL:
        k = canonical_geodesic(Family.ROYAL)
        omega = k.omega
    else:
        t = info.car.maximizers[0]
        omega = complex(math.cos(t), math.sin(t))
        zeta = phi_datum(omega, delta)
        node = omega.conjugate()
        p, q = delta.p, delta.q
        if delta.is_infinitesimal:
            second = delta.v[1] / zeta.w
        else:
            second = (zeta.w, q.s2)
        solver = schur_interpolate if method == "schur" else lsq_interpolate
        kwargs = {} if method == "schur" else {"seed": seed}
        try:
            k2 = solver(zeta.z, p.s2, second, node, node**2,
                        infinitesimal=delta.is_infinitesimal, **kwargs)
        except InterpolationError as exc:
            raise KobayashiError(str(exc)) from exc
        k = GeodesicMap(Family.GENERAL, omega, Mobius.identity(), k2)
    zeta = _pull_back(k, omega, delta)
    res = _residual(k, zeta, delta)
    if res > KOB_TOL:
        raise KobayashiError(f"geodesic misses the datum (best residual {res:.3e})")
    return KobayashiSolution(k, zeta, res, info)


@dataclass(frozen=True)
class RoyalNode:
    location: complex
    point: PointG
    order: int
    boundary: bool

    @property
    def multiplicity(self) -> float:
        return self.order / 2 if self.boundary else float(self.order)


@dataclass(frozen=True)
class RoyalSignature:
    """Royal nodes of a geodesic.

    ``ambiguous`` marks root configurations that sit between the clustering
    tolerances: distinct roots closer than 1e-3, or a node within 1e-4 of
    the circle that is not on it.
    """

    nodes: tuple
    identically_royal: bool
    ambiguous: bool = False

    @property
    def total(self) -> float:
        return sum(n.multiplicity for n in self.nodes)


NODE_CLUSTER = 1e-7
BOUNDARY_TOL = 1e-7
ZERO_POLY = 1e-12
MERGE_RESIDUAL = 1e-10


def royal_polynomial(k: GeodesicMap) -> np.ndarray:
    """Numerator of ((k1)^2 - 4 k2) / 4 over q^2; transport does not move nodes."""
    return npoly.polysub(npoly.polymul(k.n1, k.n1),
                         k.k2.theta * npoly.polymul(k.k2.num, k.k2.den))


def _linkage(roots, tol):
    groups = []
    for z in roots:
        hits = [g for g in groups if min(abs(z - w) for w in g) <= tol]
        merged = [z] + [w for g in hits for w in g]
        groups = [g for g in groups if g not in hits] + [merged]
    return groups


def cluster_roots(coeffs):
    """Roots grouped into multiple roots; returns (centroid, order) pairs.

    A coarser grouping is accepted only if collapsing each group to its
    centroid reproduces the polynomial to MERGE_RESIDUAL.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(coeffs))
    keep = np.nonzero(np.abs(coeffs) > 1e-13 * scale)[0]
    coeffs = coeffs[: keep[-1] + 1]
    if len(coeffs) < 2:
        return []
    roots = npoly.polyroots(coeffs)
    best = _linkage(roots, NODE_CLUSTER)
    for tol in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
        groups = _linkage(roots, tol)
        if len(groups) == len(best):
            continue
        rebuilt = coeffs[-1] * npoly.polyfromroots([np.mean(g) for g in groups for _ in g])
        if np.max(np.abs(rebuilt - coeffs)) <= MERGE_RESIDUAL * scale:
            best = groups
    return [(complex(np.mean(g)), len(g)) for g in best]


def _ambiguous(clusters):
    locs = [z for z, _ in clusters if abs(z) <= 1 + 1e-4]
    if any(BOUNDARY_TOL < abs(abs(z) - 1) <= 1e-4 for z in locs):
        return True
    return any(abs(a - b) < 1e-3 for i, a in enumerate(locs) for b in locs[:i])


def royal_signature(k: GeodesicMap) -> RoyalSignature:
    poly = royal_polynomial(k)
    if np.max(np.abs(poly)) < ZERO_POLY:
        return RoyalSignature((), True)
    nodes = []
    clusters = cluster_roots(poly)
    for z, order in clusters:
        if abs(z) > 1 + BOUNDARY_TOL:
            continue
        boundary = abs(abs(z) - 1) <= BOUNDARY_TOL
        if boundary:
            z = z / abs(z)
        nodes.append(RoyalNode(z, k(z), order, boundary))
    nodes.sort(key=lambda n: (n.boundary, n.location.real, n.location.imag))
    return RoyalSignature(tuple(nodes), False, _ambiguous(clusters))


class InconsistentSignature(ValueError):
    pass


def geometric_classify(sig: RoyalSignature) -> DatumType:
    if sig.identically_royal:
        return DatumType.ROYAL
    inner = [n for n in sig.nodes if not n.boundary]
    outer = [n for n in sig.nodes if n.boundary]
    shape = (tuple(n.order for n in inner), tuple(n.order for n in outer))
    if shape == ((1,), ()):
        return DatumType.FLAT
    if shape == ((1,), (2,)):
        return DatumType.PURELY_UNBALANCED
    if shape == ((), (2, 2)):
        return DatumType.PURELY_BALANCED
    if shape == ((), (4,)):
        return DatumType.EXCEPTIONAL
    raise InconsistentSignature(f"royal nodes {shape} fit none of the five geodesic types")


def retraction(k: GeodesicMap):
    """The idempotent s -> k(upsilon^-1(Phi_omega(s))) with range k(D)."""
    base = k.rebase()
    inv = base.upsilon.inverse()

    def apply(s1, s2):
        return base.evaluate(inv(phi(base.omega, s1, s2)))

    return apply


def retraction_residual(k: GeodesicMap, samples) -> float:
    r = retraction(k)
    worst = 0.0
    for s in samples:
        a = r(s.s1, s.s2)
        b = r(*a)
        worst = max(worst, abs(b[0] - a[0]), abs(b[1] - a[1]))
    return float(worst)


def fit_mobius(zs, ws):
    """Least-squares linear fractional map through (zs, ws), as a 2x2 matrix."""
    zs, ws = np.asarray(zs), np.asarray(ws)
    rows = np.column_stack([zs, np.ones_like(zs), -ws * zs, -ws])
    _, _, vh = np.linalg.svd(rows)
    a, b, c, d = np.conj(vh[-1])
    return np.array([[a, b], [c, d]])


def _apply_matrix(mat, z):
    (a, b), (c, d) = mat
    return (a * z + b) / (c * z + d)


def balanced_factorization(k: GeodesicMap, samples: int = 48):
    """Split k = (m1 + m2, m1 m2) by continuing the lift along a spiral.

    Returns the two fitted maps (as matrices) and the worst residual.
    """
    t = np.linspace(0, 1, samples)
    path = 0.85 * t * np.exp(2.5j * t)
    s1, s2 = k.evaluate(path)
    disc = np.sqrt(s1 * s1 - 4 * s2 + 0j)
    first = np.empty(samples, complex)
    second = np.empty(samples, complex)
    prev = None
    for j in range(samples):
        a, b = (s1[j] + disc[j]) / 2, (s1[j] - disc[j]) / 2
        if prev is not None and abs(a - prev) > abs(b - prev):
            a, b = b, a
        first[j], second[j] = a, b
        prev = a
    m1, m2 = fit_mobius(path, first), fit_mobius(path, second)
    probe = 0.7 * np.exp(2j * np.pi * np.arange(16) / 16) * np.linspace(0.2, 1, 16)
    p1, p2 = k.evaluate(probe)
    u, v = _apply_matrix(m1, probe), _apply_matrix(m2, probe)
    res = max(np.max(np.abs(u + v - p1)), np.max(np.abs(u * v - p2)))
    return m1, m2, float(res)
