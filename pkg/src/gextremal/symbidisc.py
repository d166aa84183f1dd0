"""Symmetric subsets of the bidisc with the extension property and their images in G."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Mobius, in_g
from .variety import evaluate_bivariate, family_polynomial


class SymKind(enum.Enum):
    POINT_PAIR = "PointPair"
    FULL_BIDISC = "FullBidisc"
    BALANCED_UNION = "BalancedUnion"
    V_BETA = "VBeta"
    DIAGONAL_UNION_V_BETA = "DiagonalUnionVBeta"
    V_MR = "Vmr"


class ImageKind(enum.Enum):
    SINGLETON = "Singleton"
    G = "G"
    BALANCED_TYPE_GEODESIC = "BalancedTypeGeodesic"
    FLAT_GEODESIC = "FlatGeodesic"
    ROYAL_UNION_FLAT = "RoyalUnionFlat"
    PURELY_UNBALANCED_GEODESIC = "PurelyUnbalancedGeodesic"


_IMAGE = {
    SymKind.POINT_PAIR: ImageKind.SINGLETON,
    SymKind.FULL_BIDISC: ImageKind.G,
    SymKind.BALANCED_UNION: ImageKind.BALANCED_TYPE_GEODESIC,
    SymKind.V_BETA: ImageKind.FLAT_GEODESIC,
    SymKind.DIAGONAL_UNION_V_BETA: ImageKind.ROYAL_UNION_FLAT,
    SymKind.V_MR: ImageKind.PURELY_UNBALANCED_GEODESIC,
}


@dataclass(frozen=True)
class SymSet:
    kind: SymKind
    point: Optional[tuple] = None
    m: Optional[Mobius] = None
    beta: complex = 0j
    r: Optional[float] = None


def balanced_condition(m: Mobius) -> bool:
    """|a| >= |1 - c| / 2: the closure of {(z, m(z))} meets the boundary diagonal."""
    return abs(m.a) >= 0.5 * abs(1 - m.c) - 1e-12


def build_sym_set(kind, **params) -> SymSet:
    kind = SymKind(kind) if isinstance(kind, str) else kind
    if kind is SymKind.POINT_PAIR:
        a, b = (complex(x) for x in params["point"])
        if abs(a) >= 1 or abs(b) >= 1:
            raise ValueError("point pair must lie in the open bidisc")
        return SymSet(kind, point=(a, b))
    if kind is SymKind.FULL_BIDISC:
        return SymSet(kind)
    if kind is SymKind.BALANCED_UNION:
        m = params.get("m") or Mobius.identity()
        if not balanced_condition(m):
            raise ValueError("closure of the balanced disc misses the boundary diagonal")
        return SymSet(kind, m=m)
    if kind in (SymKind.V_BETA, SymKind.DIAGONAL_UNION_V_BETA):
        beta = complex(params.get("beta", 0))
        if abs(beta) >= 1:
            raise ValueError("beta must lie in the open disc")
        return SymSet(kind, beta=beta)
    if kind is SymKind.V_MR:
        r = float(params["r"])
        if not 0 < r < 1:
            raise ValueError("Vmr needs 0 < r < 1")
        return SymSet(kind, m=params.get("m") or Mobius.identity(), r=r)
    raise ValueError(f"unknown kind {kind!r}")


def _vbeta(beta, z, w):
    return z + w - beta - np.conj(beta) * z * w


def relation_residual(V: SymSet, z, w) -> float:
    """Distance-like residual of the defining relation at (z, w)."""
    k = V.kind
    if k is SymKind.POINT_PAIR:
        a, b = V.point
        return min(max(abs(z - a), abs(w - b)), max(abs(z - b), abs(w - a)))
    if k is SymKind.FULL_BIDISC:
        return 0.0
    if k is SymKind.BALANCED_UNION:
        return min(abs(w - V.m(z)), abs(z - V.m(w)))
    if k is SymKind.V_BETA:
        return abs(_vbeta(V.beta, z, w))
    if k is SymKind.DIAGONAL_UNION_V_BETA:
        return min(abs(z - w), abs(_vbeta(V.beta, z, w)))
    if k is SymKind.V_MR:
        return abs(evaluate_bivariate(family_polynomial("Hr", V.r), V.m(z), V.m(w)))
    raise ValueError(k)


def sym_member(V: SymSet, lam, tol: float = 1e-9) -> bool:
    z, w = (complex(x) for x in lam)
    if abs(z) >= 1 or abs(w) >= 1:
        return False
    return bool(relation_residual(V, z, w) <= tol)


def pi_image_kind(V: SymSet) -> ImageKind:
    return _IMAGE[V.kind]


def _hr_partner(r, Z):
    """Roots W of H_r(Z, W) = 0 (quadratic in W)."""
    a = 2 * r * Z - (1 + r)
    b = 2 * Z * (r * Z + 2 - 2 * r) - 2 * (1 + r) * Z + 2 * r
    c = -(1 + r) * Z * Z + 2 * r * Z
    if abs(a) < 1e-14:
        return [-c / b]
    disc = np.sqrt(b * b - 4 * a * c + 0j)
    big = -b - disc if abs(-b - disc) >= abs(-b + disc) else -b + disc
    if big == 0:
        return [0j, 0j]
    return [big / (2 * a), 2 * c / big]


def sample_members(V: SymSet, n: int, rng: np.random.Generator, radius: float = 0.9):
    """n points of V in the open bidisc (with a random transposition)."""
    out = []

    def rz():
        return complex(radius * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))

    while len(out) < n:
        z = rz()
        k = V.kind
        if k is SymKind.POINT_PAIR:
            pair = V.point
        elif k is SymKind.FULL_BIDISC:
            pair = (z, rz())
        elif k is SymKind.BALANCED_UNION:
            pair = (z, complex(V.m(z)))
        elif k is SymKind.V_BETA or (k is SymKind.DIAGONAL_UNION_V_BETA and rng.random() < 0.5):
            b = V.beta
            pair = (z, (b - z) / (1 - np.conj(b) * z))
        elif k is SymKind.DIAGONAL_UNION_V_BETA:
            pair = (z, z)
        else:
            Z = V.m(z)
            inv = V.m.inverse()
            cands = [W for W in _hr_partner(V.r, Z) if abs(W) < 1 - 1e-9]
            if not cands:
                continue
            pair = (z, complex(inv(cands[0])))
        if abs(pair[1]) >= 1:
            continue
        out.append(pair if rng.random() < 0.5 else pair[::-1])
    return out


def image_residual(V: SymSet, s1, s2) -> float:
    """How far (s1, s2) is from pi(V), measured by the G-side defining relation.

    The relation is written on the G side only (variety polynomial of the
    matching geodesic, a flat leaf, the royal variety), so it is independent
    of the D^2 relation used by ``sym_member``.
    """
    from .geodesics import aut_apply, balanced_geodesic, canonical_geodesic
    from .variety import variety_polynomial

    k = V.kind
    if k is SymKind.POINT_PAIR:
        a, b = V.point
        return max(abs(s1 - (a + b)), abs(s2 - a * b))
    if k is SymKind.FULL_BIDISC:
        return 0.0 if in_g(s1, s2) else float("inf")
    leaf = abs(s1 - V.beta - np.conj(V.beta) * s2)
    if k is SymKind.V_BETA:
        return leaf
    if k is SymKind.DIAGONAL_UNION_V_BETA:
        return min(leaf, abs(s1 * s1 - 4 * s2))
    if k is SymKind.BALANCED_UNION:
        P = variety_polynomial(balanced_geodesic(V.m)).normalized()
    else:
        P = variety_polynomial(aut_apply(V.m.inverse(), canonical_geodesic("k_r", r=V.r))).normalized()
    return abs(P(s1, s2))
