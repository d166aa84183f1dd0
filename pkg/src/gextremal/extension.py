"""Constructive extension devices.

Two pieces: the Herglotz-type extension from the union of the royal variety
and the flat leaf F_0 to all of G, and the map that strictly enlarges a disc
datum lying in a disc with a small hole removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .caratheodory import phi
from .core import DiscDatum, Mobius, as_point, disc_modulus, in_g

VARIETY_TOL = 1e-9
CONTACT_TOL = 1e-14


def _check_tau(tau):
    t1, t2 = (complex(x) for x in tau)
    if abs(abs(t1) - 1) > 1e-12 or abs(abs(t2) - 1) > 1e-12:
        raise ValueError("tau must be a pair of unimodular numbers")
    return t1, t2


def f_tau(tau, s, tol: float = VARIETY_TOL) -> complex:
    """tau1 z on (0, z) and tau2 z on (2z, z^2)."""
    t1, t2 = _check_tau(tau)
    s1, s2 = as_point(s)
    if abs(s1) <= tol:
        return t1 * s2
    if abs(s1 * s1 - 4 * s2) <= tol:
        return t2 * s1 / 2
    raise ValueError(f"{s} is neither on the royal variety nor on F_0")


def psi_tau(tau, s) -> complex:
    t1, t2 = _check_tau(tau)
    s1, s2 = as_point(s)
    omega = -np.conj(t2) * t1
    return complex(-t2 * phi(omega, s1, s2))


@dataclass(frozen=True)
class FiniteMeasureT2:
    """Atomic probability measure on the torus: rows (tau1, tau2, weight)."""

    atoms: tuple

    def __post_init__(self):
        rows = tuple((complex(a), complex(b), float(w)) for a, b, w in self.atoms)
        if not rows:
            raise ValueError("measure needs at least one atom")
        for a, b, w in rows:
            _check_tau((a, b))
            if not w > 0:
                raise ValueError("atom weights must be positive")
        if abs(sum(w for *_, w in rows) - 1) > 1e-12:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "atoms", rows)

    @classmethod
    def random(cls, rng: np.random.Generator, atoms: int = 8) -> "FiniteMeasureT2":
        ang = np.exp(2j * np.pi * rng.random((atoms, 2)))
        w = rng.random(atoms) + 0.05
        w = w / w.sum()
        w[-1] = 1 - w[:-1].sum()
        return cls(tuple((a, b, x) for (a, b), x in zip(ang, w)))


class ContactError(ArithmeticError):
    """An atom's function reaches 1, so the kernel blows up."""


def _kernel(x):
    if np.any(np.abs(1 - x) <= CONTACT_TOL):
        raise ContactError("boundary contact: phi = 1")
    return (1 + x) / (1 - x)


def herglotz_eval(mu: FiniteMeasureT2, s, on_variety: bool = False) -> complex:
    """h(s) on R u F_0 when ``on_variety``, else the extension g(s) on G."""
    s = as_point(s)
    if not on_variety and not in_g(s.s1, s.s2):
        raise ValueError(f"{s} is not in G")
    f = f_tau if on_variety else psi_tau
    return complex(sum(w * _kernel(f((a, b), s)) for a, b, w in mu.atoms))


def herglotz_extension(mu: FiniteMeasureT2, s1, s2):
    """Vectorised g on arrays of points of G."""
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    out = np.zeros(np.broadcast(s1, s2).shape, dtype=complex)
    for a, b, w in mu.atoms:
        out += w * _kernel(-b * phi(-np.conj(b) * a, s1, s2))
    return out


def cauchy_riemann_residual(f, s1, s2, h: float = 1e-5) -> float:
    """max |df/d conj(s_j)| by central differences."""
    worst = 0.0
    for j in range(2):
        e = np.zeros(2, dtype=complex)
        e[j] = 1

        def at(d):
            return f(s1 + d * e[0], s2 + d * e[1])

        dx = (at(h) - at(-h)) / (2 * h)
        dy = (at(1j * h) - at(-1j * h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(0.5 * (dx + 1j * dy)))))
    return worst


# --- enlarging a datum in a holed disc ---------------------------------------------


@dataclass(frozen=True)
class AnnularRegion:
    """{z in D : |z - w0| > r}."""

    w0: complex
    r: float

    def __post_init__(self):
        object.__setattr__(self, "w0", complex(self.w0))
        object.__setattr__(self, "r", float(self.r))
        if abs(self.w0) >= 1 or not 0 < self.r < 1 - abs(self.w0):
            raise ValueError("need |w0| < 1 and 0 < r < 1 - |w0|")

    def contains(self, z) -> bool:
        return abs(z) < 1 and abs(z - self.w0) > self.r

    def boundary(self, n: int = 4096) -> np.ndarray:
        e = np.exp(2j * np.pi * np.arange(n) / n)
        return np.concatenate([e, self.w0 + self.r * e])


class ImproveError(ArithmeticError):
    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ImproveMap:
    """beta(z) = (u - t g(u)) / R with u = B_{w0}(z) and g = (u - u1)(u - u2) h."""

    order: int
    coefficients: np.ndarray
    t: float
    R: float
    zeros: tuple
    premap: Mobius
    epsilon: float

    def h(self, u):
        u = np.asarray(u, dtype=complex)
        inv = 1 / u
        # h(u) = sum_n c_n u^(-n-1): Horner in 1/u
        acc = np.zeros_like(u)
        for c in self.coefficients[::-1]:
            acc = acc * inv + c
        return acc * inv

    def g(self, u):
        u = np.asarray(u, dtype=complex)
        a, b = self.zeros
        return (u - a) * (u - b) * self.h(u)

    def __call__(self, z):
        u = self.premap(np.asarray(z, dtype=complex))
        return (u - self.t * self.g(u)) / self.R

    def derivative(self, z, step: float = 1e-6):
        z = complex(z)
        return (self(z + step) - self(z - step)) / (2 * step)

    def apply(self, zeta: DiscDatum) -> DiscDatum:
        if zeta.infinitesimal:
            # g has a double zero at the base point, so beta'(z) = B'(z) / R
            return DiscDatum(complex(self(zeta.z)), self.premap.derivative(zeta.z) * zeta.w / self.R, True)
        return DiscDatum(complex(self(zeta.z)), complex(self(zeta.w)))


def laurent_tail(u1, u2, N: int) -> float:
    """Upper bound for sum_{n>N} |c_n|, the sup-T truncation error.

    Uses |c_n| <= (n+1) rho^n, and for distinct points also the partial
    fraction form c_n = A u1^n + B u2^n; the smaller bound wins.
    """
    rho = max(abs(u1), abs(u2))
    K = N + 1
    bound = rho**K * (K + 1 - K * rho) / (1 - rho) ** 2
    if u1 != u2:
        A, B = u1 / (u1 - u2), u2 / (u2 - u1)
        split = sum(abs(c) * abs(x) ** K / (1 - abs(x)) for c, x in ((A, u1), (B, u2)))
        bound = min(bound, split)
    return bound


def laurent_order(u1, u2, eps: float, max_order: int = 20000) -> int:
    """Least N whose truncation bound is below eps."""
    if max(abs(u1), abs(u2)) >= 1:
        raise ValueError("expansion points must lie in the open disc")
    N = 0
    while laurent_tail(u1, u2, N) >= eps:
        N += 1
        if N > max_order:
            raise ImproveError("Laurent order exceeds the limit", order=N)
    return N


def _laurent_coefficients(u1, u2, N):
    coeffs = np.empty(N + 1, dtype=complex)
    c, p = 0j, 1 + 0j
    for k in range(N + 1):  # c_k = sum_j u1^j u2^(k-j)
        c = u2 * c + p
        p = p * u1
        coeffs[k] = c
    return coeffs


def _search_t(g_out, g_in, outer, inner, floor, margin, min_t):
    """Halve t from 1/(2 sup_T |g|^2) until both circles land inside radius < 1."""
    t = 1 / (2 * float(np.max(np.abs(g_out))) ** 2)
    while t >= min_t:
        M = max(float(np.max(np.abs(outer - t * g_out))), float(np.max(np.abs(inner - t * g_in))))
        if M < 1:
            R = M + margin * (1 - M)
            if floor < R < 1:
                return t, R
        t /= 2
    return None


def improve_map(region: AnnularRegion, zeta: DiscDatum, samples: int = 4096,
                margin: float = 0.25, min_t: float = 1e-12, order: str = "best") -> ImproveMap:
    """Build beta with |beta(zeta)| > |zeta| and beta(region) inside D.

    ``order="bound"`` uses the least Laurent order certified by the tail
    bound.  ``order="best"`` also tries every lower order and keeps the one
    giving the smallest R; admissibility is always checked on the sampled
    boundary circles.
    """
    if order not in ("best", "bound"):
        raise ValueError("order must be 'best' or 'bound'")
    if not zeta.nondegenerate:
        raise ValueError("datum must be nondegenerate")
    pts = [zeta.z] if zeta.infinitesimal else [zeta.z, zeta.w]
    if not all(region.contains(z) for z in pts):
        raise ValueError("base points must lie in the region")

    pre = Mobius(1, region.w0)
    u = [complex(pre(z)) for z in pts]
    u1, u2 = (u[0], u[0]) if zeta.infinitesimal else (u[0], u[1])
    floor = max(abs(x) for x in u)

    eps = 1 / (2 * (1 + abs(u1)) * (1 + abs(u2)))
    n_bound = laurent_order(u1, u2, eps)
    coeffs = _laurent_coefficients(u1, u2, n_bound)
    e = np.exp(2j * np.pi * np.arange(samples) / samples)
    outer = e
    inner = pre(region.w0 + region.r * e)

    best = None
    for N in (range(n_bound + 1) if order == "best" else [n_bound]):
        draft = ImproveMap(N, coeffs[: N + 1], 0.0, 1.0, (u1, u2), pre, eps)
        with np.errstate(over="ignore", invalid="ignore"):
            g_out, g_in = draft.g(outer), draft.g(inner)
        if not (np.all(np.isfinite(g_out)) and np.all(np.isfinite(g_in))):
            continue
        found = _search_t(g_out, g_in, outer, inner, floor, margin, min_t)
        if found and (best is None or found[1] < best.R):
            best = ImproveMap(N, coeffs[: N + 1], found[0], found[1], (u1, u2), pre, eps)
    if best is None:
        raise ImproveError("no admissible t", order=n_bound, min_t=min_t)
    return best


def improvement(region: AnnularRegion, zeta: DiscDatum, beta: ImproveMap | None = None):
    """(old modulus, new modulus, max boundary image / R)."""
    beta = beta or improve_map(region, zeta)
    img = np.abs(beta(region.boundary()))
    return disc_modulus(zeta), disc_modulus(beta.apply(zeta)), float(np.max(img))
