"""Finite Blaschke products of degree <= 2 and boundary Pick interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import least_squares

from .core import Mobius, blaschke_factor


class InterpolationError(ArithmeticError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Blaschke:
    """theta * prod (z - a) / (1 - conj(a) z)."""

    theta: complex
    zeros: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", complex(self.theta) / abs(self.theta))
        object.__setattr__(self, "zeros", tuple(complex(a) for a in self.zeros))
        if any(abs(a) >= 1 for a in self.zeros):
            raise ValueError(f"Blaschke zeros must lie in the open disc: {self.zeros}")

    @classmethod
    def through(cls, zeros, z0, value) -> "Blaschke":
        """The product with given zeros taking ``value`` (unimodular) at z0 on T."""
        base = np.prod([blaschke_factor(a, z0) for a in zeros]) if zeros else 1.0
        return cls(value / base, tuple(zeros))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def num(self) -> np.ndarray:
        return npoly.polyfromroots(self.zeros) if self.zeros else np.array([1.0 + 0j])

    @property
    def den(self) -> np.ndarray:
        """prod (1 - conj(a) z), constant term 1."""
        out = np.array([1.0 + 0j])
        for a in self.zeros:
            out = npoly.polymul(out, [1, -np.conj(a)])
        return out

    def __call__(self, z):
        return self.theta * npoly.polyval(z, self.num) / npoly.polyval(z, self.den)

    def derivative(self, z):
        n, d = self.num, self.den
        top = npoly.polysub(npoly.polymul(npoly.polyder(n), d), npoly.polymul(n, npoly.polyder(d)))
        return self.theta * npoly.polyval(z, top) / npoly.polyval(z, d) ** 2


def schur_interpolate(z1, w1, second, tau, sigma, infinitesimal=False) -> Blaschke:
    """Degree-2 Blaschke p with p(z1)=w1, p(tau)=sigma, and p(z2)=w2 or p'(z1)=d.

    ``second`` is (z2, w2) in the discrete case and the derivative d
    otherwise.  Two steps of the Schur algorithm reduce the problem to a
    single rotation.
    """
    if infinitesimal:
        z2 = z1
        w2p = second * (1 - abs(z1) ** 2) / (1 - abs(w1) ** 2)
    else:
        z2, w2 = second
        w2p = blaschke_factor(w1, w2) / blaschke_factor(z1, z2)
    if abs(w2p) >= 1 - 1e-13:
        raise InterpolationError("interpolation data do not admit a degree-2 solution",
                                 abs(w2p) - 1)
    sig_p = blaschke_factor(w1, sigma) / blaschke_factor(z1, tau)
    lam = blaschke_factor(w2p, sig_p) / blaschke_factor(z2, tau)
    p1 = Mobius(1, -w2p).compose(Mobius(lam, z2))
    (A, B), (C, D) = p1.matrix()
    zc = np.conj(z1)
    quad = [-z1 * B + w1 * D, B - z1 * A + w1 * (C - zc * D), A - w1 * zc * C]
    zeros = tuple(npoly.polyroots(quad))
    return Blaschke.through(zeros, tau, sigma)


def _to_disc(x, y):
    u = complex(x, y)
    return u / np.sqrt(1 + abs(u) ** 2)


def _from_disc(a):
    return a / np.sqrt(1 - abs(a) ** 2)


def lsq_interpolate(z1, w1, second, tau, sigma, infinitesimal=False, seed=0,
                    starts=8, tol=1e-10) -> Blaschke:
    """Same problem as :func:`schur_interpolate` by damped least squares.

    Unknowns are (arg theta, a, b); the boundary condition is a single
    argument match since |p(tau)| = 1 holds automatically.
    """
    rng = np.random.default_rng(seed)

    def build(x):
        return Blaschke(np.exp(1j * x[0]), (_to_disc(x[1], x[2]), _to_disc(x[3], x[4])))

    def residual(x):
        p = build(x)
        r1 = p(z1) - w1
        if infinitesimal:
            r2 = p.derivative(z1) - second
        else:
            r2 = p(second[0]) - second[1]
        return [r1.real, r1.imag, r2.real, r2.imag, np.angle(np.conj(sigma) * p(tau))]

    grid = [0.5 * np.exp(2j * np.pi * k / 4) for k in range(4)]
    seeds = [(grid[i], grid[(i + j) % 4]) for i in range(4) for j in (1, 2)][:starts]
    best = None
    for a0, b0 in seeds:
        jitter = 0.05 * (rng.standard_normal(5))
        ua, ub = _from_disc(a0), _from_disc(b0)
        x0 = np.array([0.0, ua.real, ua.imag, ub.real, ub.imag]) + jitter
        sol = least_squares(residual, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        cost = float(np.max(np.abs(sol.fun)))
        if best is None or cost < best[0]:
            best = (cost, sol.x)
        if cost < tol * 1e-3:
            break
    if best[0] > tol:
        raise InterpolationError("least-squares interpolation did not converge", best[0])
    return build(best[1])
