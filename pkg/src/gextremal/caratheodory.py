"""The Carathéodory problem on G: the Phi family, rho profiles, and datum types."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize_scalar

from .core import Datum, DiscDatum, Mobius, _modulus, as_point, flat_beta

GRID = 4096
VALUE_TOL = 1e-10
SEPARATION_TOL = 1e-6
CONSTANT_TOL = 1e-10
EXCEPTIONAL_FACTOR = 1e-8
POLE_TOL = 1e-14


class PoleError(ZeroDivisionError):
    """Raised when omega * s1 == 2, where Phi_omega has a pole."""


class DatumType(enum.Enum):
    PURELY_UNBALANCED = "PurelyUnbalanced"
    EXCEPTIONAL = "Exceptional"
    PURELY_BALANCED = "PurelyBalanced"
    ROYAL = "Royal"
    FLAT = "Flat"


def phi(omega, s1, s2):
    """Vectorised Phi_omega(s1, s2); no pole check."""
    return (2 * omega * s2 - s1) / (2 - omega * s1)


def _check_pole(omega, s1):
    if abs(2 - omega * s1) <= POLE_TOL:
        raise PoleError(f"Phi_omega has a pole at omega={omega!r}, s1={s1!r}")


def phi_point(omega, s) -> complex:
    s1, s2 = as_point(s)
    omega = complex(omega)
    _check_pole(omega, s1)
    return phi(omega, s1, s2)


def phi_gradient(omega, s1, s2):
    den = 2 - omega * s1
    return -2 * (1 - omega**2 * s2) / den**2, 2 * omega / den


def phi_datum(omega, delta: Datum) -> DiscDatum:
    omega = complex(omega)
    p = delta.p
    if delta.is_infinitesimal:
        _check_pole(omega, p.s1)
        d1, d2 = phi_gradient(omega, p.s1, p.s2)
        v1, v2 = delta.v
        return DiscDatum(phi(omega, p.s1, p.s2), d1 * v1 + d2 * v2, True)
    return DiscDatum(phi_point(omega, p), phi_point(omega, delta.q))


def rho(delta: Datum, omega) -> float:
    if not delta.nondegenerate:
        raise ValueError("degenerate datum")
    return _modulus(phi_datum(omega, delta)) ** 2


class RhoProfile:
    """rho as |N(w)/D(w)|^2 on the circle, with N and D quadratic in w.

    Derivatives in the angle t (w = e^{it}) are exact: each t-derivative of
    g = N/D is i * w d/dw, which keeps the form P_n / D^(n+1).
    """

    def __init__(self, delta: Datum):
        if not delta.nondegenerate:
            raise ValueError("degenerate datum")
        self.delta = delta
        self.num, self.den = _fractional_quadratic(delta)
        self._numerators = [self.num]
        self._dprime = npoly.polyder(self.den)

    def _numerator(self, n):
        while len(self._numerators) <= n:
            k = len(self._numerators)
            p = self._numerators[-1]
            nxt = npoly.polysub(npoly.polymul(npoly.polyder(p), self.den),
                                k * npoly.polymul(p, self._dprime))
            self._numerators.append(npoly.polymulx(nxt))
        return self._numerators[n]

    def g_derivs(self, t, order):
        w = np.exp(1j * np.asarray(t, dtype=float))
        d = npoly.polyval(w, self.den)
        return [(1j) ** n * npoly.polyval(w, self._numerator(n)) / d ** (n + 1)
                for n in range(order + 1)]

    def __call__(self, t):
        g = self.g_derivs(t, 0)[0]
        return np.abs(g) ** 2

    def derivative(self, t, n):
        g = self.g_derivs(t, n)
        out = sum(math.comb(n, k) * g[k] * np.conj(g[n - k]) for k in range(n + 1))
        return np.real(out)


def _fractional_quadratic(delta: Datum):
    p = delta.p
    s1, s2 = p.s1, p.s2
    if delta.is_infinitesimal:
        v1, v2 = delta.v
        num = np.array([-2 * v1, 4 * v2, 2 * s2 * v1 - 2 * s1 * v2])
        beta = flat_beta(p)
        den = 2 * (1 - abs(s2) ** 2) * np.array([beta.conjugate(), -2, beta])
        return num, den
    t1, t2 = delta.q.s1, delta.q.s2
    num = np.array([-2 * (s1 - t1), 4 * (s2 - t2), -2 * (s2 * t1 - t2 * s1)])
    den = np.array([-2 * (t1.conjugate() - t2.conjugate() * s1),
                    4 * (1 - s2 * t2.conjugate()),
                    -2 * (s1 - t1.conjugate() * s2)])
    return num, den


@dataclass(frozen=True)
class CarSolution:
    """car(delta) and the maximizing angles of rho.

    When ``constant_flag`` is set every angle is a maximizer and
    ``maximizers`` is empty.
    """

    value: float
    maximizers: tuple
    constant_flag: bool
    local_maxima: tuple = field(default=(), compare=False)

    @property
    def omegas(self):
        return [complex(math.cos(t), math.sin(t)) for t in self.maximizers]


def _newton_critical(profile: RhoProfile, t, h, order=1):
    """Root of the order-th derivative near t, kept within [t - h, t + h]."""
    lo, hi = t - h, t + h
    for _ in range(60):
        f = float(profile.derivative(t, order))
        fp = float(profile.derivative(t, order + 1))
        step = -f / fp if fp != 0 else 0.0
        nt = t + step
        if not lo <= nt <= hi:
            # fall back to bisection on a sign change, else stay put
            flo = float(profile.derivative(lo, order))
            if flo * f < 0:
                hi = t
            else:
                lo = t
            nt = 0.5 * (lo + hi)
        if abs(nt - t) < 1e-15:
            return nt
        t = nt
    return t


def _refine_degenerate(profile: RhoProfile, t, scale):
    """Pull a flat maximum onto the root of the third derivative."""
    d2 = abs(float(profile.derivative(t, 2)))
    if d2 > 1e-4 * scale:
        return t
    tex = _newton_critical(profile, t, 1e-2, order=3)
    if abs(tex - t) > 1e-2:
        return t
    if (abs(float(profile.derivative(tex, 2))) <= d2
            and float(profile(tex)) >= float(profile(t)) - 1e-13):
        return tex
    return t


def _wrap(t):
    return (t + math.pi) % (2 * math.pi) - math.pi


def car_solve(delta: Datum, grid: int = GRID) -> CarSolution:
    profile = RhoProfile(delta)
    ts = np.arange(grid) * (2 * math.pi / grid)
    vals = profile(ts)
    vmax, vmin = float(vals.max()), float(vals.min())
    if vmax - vmin < CONSTANT_TOL:
        return CarSolution(math.sqrt(vmax), (), True)

    h = 2 * math.pi / grid
    left, right = np.roll(vals, 1), np.roll(vals, -1)
    peaks = np.nonzero((vals >= left) & (vals >= right))[0]
    refined = []
    for i in peaks:
        t = _newton_critical(profile, ts[i], 1.5 * h)
        t = _refine_degenerate(profile, t, vmax)
        v = float(profile(t))
        if v < vals[i] - 1e-13:
            t, v = ts[i], float(vals[i])
        refined.append((float(_wrap(t)), v))
    best = max(v for _, v in refined)
    winners = sorted((t, v) for t, v in refined if v >= best - VALUE_TOL)
    distinct = []
    for t, v in winners:
        if not distinct or not _same_peak(profile, distinct[-1], (t, v)):
            distinct.append((t, v))
    if len(distinct) > 1 and _same_peak(profile, distinct[-1], distinct[0]):
        distinct.pop()
    return CarSolution(math.sqrt(best), tuple(t for t, _ in distinct), False,
                       tuple(sorted(refined)))


def _same_peak(profile, a, b):
    """Two refined maxima are one peak if close or not separated by a dip."""
    (ta, va), (tb, vb) = a, b
    gap = _wrap(tb - ta)
    if abs(gap) <= SEPARATION_TOL:
        return True
    if abs(gap) > 1e-2:
        return False
    mid = float(profile(ta + gap / 2))
    return mid >= min(va, vb) - 1e-14


ROYAL_TOL = 1e-9


def _royal_point(s, tol):
    return abs(s.s1 * s.s1 - 4 * s.s2) <= tol


def analytic_flat_royal(delta: Datum, tol: float = ROYAL_TOL):
    """Exact flat/royal criteria; returns a DatumType or None."""
    p = delta.p
    if delta.is_infinitesimal:
        v1, v2 = delta.v
        scale = math.hypot(abs(v1), abs(v2))
        if _royal_point(p, tol) and abs(v1 * p.s1 / 2 - v2) <= tol * scale:
            return DatumType.ROYAL
        beta = flat_beta(p)
        if abs(v1 - beta.conjugate() * v2) <= tol * scale:
            return DatumType.FLAT
        return None
    if _royal_point(p, tol) and _royal_point(delta.q, tol):
        return DatumType.ROYAL
    if abs(flat_beta(p) - flat_beta(delta.q)) <= tol:
        return DatumType.FLAT
    return None


@dataclass(frozen=True)
class Classification:
    type: DatumType
    car: CarSolution
    curvature: float
    near_exceptional: bool = False
    notes: str = ""


def diagnose_datum(delta: Datum) -> Classification:
    sol = car_solve(delta)
    if sol.constant_flag:
        kind = analytic_flat_royal(delta)
        if kind is not None:
            return Classification(kind, sol, 0.0)
        return Classification(_nearest_flat_royal(delta), sol, 0.0, True,
                              "numerically constant profile without an exact flat/royal match")
    if len(sol.maximizers) >= 2:
        close = _nearly_merged(sol)
        return Classification(DatumType.PURELY_BALANCED, sol, float("nan"), close,
                              "maximizers nearly merged" if close else "")
    profile = RhoProfile(delta)
    t0 = sol.maximizers[0]
    curv = float(profile.derivative(t0, 2))
    threshold = EXCEPTIONAL_FACTOR * sol.value**2
    flagged = threshold < abs(curv) <= 10 * threshold or abs(curv) <= threshold < 10 * abs(curv)
    runner_up = _runner_up_gap(sol)
    if runner_up is not None and runner_up < 1e-6:
        flagged = True
    kind = DatumType.EXCEPTIONAL if abs(curv) <= threshold else DatumType.PURELY_UNBALANCED
    return Classification(kind, sol, curv, flagged)


def _runner_up_gap(sol: CarSolution):
    others = [v for t, v in sol.local_maxima
              if all(abs(_wrap(t - m)) > SEPARATION_TOL for m in sol.maximizers)]
    if not others:
        return None
    return sol.value**2 - max(others)


def _nearly_merged(sol: CarSolution):
    ts = sol.maximizers
    gaps = [abs(_wrap(ts[i] - ts[i - 1])) for i in range(len(ts))]
    return min(gaps) < 1e-3


def _nearest_flat_royal(delta: Datum):
    pts = delta.points()
    royal = max(abs(s.s1 * s.s1 - 4 * s.s2) for s in pts)
    if delta.is_infinitesimal:
        v1, v2 = delta.v
        flat = abs(v1 - flat_beta(delta.p).conjugate() * v2) / math.hypot(abs(v1), abs(v2))
    else:
        flat = abs(flat_beta(delta.p) - flat_beta(delta.q))
    return DatumType.ROYAL if royal < flat else DatumType.FLAT


def classify_datum(delta: Datum) -> DatumType:
    return diagnose_datum(delta).type


FD_STEP = 1e-3


def rho_curvature(delta: Datum, t0: float, step: float = FD_STEP) -> float:
    """Second t-derivative of rho at t0: 5-point stencil plus Richardson."""

    def f(t):
        return rho(delta, complex(math.cos(t), math.sin(t)))

    def stencil(h):
        return (-f(t0 + 2 * h) + 16 * f(t0 + h) - 30 * f(t0)
                + 16 * f(t0 - h) - f(t0 - 2 * h)) / (12 * h * h)

    coarse, fine = stencil(step), stencil(step / 2)
    return (16 * fine - coarse) / 15


def mtilde(m: Mobius, s1, s2):
    """The automorphism of G induced by m, applied to (s1, s2)."""
    tau, alpha = m.c, m.a
    ac = np.conj(alpha)
    q = 1 - ac * s1 + ac**2 * s2
    a = -2 * alpha + (1 + abs(alpha) ** 2) * s1 - 2 * ac * s2
    b = s2 - alpha * s1 + alpha**2
    return tau * a / q, tau**2 * b / q


def mtilde_jacobian(m: Mobius, s1, s2):
    tau, alpha = m.c, m.a
    ac = np.conj(alpha)
    q = 1 - ac * s1 + ac**2 * s2
    a = -2 * alpha + (1 + abs(alpha) ** 2) * s1 - 2 * ac * s2
    b = s2 - alpha * s1 + alpha**2
    dq = (-ac, ac**2)
    da = (1 + abs(alpha) ** 2, -2 * ac)
    db = (-alpha, 1)
    row1 = [tau * (da[j] * q - a * dq[j]) / q**2 for j in range(2)]
    row2 = [tau**2 * (db[j] * q - b * dq[j]) / q**2 for j in range(2)]
    return np.array([row1, row2], dtype=complex)


def transport_datum(m: Mobius, delta: Datum) -> Datum:
    p = delta.p
    np_ = mtilde(m, p.s1, p.s2)
    if delta.is_infinitesimal:
        jac = mtilde_jacobian(m, p.s1, p.s2)
        return Datum.infinitesimal(np_, tuple(jac @ np.array(delta.v)))
    return Datum.discrete(np_, mtilde(m, delta.q.s1, delta.q.s2))


def curvature_transport_check(delta: Datum, m: Mobius):
    sol = car_solve(delta)
    if sol.constant_flag or len(sol.maximizers) != 1:
        raise ValueError("curvature transport needs a unique maximizer")
    t0 = sol.maximizers[0]
    w0 = complex(math.cos(t0), math.sin(t0))
    w1 = m.reflect()(w0)
    moved = transport_datum(m, delta)
    lhs = rho_curvature(moved, math.atan2(w1.imag, w1.real))
    factor = abs(1 - m.a * w0) ** 4 / (1 - abs(m.a) ** 2) ** 2
    return lhs, factor * rho_curvature(delta, t0)


@dataclass(frozen=True)
class Pencil2:
    Sk: np.ndarray
    Pk: np.ndarray
    kappa: float

    @classmethod
    def build(cls, delta: Datum, kappa: float) -> "Pencil2":
        s1, s2 = delta.p
        v1, v2 = delta.v
        S = np.array([[s1, kappa * v1], [0, s1]], dtype=complex)
        P = np.array([[s2, kappa * v2], [0, s2]], dtype=complex)
        return cls(S, P, kappa)

    def T(self) -> np.ndarray:
        S, P = self.Sk, self.Pk
        eye = np.eye(2)
        gram = eye - P.conj().T @ P
        evals, evecs = np.linalg.eigh(gram)
        if evals.min() <= 0:
            raise ValueError("||P_kappa|| >= 1")
        root = evecs @ np.diag(evals ** -0.5) @ evecs.conj().T
        return root @ (S - S.conj().T @ P) @ root


def numerical_radius(T: np.ndarray, grid: int = 720) -> float:
    """max over theta of the top eigenvalue of Re(e^{i theta} T)."""

    def top(theta):
        th = np.atleast_1d(theta)
        e = np.exp(1j * th)[:, None, None]
        H = 0.5 * (e * T + np.conj(e) * T.conj().T)
        a, d = H[:, 0, 0].real, H[:, 1, 1].real
        b = np.abs(H[:, 0, 1])
        return 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b**2)

    thetas = np.arange(grid) * (2 * math.pi / grid)
    vals = top(thetas)
    i = int(np.argmax(vals))
    h = 2 * math.pi / grid
    res = minimize_scalar(lambda th: -top(th)[0], bounds=(thetas[i] - h, thetas[i] + h),
                          method="bounded", options={"xatol": 1e-12})
    return max(float(vals[i]), -float(res.fun))


class PencilError(ArithmeticError):
    pass


def car_nr_oracle(delta: Datum, iterations: int = 80) -> float:
    """car of an infinitesimal datum via the numerical range of T_kappa."""
    if not delta.is_infinitesimal or not delta.nondegenerate:
        raise ValueError("needs a nondegenerate infinitesimal datum")
    s1, s2 = delta.p
    if abs(s1) >= 2:
        raise ValueError("|s1| must be < 2")
    v2 = delta.v[1]
    kappa_p = (1 - abs(s2) ** 2) / abs(v2) if v2 != 0 else math.inf

    def admissible(kappa):
        return numerical_radius(Pencil2.build(delta, kappa).T()) <= 1

    if math.isfinite(kappa_p):
        hi = kappa_p * (1 - 1e-13)
        if admissible(hi):
            return 1 / kappa_p
    else:
        hi = 1.0
        while admissible(hi):
            hi *= 2
            if hi > 1e12:
                raise PencilError("no critical kappa found")
    lo = 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 1 / (0.5 * (lo + hi))
