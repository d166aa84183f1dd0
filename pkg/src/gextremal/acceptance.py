"""Acceptance suite: one runner per criterion, shared by ``verify`` and the tests."""

from __future__ import annotations

import io
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .caratheodory import (car_nr_oracle, car_solve, diagnose_datum, mtilde, phi,
                           rho, rho_curvature, transport_datum)
from .core import Datum, DiscDatum, Mobius, PointG, disc_modulus
from .geodesics import (InconsistentSignature, aut_apply, canonical_geodesic, geometric_classify,
                        royal_signature, solve_kobayashi)

FAMILIES = ("k_r", "g_r", "h_r", "f_beta", "royal")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:>2} {mark}  {self.title}: {self.detail} ({self.elapsed:.1f}s)"

    def as_dict(self):
        return asdict(self)


def _rng(seed, number):
    return np.random.default_rng([seed, number])


def rdisc(rng, radius=0.9) -> complex:
    return complex(radius * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))


def rmobius(rng, radius=0.7) -> Mobius:
    return Mobius(np.exp(2j * np.pi * rng.random()), rdisc(rng, radius))


def rpoint_g(rng, radius=0.9) -> PointG:
    a, b = rdisc(rng, radius), rdisc(rng, radius)
    return PointG(a + b, a * b)


def family_params(rng, family):
    if family in ("k_r", "g_r"):
        return {"r": rng.uniform(0.05, 0.95)}
    if family == "h_r":
        return {"r": rng.uniform(0.1, 5.0)}
    if family == "f_beta":
        return {"beta": rdisc(rng)}
    return {}


def canonical_datums(rng, per_family=200):
    """(family, geodesic, zeta, datum) from every canonical family.

    Every other geodesic is moved by a random automorphism; every fourth
    datum is infinitesimal.
    """
    out = []
    for fam in FAMILIES:
        for i in range(per_family):
            k = canonical_geodesic(fam, **family_params(rng, fam))
            if i % 2:
                k = aut_apply(rmobius(rng), k)
            if i % 4 == 3:
                zeta = DiscDatum(rdisc(rng), rdisc(rng) * 0.5 + 0.1, True)
            else:
                zeta = DiscDatum(rdisc(rng), rdisc(rng))
            out.append((fam, k, zeta, k.push(zeta)))
    return out


def _timed(number, title, fn, seed):
    t0 = time.perf_counter()
    passed, detail = fn(_rng(seed, number))
    return CriterionResult(number, title, bool(passed), detail, time.perf_counter() - t0)


# --- criteria -------------------------------------------------------------------------------


def c1_car_equals_kob(rng):
    samples = canonical_datums(rng)
    t0 = time.perf_counter()
    worst = max(abs(car_solve(d).value - disc_modulus(z)) for _, _, z, d in samples)
    elapsed = time.perf_counter() - t0
    return worst < 1e-9 and elapsed < 30, f"{len(samples)} datums, max |car - kob| = {worst:.2e}, solve time {elapsed:.1f}s"


def c2_pentachotomy(rng):
    samples = canonical_datums(rng)
    t0 = time.perf_counter()
    mismatches, flagged = 0, 0
    for _, _, _, d in samples:
        sol = solve_kobayashi(d)
        sig = royal_signature(sol.geodesic)
        try:
            geo = geometric_classify(sig)
        except InconsistentSignature:
            geo = None
        near = sol.classification.near_exceptional or sig.ambiguous
        flagged += near
        if geo is not sol.classification.type and not near:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    return (mismatches == 0 and elapsed < 120,
            f"{mismatches} mismatches outside the flagged band, {flagged}/{len(samples)} flagged, {elapsed:.1f}s")


CENSUS = {
    "k_r": [(False, 1), (True, 2)],
    "g_r": [(True, 2), (True, 2)],
    "h_r": [(True, 4)],
    "f_beta": [(False, 1)],
}


def c3_royal_census(rng):
    bad = []
    count = 0
    for fam, expected in CENSUS.items():
        for i in range(20):
            k = canonical_geodesic(fam, **family_params(rng, fam))
            if i % 2:
                k = aut_apply(rmobius(rng), k).rebase()
            sig = royal_signature(k)
            shape = sorted((n.boundary, n.order) for n in sig.nodes)
            count += 1
            if shape != sorted(expected) or abs(sig.total - k.degree) > 0 or sig.identically_royal:
                bad.append((fam, shape, sig.total, k.degree))
    detail = (f"{count} geodesics; k_r interior 1 + boundary 1, g_r boundary 1 + 1, "
              f"h_r one boundary order-4 node of multiplicity 2; {len(bad)} mismatches")
    return not bad, detail + (f", first {bad[0]}" if bad else "")


def c4_second_derivative(rng):
    worst = 0.0
    for _ in range(100):
        r = rng.uniform(0.05, 0.95)
        z1, z2 = rdisc(rng), rdisc(rng)
        k = canonical_geodesic("k_r", r=r)
        d = k.push(DiscDatum(z1, z2))
        sol = car_solve(d)
        fd = rho_curvature(d, sol.maximizers[0])
        car = sol.value
        closed = -(1 - car**2) * 2 * r * (1 - r) * abs(z1 / (1 - z1) - z2 / (1 - z2)) ** 2
        worst = max(worst, abs(fd - closed) / abs(closed))
    worst_h = 0.0
    for _ in range(100):
        k = canonical_geodesic("h_r", r=rng.uniform(0.1, 5.0))
        d = k.push(DiscDatum(rdisc(rng), rdisc(rng)))
        sol = car_solve(d)
        worst_h = max(worst_h, abs(rho_curvature(d, sol.maximizers[0])))
    return (worst < 1e-5 and worst_h < 1e-6,
            f"k_r relative error {worst:.2e}; h_r max |curvature| {worst_h:.2e}")


def c5_variety(rng):
    from .variety import fit_polynomial, variety_polynomial

    worst, conj = 0.0, 0.0
    fit_gap = 0.0
    for fam in ("k_r", "g_r", "h_r", "royal"):
        for _ in range(5):
            k = aut_apply(rmobius(rng), canonical_geodesic(fam, **family_params(rng, fam)))
            P = variety_polynomial(k).normalized()
            zs = np.array([rdisc(rng, 0.999) for _ in range(1000)])
            s1, s2 = k.evaluate(zs)
            worst = max(worst, float(np.max(np.abs(P(s1, s2)))))
            conj = max(conj, P.self_conjugacy_error())
            F = fit_polynomial(k, seed=int(rng.integers(2**31))).normalized()
            fit_gap = max(fit_gap, float(np.max(np.abs(P.coefficients() - F.coefficients()))))
    P = variety_polynomial(canonical_geodesic("k_r", r=0.5))
    exact = (0, 1, 2, -1.5, 1, 0)
    exact_ok = all(c == e for c, e in zip(P.coefficients(), exact))
    return (worst < 1e-10 and conj < 1e-12 and exact_ok and fit_gap < 1e-8,
            f"max |P(k(z))| {worst:.2e}, self-conjugacy {conj:.2e}, fit route gap {fit_gap:.2e}, "
            f"P_1/2 exact: {exact_ok}")


def c6_covariance(rng):
    worst_phi, worst_rho = 0.0, 0.0
    for _ in range(10000):
        w = np.exp(2j * np.pi * rng.random())
        s, q = rpoint_g(rng), rpoint_g(rng)
        m = rmobius(rng, 0.9)
        m1 = Mobius(m.c, -m.a)
        w1 = m.reflect().inverse()(w)
        lhs = phi(w, *mtilde(m, s.s1, s.s2))
        rhs = m1(phi(w1, s.s1, s.s2))
        worst_phi = max(worst_phi, abs(lhs - rhs))
        d = Datum.discrete(s, q)
        if d.nondegenerate:
            worst_rho = max(worst_rho, abs(rho(transport_datum(m, d), w) - rho(d, w1)))
    type_bad, car_gap, skipped = 0, 0.0, 0
    for _, _, _, d in canonical_datums(rng, per_family=100):
        m = rmobius(rng)
        a, b = diagnose_datum(d), diagnose_datum(transport_datum(m, d))
        car_gap = max(car_gap, abs(a.car.value - b.car.value))
        if a.type is not b.type:
            if a.near_exceptional or b.near_exceptional:
                skipped += 1
            else:
                type_bad += 1
    ok = worst_phi < 1e-10 and worst_rho < 1e-10 and type_bad == 0 and car_gap < 1e-9
    return ok, (f"conjugation {worst_phi:.2e}, rho transport {worst_rho:.2e}; 500 datums: "
                f"{type_bad} type changes ({skipped} in flagged band), max car change {car_gap:.2e}")


def c7_herglotz(rng):
    from .extension import FiniteMeasureT2, cauchy_riemann_residual, herglotz_eval, herglotz_extension

    t0 = time.perf_counter()
    agree, min_re, centre, cr = 0.0, math.inf, 0.0, 0.0
    for i in range(50):
        mu = FiniteMeasureT2.random(rng, atoms=int(rng.integers(1, 9)))
        for _ in range(50):
            z = rdisc(rng, 0.95)
            for s in (PointG(2 * z, z * z), PointG(0, z)):
                agree = max(agree, abs(herglotz_eval(mu, s, True) - herglotz_eval(mu, s)))
        pts = [rpoint_g(rng, 0.99) for _ in range(200)]
        s1 = np.array([p.s1 for p in pts])
        s2 = np.array([p.s2 for p in pts])
        min_re = min(min_re, float(np.min(herglotz_extension(mu, s1, s2).real)))
        centre = max(centre, abs(herglotz_eval(mu, PointG(0, 0)) - 1))
        if i < 10:
            inner = [rpoint_g(rng, 0.8) for _ in range(20)]
            cr = max(cr, cauchy_riemann_residual(lambda a, b: herglotz_extension(mu, a, b),
                                                 np.array([p.s1 for p in inner]),
                                                 np.array([p.s2 for p in inner])))
    elapsed = time.perf_counter() - t0
    ok = agree < 1e-12 and min_re > 0 and centre < 1e-12 and cr < 1e-6 and elapsed < 10
    return ok, (f"|g - h| on R u F_0 {agree:.2e}, min Re g {min_re:.3e} over 10^4 points, "
                f"|g(0,0) - 1| {centre:.1e}, Cauchy-Riemann {cr:.1e}")


def annulus_case(rng, index):
    """Random holed disc and datum: |w0| <= 0.5, r in [0.1, 0.9](1 - |w0|), |z| <= 0.9."""
    from .extension import AnnularRegion

    while True:
        w0 = rdisc(rng, 0.5)
        region = AnnularRegion(w0, (1 - abs(w0)) * rng.uniform(0.1, 0.9))
        pts = []
        for _ in range(1000):
            z = rdisc(rng, 0.9)
            if region.contains(z):
                pts.append(z)
            if len(pts) == 2:
                break
        if len(pts) == 2:
            break
    if index % 2:
        return region, DiscDatum(pts[0], pts[1])
    return region, DiscDatum(pts[0], complex(rng.normal(), rng.normal()), True)


def c8_improve(rng):
    from .extension import ImproveError, improve_map

    inside, built, gains = 0, 0, []
    for i in range(50):
        region, zeta = annulus_case(rng, i)
        try:
            beta = improve_map(region, zeta)
        except ImproveError:
            gains.append(-math.inf)
            continue
        built += 1
        img = np.abs(beta(region.boundary(4096)))
        inside += bool(np.all(img < 1) and beta.R < 1)
        gains.append(disc_modulus(beta.apply(zeta)) - disc_modulus(zeta))
    gains = np.array(gains)
    good = int(np.sum(gains >= 1e-6))
    strict = int(np.sum(gains > 0))
    return (good == 50 and inside == 50,
            f"{built}/50 maps built, {inside}/50 boundary images inside radius R < 1, "
            f"{strict}/50 strict gains, {good}/50 gains >= 1e-6 (min {gains.min():.1e})")


def c9_numerical_range(rng):
    worst = 0.0
    for _ in range(100):
        p = rpoint_g(rng)
        v = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
        d = Datum.infinitesimal(p, v)
        worst = max(worst, abs(car_nr_oracle(d) - car_solve(d).value))
    return worst < 1e-6, f"100 infinitesimal datums, max |oracle - car| = {worst:.2e}"


def c10_bidisc(rng):
    from .symbidisc import build_sym_set, image_residual, sample_members
    from .variety import compose_with_sym, family_polynomial

    exact = all(compose_with_sym(family_polynomial("Pr", r)) == family_polynomial("Hr", r)
                for r in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 7), Fraction(9, 10)))
    sets = [
        build_sym_set("PointPair", point=(rdisc(rng), rdisc(rng))),
        build_sym_set("FullBidisc"),
        build_sym_set("BalancedUnion", m=Mobius(np.exp(0.8j), 0.6 * np.exp(2j * np.pi * rng.random()))),
        build_sym_set("VBeta", beta=rdisc(rng)),
        build_sym_set("DiagonalUnionVBeta", beta=rdisc(rng)),
        build_sym_set("Vmr", m=rmobius(rng, 0.5), r=rng.uniform(0.1, 0.9)),
    ]
    worst = {}
    for V in sets:
        pts = sample_members(V, 200, rng)
        worst[V.kind.value] = max(image_residual(V, z + w, z * w) for z, w in pts)
    ok = exact and all(v < 1e-9 for v in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return ok, f"H_r = P_r o pi exact: {exact}; worst image residual: {detail}"


def c11_trace(rng, seed=0):
    from .cli import main

    request = '{"command": "trace", "payload": {"family": "k_r", "r": 0.5, "n": 256}, "seed": %d}' % seed
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for run in range(2):
            src = os.path.join(tmp, "req.json")
            with open(src, "w") as fh:
                fh.write(request)
            out = os.path.join(tmp, f"run{run}")
            code = main(["--input", src, "--output", out], stdout=io.StringIO(), stderr=io.StringIO())
            if code != 0:
                return False, f"CLI exit code {code}"
            with open(os.path.join(out, "trace.csv"), "rb") as fh:
                blobs.append(fh.read())
    rows = blobs[0].decode().splitlines()[1:]
    worst = 0.0
    for row in rows:
        _, s, p, _ = row.split(",")
        s, p = float(s), float(p)
        worst = max(worst, abs(p - s * (3 * s - 2) / (2 * (s + 2))))
    same = blobs[0] == blobs[1]
    return (len(rows) == 256 and worst < 1e-10 and same,
            f"{len(rows)} rows, max |p - s(3s-2)/(2(s+2))| = {worst:.1e}, byte-identical rerun: {same}")


CRITERIA = {
    1: ("car = kob on constructed geodesics", c1_car_equals_kob),
    2: ("analytic and geometric classification agree", c2_pentachotomy),
    3: ("royal-node census", c3_royal_census),
    4: ("second-derivative closed forms", c4_second_derivative),
    5: ("variety polynomial", c5_variety),
    6: ("automorphism covariance", c6_covariance),
    7: ("Herglotz extension", c7_herglotz),
    8: ("datum-enlarging map on holed discs", c8_improve),
    9: ("numerical-range oracle", c9_numerical_range),
    10: ("bidisc layer", c10_bidisc),
    11: ("real-slice trace", c11_trace),
}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    title, fn = CRITERIA[number]
    if number == 11:
        return _timed(number, title, lambda rng: fn(rng, seed), seed)
    return _timed(number, title, fn, seed)


def run_all(seed: int = 0, only=None):
    return [run_criterion(n, seed) for n in sorted(only or CRITERIA)]
