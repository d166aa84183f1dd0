"""Batch command-line front end.

A request is a JSON object ``{"command": ..., "payload": {...}, "seed": n}``
read from ``--input`` (or stdin).  Results go to stdout as JSON, or into the
``--output`` directory.  Exit codes: 0 ok, 1 bad input, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .caratheodory import car_solve, diagnose_datum
from .core import Datum, DiscDatum, Mobius, PointG, Region, disc_modulus, in_g, region_membership
from .geodesics import FAMILY_ALIASES, GeodesicMap, canonical_geodesic, solve_kobayashi

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

Complex = Union[float, tuple[float, float]]


def to_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def from_complex(z) -> list:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ArithmeticError("non-finite value in output")
    return [z.real + 0.0, z.imag + 0.0]


class InputError(ValueError):
    pass


# --- request schema ----------------------------------------------------------------------


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatumSpec(Strict):
    discrete: Optional[tuple[tuple[Complex, Complex], tuple[Complex, Complex]]] = None
    infinitesimal: Optional[tuple[tuple[Complex, Complex], tuple[Complex, Complex]]] = None

    @model_validator(mode="after")
    def _one_kind(self):
        if (self.discrete is None) == (self.infinitesimal is None):
            raise ValueError("give exactly one of 'discrete' or 'infinitesimal'")
        return self

    def build(self) -> Datum:
        if self.discrete is not None:
            p, q = ([to_complex(c) for c in pt] for pt in self.discrete)
            delta = Datum.discrete(p, q)
        else:
            p, v = ([to_complex(c) for c in pt] for pt in self.infinitesimal)
            delta = Datum.infinitesimal(p, v)
        for s in delta.points():
            if not in_g(s.s1, s.s2):
                raise InputError(f"point {list(map(from_complex, s))} is not in G")
        if not delta.nondegenerate:
            raise InputError("datum is degenerate")
        return delta


class FamilySpec(Strict):
    family: str
    r: Optional[float] = None
    beta: Optional[Complex] = None

    @field_validator("family")
    @classmethod
    def _known(cls, v):
        if v not in FAMILY_ALIASES:
            raise ValueError(f"unknown family, expected one of {sorted(FAMILY_ALIASES)}")
        return v

    def build(self) -> GeodesicMap:
        params = {}
        if self.r is not None:
            params["r"] = self.r
        if self.beta is not None:
            params["beta"] = to_complex(self.beta)
        try:
            return canonical_geodesic(self.family, **params)
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad parameters for {self.family}: {exc}") from exc


class DatumPayload(Strict):
    datum: DatumSpec


class GeodesicPayload(Strict):
    datum: Optional[DatumSpec] = None
    family: Optional[str] = None
    r: Optional[float] = None
    beta: Optional[Complex] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.datum is None) == (self.family is None):
            raise ValueError("give exactly one of 'datum' or 'family'")
        return self


class TracePayload(Strict):
    family: str = "k_r"
    r: Optional[float] = None
    beta: Optional[float] = None
    n: int = Field(256, ge=2, le=100000)
    svg: bool = False


class ExtendPayload(Strict):
    measure: Optional[list[tuple[Complex, Complex, float]]] = None
    grid: int = Field(4, ge=1, le=64)
    region: Optional[tuple[Complex, float]] = None
    disc_datum: Optional[tuple[Complex, Complex]] = None
    infinitesimal: bool = False

    @model_validator(mode="after")
    def _one_mode(self):
        herglotz = self.measure is not None
        improve = self.region is not None or self.disc_datum is not None
        if herglotz == improve:
            raise ValueError("give either 'measure' or both 'region' and 'disc_datum'")
        if improve and (self.region is None or self.disc_datum is None):
            raise ValueError("'region' and 'disc_datum' go together")
        return self


class Sym2Payload(Strict):
    kind: Literal["PointPair", "FullBidisc", "BalancedUnion", "VBeta", "DiagonalUnionVBeta", "Vmr"]
    point: Optional[tuple[Complex, Complex]] = None
    m: Optional[tuple[Complex, Complex]] = None
    beta: Optional[Complex] = None
    r: Optional[float] = None
    points: list[tuple[Complex, Complex]] = Field(default_factory=list)
    tol: float = Field(1e-9, ge=0)


class VerifyPayload(Strict):
    criteria: Optional[list[int]] = None


PAYLOADS = {
    "classify": DatumPayload,
    "distance": DatumPayload,
    "geodesic": GeodesicPayload,
    "variety": GeodesicPayload,
    "trace": TracePayload,
    "extend": ExtendPayload,
    "sym2": Sym2Payload,
    "verify": VerifyPayload,
}


class Request(Strict):
    command: Literal["classify", "distance", "geodesic", "variety", "trace", "extend", "sym2", "verify"]
    payload: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(0, ge=0, lt=2**64)
    output_path: Optional[str] = None

    def typed_payload(self):
        try:
            return PAYLOADS[self.command].model_validate(self.payload)
        except ValidationError as exc:
            raise InputError(_format_errors(exc, prefix=("payload",))) from exc


def _format_errors(exc: ValidationError, prefix=()) -> str:
    parts = []
    for err in exc.errors():
        path = ".".join(str(p) for p in (*prefix, *err["loc"]))
        parts.append(f"{path or '<root>'}: {err['msg']}")
    return "; ".join(parts)


def parse_request(text: str) -> Request:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("request must be a JSON object")
    try:
        req = Request.model_validate(data)
    except ValidationError as exc:
        raise InputError(_format_errors(exc)) from exc
    req.typed_payload()
    return req


# --- command handlers ---------------------------------------------------------------------


def _geodesic_from(payload: GeodesicPayload):
    if payload.datum is not None:
        sol = solve_kobayashi(payload.datum.build())
        return sol.geodesic, sol.zeta
    spec = FamilySpec(family=payload.family, r=payload.r, beta=payload.beta)
    return spec.build(), None


def _zeta_json(zeta: DiscDatum):
    key = "infinitesimal" if zeta.infinitesimal else "discrete"
    return {key: [from_complex(zeta.z), from_complex(zeta.w)], "modulus": disc_modulus(zeta)}


def _classify(req, payload):
    info = diagnose_datum(payload.datum.build())
    return {
        "type": info.type.value,
        "car": info.car.value,
        "maximizers": [from_complex(w) for w in info.car.omegas],
        "constant": info.car.constant_flag,
        "near_exceptional": info.near_exceptional,
    }


def _distance(req, payload):
    delta = payload.datum.build()
    car = car_solve(delta).value
    sol = solve_kobayashi(delta)
    kob = disc_modulus(sol.zeta)
    return {"car": car, "kob": kob, "poincare": math.atanh(min(car, 1 - 1e-16)),
            "infinitesimal": delta.is_infinitesimal}


def _mobius_json(m: Mobius):
    return {"c": from_complex(m.c), "a": from_complex(m.a)}


def _geodesic(req, payload):
    k, zeta = _geodesic_from(payload)
    out = {
        "family": k.family.value,
        "degree": k.degree,
        "omega": from_complex(k.omega),
        "upsilon": _mobius_json(k.upsilon),
        "transport": _mobius_json(k.transport),
        "theta": from_complex(k.k2.theta),
        "zeros": [from_complex(a) for a in k.k2.zeros],
    }
    if zeta is not None:
        out["zeta"] = _zeta_json(zeta)
    return out


def _variety(req, payload):
    from .variety import variety_polynomial

    k, _ = _geodesic_from(payload)
    try:
        P = variety_polynomial(k)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    names = ("c00", "c10", "c01", "c20", "c11", "c02")
    return {
        "raw": {n: from_complex(c) for n, c in zip(names, P.coefficients())},
        "normalized": {n: from_complex(c) for n, c in zip(names, P.normalized().coefficients())},
    }


TRACE_FAMILIES = ("k_r", "g_r", "royal", "f_beta", "flat")


def trace_rows(k: GeodesicMap, n: int):
    """Real slice x in [-1, 1] of a geodesic with real coefficients."""
    xs = np.linspace(-1.0, 1.0, n)
    rows = []
    for x in xs:
        s1, s2 = k.evaluate(complex(x))
        if abs(s1.imag) > 1e-12 or abs(s2.imag) > 1e-12:
            raise ArithmeticError("geodesic leaves the real slice")
        s = PointG(s1.real, s2.real)
        rows.append((float(x), s.s1.real, s.s2.real, _point_type(s)))
    return rows


def _point_type(s: PointG) -> str:
    if region_membership(s, Region.DISTINGUISHED_BOUNDARY, 1e-12):
        return "distinguished_boundary"
    if region_membership(s, Region.ROYAL, 1e-12):
        return "royal"
    if region_membership(s, Region.G):
        return "interior"
    return "boundary"


def trace_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "s", "p", "type"])
    for x, s, p, kind in rows:
        w.writerow([repr(x), repr(s), repr(p), kind])
    return buf.getvalue()


def trace_svg(rows) -> str:
    # viewBox maps s in [-2.5, 2.5] and p in [-1.25, 1.25]; y axis flipped
    def xy(s, p):
        return 300 + 120 * s, 200 - 150 * p

    tri = " ".join(f"{x:.3f},{y:.3f}" for x, y in (xy(-2, 1), xy(2, 1), xy(0, -1)))
    curve = " ".join(f"{x:.3f},{y:.3f}" for x, y in (xy(s, p) for _, s, p, _ in rows))
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 600 400" width="600" height="400">\n'
        f'  <polygon points="{tri}" fill="#f4f4f4" stroke="#444" stroke-width="1"/>\n'
        f'  <polyline points="{curve}" fill="none" stroke="#c0392b" stroke-width="2"/>\n'
        "</svg>\n"
    )


def _trace(req, payload: TracePayload):
    if payload.family not in TRACE_FAMILIES:
        raise InputError(f"trace supports {', '.join(TRACE_FAMILIES)}")
    k = FamilySpec(family=payload.family, r=payload.r, beta=payload.beta).build()
    rows = trace_rows(k, payload.n)
    files = {"trace.csv": trace_csv(rows)}
    if payload.svg:
        files["trace.svg"] = trace_svg(rows)
    return {"rows": len(rows), "family": payload.family}, files


def _extend(req, payload: ExtendPayload):
    from .extension import AnnularRegion, FiniteMeasureT2, herglotz_eval, improve_map

    if payload.measure is not None:
        try:
            mu = FiniteMeasureT2(tuple((to_complex(a), to_complex(b), w) for a, b, w in payload.measure))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        radii = [(j + 1) / (payload.grid + 1) for j in range(payload.grid)]
        angles = [2 * math.pi * j / (2 * payload.grid) for j in range(2 * payload.grid)]
        lam = [r * complex(math.cos(a), math.sin(a)) for r in radii for a in angles]
        table = []
        for i, a in enumerate(lam):
            for b in lam[i:]:
                s = PointG(a + b, a * b)
                table.append({"s": [from_complex(s.s1), from_complex(s.s2)],
                              "g": from_complex(herglotz_eval(mu, s))})
        return {"points": len(table), "table": table}
    try:
        region = AnnularRegion(to_complex(payload.region[0]), payload.region[1])
        z, w = (to_complex(x) for x in payload.disc_datum)
        zeta = DiscDatum(z, w, payload.infinitesimal)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        beta = improve_map(region, zeta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return {"order": beta.order, "t": beta.t, "R": beta.R, "epsilon": beta.epsilon,
            "modulus_before": disc_modulus(zeta), "modulus_after": disc_modulus(beta.apply(zeta))}


def _sym2(req, payload: Sym2Payload):
    from .symbidisc import build_sym_set, image_residual, pi_image_kind, sym_member

    params = {}
    if payload.point is not None:
        params["point"] = tuple(to_complex(x) for x in payload.point)
    if payload.m is not None:
        params["m"] = Mobius(to_complex(payload.m[0]), to_complex(payload.m[1]))
    if payload.beta is not None:
        params["beta"] = to_complex(payload.beta)
    if payload.r is not None:
        params["r"] = payload.r
    try:
        V = build_sym_set(payload.kind, **params)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad parameters for {payload.kind}: {exc}") from exc
    report = []
    for pt in payload.points:
        z, w = (to_complex(x) for x in pt)
        inside = abs(z) < 1 and abs(w) < 1
        member = sym_member(V, (z, w), payload.tol)
        entry = {"point": [from_complex(z), from_complex(w)], "member": member,
                 "member_transposed": sym_member(V, (w, z), payload.tol), "in_bidisc": inside}
        if inside:
            entry["pi"] = [from_complex(z + w), from_complex(z * w)]
            entry["image_residual"] = image_residual(V, z + w, z * w)
        report.append(entry)
    return {"kind": V.kind.value, "image": pi_image_kind(V).value, "points": report}


def _verify(req, payload: VerifyPayload):
    from .acceptance import run_all

    results = run_all(seed=req.seed, only=payload.criteria)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    return {"passed": ok, "criteria": [r.as_dict() for r in results]}, {}, lines, ok


HANDLERS = {
    "classify": _classify,
    "distance": _distance,
    "geodesic": _geodesic,
    "variety": _variety,
    "trace": _trace,
    "extend": _extend,
    "sym2": _sym2,
    "verify": _verify,
}


def execute(req: Request):
    """Run a request; returns (result dict, extra files, report lines, success)."""
    out = HANDLERS[req.command](req, req.typed_payload())
    if req.command == "verify":
        return out
    if isinstance(out, tuple):
        result, files = out
    else:
        result, files = out, {}
    return result, files, [], True


def _check_finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ArithmeticError("non-finite value in output")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v)
    if isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite(v)


def dumps(obj) -> str:
    _check_finite(obj)
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gextremal", description=__doc__.splitlines()[0])
    ap.add_argument("--input", help="request JSON file (default: stdin)")
    ap.add_argument("--output", help="directory for result files (default: stdout)")
    ap.add_argument("--seed", type=int, help="override the request seed")
    return ap


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.input:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = stdin.read()
        req = parse_request(text)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise InputError("seed must be an unsigned 64-bit integer")
            req = req.model_copy(update={"seed": args.seed})
        result, files, lines, ok = execute(req)
        body = dumps({"command": req.command, "seed": req.seed, "result": result})
    except (InputError, ValidationError, OSError) as exc:
        print(f"input error: {exc}", file=stderr)
        return EXIT_INPUT
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC

    for line in lines:
        print(line, file=stdout)
    outdir = args.output or req.output_path
    if outdir is not None:
        try:
            write_atomic(os.path.join(outdir, "result.json"), body)
            for fname, text in sorted(files.items()):
                write_atomic(os.path.join(outdir, fname), text)
        except OSError as exc:
            print(f"input error: cannot write output: {exc}", file=stderr)
            return EXIT_INPUT
    elif "trace.csv" in files:
        stdout.write(files["trace.csv"])
    elif not lines:
        stdout.write(body)
    return EXIT_OK if ok else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
