"""Self-contained JSON documents (schema "runnerlab/1") for certificates and traces.

Rationals are written as {"num": ..., "den": ..., "decimal": ...}; the decimal is
for humans and is ignored on reading.  Enclosures of transcendental quantities are
written as {"lo": rat, "hi": rat, "decimal": "center ± radius"}.
"""

from __future__ import annotations

import json
import warnings
from fractions import Fraction

from . import __version__
from .certificates import Certificate, Method
from .core import BoundedReal, RunnerLabError, SpeedSet
from .reduction import ReductionStep, ReductionTrace

SCHEMA = "runnerlab/1"


class DocumentError(RunnerLabError, ValueError):
    pass


def rat(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator, "decimal": f"{float(x):.12g}"}


def read_rat(d) -> Fraction:
    if isinstance(d, int) and not isinstance(d, bool):
        return Fraction(d)
    if not isinstance(d, dict) or "num" not in d or "den" not in d:
        raise DocumentError(f"expected a rational, got {d!r}")
    num, den = d["num"], d["den"]
    if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
        raise DocumentError(f"malformed rational {d!r}")
    return Fraction(num, den)


def _encode(value):
    if isinstance(value, Fraction):
        return rat(value)
    if isinstance(value, BoundedReal):
        return interval(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    return value


def _decode(value):
    if isinstance(value, dict):
        if set(value) >= {"num", "den"}:
            return read_rat(value)
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return tuple(_decode(v) for v in value)
    return value


def interval(b: BoundedReal) -> dict:
    return {"lo": rat(b.lo), "hi": rat(b.hi), "decimal": b.decimal()}


def read_interval(d) -> BoundedReal:
    return BoundedReal(read_rat(d["lo"]), read_rat(d["hi"]))


def _speeds(raw) -> SpeedSet:
    if not isinstance(raw, list):
        raise DocumentError("speeds must be a list of integers")
    return SpeedSet(tuple(raw))


# -- traces -------------------------------------------------------------------


def trace_to_dict(trace: ReductionTrace) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "reduction_trace",
        "start": list(trace.start),
        "steps": [
            {
                "prime": s.prime,
                "dilation_unit": s.dilation_unit,
                "radius": s.radius,
                "ell": rat(s.ell),
                "error_charge": rat(s.error_charge),
                "before": list(s.before),
                "after": list(s.after),
            }
            for s in trace.steps
        ],
        "total_error": rat(trace.total_error),
        "final_model": list(trace.final_model),
        "stop_reason": trace.stop_reason,
    }


def trace_from_dict(d: dict) -> ReductionTrace:
    try:
        steps = tuple(
            ReductionStep(
                int(s["prime"]),
                int(s["dilation_unit"]),
                int(s["radius"]),
                _speeds(s["before"]),
                _speeds(s["after"]),
            )
            for s in d["steps"]
        )
        return ReductionTrace(_speeds(d["start"]), steps, _speeds(d["final_model"]), d.get("stop_reason", ""))
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"malformed reduction trace: {exc!r}") from exc


# -- certificates ---------------------------------------------------------------


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "certificate",
        "version": cert.version,
        "speeds": list(cert.speeds),
        "method": cert.method.value,
        "bound": rat(cert.bound),
        "bound_interval": interval(cert.bound_interval) if cert.bound_interval else None,
        "witness": _encode(cert.witness),
        "reduction": trace_to_dict(cert.reduction) if cert.reduction else None,
    }


def certificate_from_dict(d: dict) -> Certificate:
    if not isinstance(d, dict):
        raise DocumentError("certificate document must be a JSON object")
    if d.get("schema") != SCHEMA:
        raise DocumentError(f"unsupported schema {d.get('schema')!r}, expected {SCHEMA!r}")
    if d.get("kind") != "certificate":
        raise DocumentError(f"document kind is {d.get('kind')!r}, not 'certificate'")
    if d.get("version") != __version__:
        warnings.warn(
            f"certificate written by version {d.get('version')}, reading with {__version__}",
            stacklevel=2,
        )
    try:
        method = Method(d["method"])
        bound_interval = read_interval(d["bound_interval"]) if d.get("bound_interval") else None
        reduction = trace_from_dict(d["reduction"]) if d.get("reduction") else None
        return Certificate(
            _speeds(d["speeds"]),
            method,
            read_rat(d["bound"]),
            _decode(d.get("witness") or {}),
            bound_interval,
            reduction,
            str(d.get("version", "")),
        )
    except KeyError as exc:
        raise DocumentError(f"certificate is missing the field {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed certificate: {exc}") from exc


def dumps(doc: dict) -> str:
    """Canonical text form: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
