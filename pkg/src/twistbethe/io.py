"""JSON persistence for every result type.

Complex numbers are ``[re, im]`` pairs of decimal strings so that
multiprecision values survive a round trip.  Every document carries
``schema_version`` and a ``type`` tag; keys are sorted.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from . import _numeric as nm
from .aba import EigenCheckReport, StateVector
from .census import CensusReport, CensusRow
from .ed import SpectrumReport
from .model import ClassificationResult, Family, Kind, ModelSpec, RootSet, SingularDecomposition
from .solver import SolutionSet
from .twist import TwistSeries

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# scalars


def enc_c(z) -> list:
    return nm.fmt_complex(z)


def dec_c(pair, digits: int):
    return nm.parse_complex(pair, digits)


def enc_roots(roots) -> list:
    return [enc_c(z) for z in roots]


def dec_roots(data, digits: int, canonical: bool = False) -> RootSet:
    return RootSet(tuple(dec_c(p, digits) for p in data), canonical)


_EXACT_IMAG = re.compile(r"^([+-]?)(\d*)i/(\d+)$")
_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^(?P<re>[+-]?{_NUM})?(?:(?P<im>[+-]?(?:{_NUM})?)i)?$")
_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")


def parse_root(token: str, digits: int = 0):
    """Parse ``a+bi``, ``0.5i``, ``-i``, ``i/2``, ``-3i/2`` or a plain real.

    Fractions of ``i`` are built exactly, never through a decimal string.
    """
    ctx = nm.context(digits)
    tok = token.strip().replace(" ", "").replace("j", "i")
    if not tok:
        raise ValueError("empty root")
    m = _EXACT_IMAG.match(tok)
    if m:
        sign = -1 if m.group(1) == "-" else 1
        num = int(m.group(2) or 1)
        den = int(m.group(3))
        if den == 0:
            raise ValueError(f"zero denominator in {token!r}")
        return ctx.mpc(0, ctx.mpf(sign * num) / den)
    if "/" in tok and "i" not in tok:
        return ctx.mpc(ctx.mpf(Fraction(tok).numerator) / Fraction(tok).denominator)
    m = _IMAG.match(tok) or _COMPLEX.match(tok)
    if not m or (m.groupdict().get("re") is None and m.group("im") is None):
        raise ValueError(f"cannot parse root {token!r}")
    re_s = m.groupdict().get("re") or "0"
    im_s = m.group("im")
    if im_s is None:
        im_s = "0"
    elif im_s in ("", "+"):
        im_s = "1"
    elif im_s == "-":
        im_s = "-1"
    if digits <= 0:
        return complex(float(re_s), float(im_s))
    return ctx.mpc(ctx.mpf(re_s), ctx.mpf(im_s))


def parse_roots(text: str, digits: int = 0) -> RootSet:
    text = text.strip()
    if not text:
        return RootSet(())
    return RootSet(tuple(parse_root(t, digits) for t in text.split(",")))


# ---------------------------------------------------------------------------
# encoders


def enc_spec(spec: ModelSpec) -> dict:
    return {
        "family": spec.family.value,
        "spin": str(spec.spin),
        "sites": spec.sites,
        "magnons": spec.magnons,
        "eta": spec.eta,
        "beta": spec.beta,
        "digits": spec.digits,
        "genericity_order": spec.genericity_order,
        "genericity_tol": spec.genericity_tol,
    }


def dec_spec(d: dict) -> ModelSpec:
    return ModelSpec(
        family=Family(d["family"]),
        spin=Fraction(d["spin"]),
        sites=d["sites"],
        magnons=d["magnons"],
        eta=d.get("eta"),
        beta=d.get("beta", 0.0),
        digits=d.get("digits", 0),
        genericity_order=d.get("genericity_order", 24),
        genericity_tol=d.get("genericity_tol", 1e-6),
    )


def _enc_class(c: ClassificationResult) -> dict:
    return {
        "kind": c.kind.value,
        "constraint_value": None if c.constraint_value is None else enc_c(c.constraint_value),
        "residual_norm": float(c.residual_norm),
    }


def _dec_class(d: dict, digits: int) -> ClassificationResult:
    cv = d.get("constraint_value")
    return ClassificationResult(Kind(d["kind"]), None if cv is None else dec_c(cv, digits), d["residual_norm"])


def _enc_dec(dec: SingularDecomposition) -> dict:
    return {"string_part": enc_roots(dec.string_part), "remainder": enc_roots(dec.remainder)}


def _dec_dec(d: dict, digits: int) -> SingularDecomposition:
    return SingularDecomposition(tuple(dec_c(p, digits) for p in d["string_part"]), dec_roots(d["remainder"], digits))


def _enc_solset(s: SolutionSet) -> dict:
    return {
        "spec": enc_spec(s.spec),
        "solutions": [{"roots": enc_roots(r), "classification": _enc_class(c)} for r, c in s.solutions],
        "seeds_tried": s.seeds_tried,
        "failures": s.failures,
    }


def _dec_solset(d: dict) -> SolutionSet:
    spec = dec_spec(d["spec"])
    sols = [
        (dec_roots(e["roots"], spec.digits, True), _dec_class(e["classification"], spec.digits))
        for e in d["solutions"]
    ]
    return SolutionSet(spec, sols, d["seeds_tried"], d["failures"])


def _enc_census(r: CensusReport) -> dict:
    rows = []
    for row in r.rows:
        rows.append({
            "M": row.M,
            "n_regular": row.n_regular,
            "n_singular_physical": row.n_singular_physical,
            "n_singular_unphysical": row.n_singular_unphysical,
            "expected": row.expected,
            "seeds_tried": row.seeds_tried,
            "reruns": row.reruns,
            "complete": row.complete,
            "solutions": None if row.solutions is None else _enc_solset(row.solutions),
        })
    return {
        "N": r.N,
        "spin": str(r.spin),
        "rows": rows,
        "weighted_total": r.weighted_total,
        "complete": r.complete,
        "elapsed": r.elapsed,
    }


def _dec_census(d: dict) -> CensusReport:
    rows = []
    for e in d["rows"]:
        rows.append(CensusRow(
            e["M"], e["n_regular"], e["n_singular_physical"], e["n_singular_unphysical"],
            e["expected"], e["seeds_tried"], e.get("reruns", 0),
            None if e.get("solutions") is None else _dec_solset(e["solutions"]),
        ))
    return CensusReport(d["N"], rows, Fraction(d["spin"]), d.get("elapsed", 0.0))


def _enc_series(s: TwistSeries) -> dict:
    return {
        "spec": enc_spec(s.spec),
        "base": _enc_dec(s.base),
        "order": s.order,
        "coefficients": [[enc_c(c) for c in row] for row in s.coefficients],
    }


def _dec_series(d: dict) -> TwistSeries:
    spec = dec_spec(d["spec"])
    coeffs = tuple(tuple(dec_c(c, spec.digits) for c in row) for row in d["coefficients"])
    return TwistSeries(spec, _dec_dec(d["base"], spec.digits), coeffs, d["order"])


def _enc_spectrum(r: SpectrumReport) -> dict:
    return {
        "sector": r.sector,
        "ed_eigenvalues": [float(x) for x in r.ed_eigenvalues],
        "bethe_matches": [
            {"roots": enc_roots(a), "energy": float(e), "ed_index": int(k), "delta": float(de)}
            for a, e, k, de in r.bethe_matches
        ],
        "unmatched_ed": list(r.unmatched_ed),
        "unmatched_bethe": [{"roots": enc_roots(a), "energy": float(e)} for a, e in r.unmatched_bethe],
        "ambiguous": [{"roots": enc_roots(a), "energy": float(e), "candidates": list(c)} for a, e, c in r.ambiguous],
    }


def _dec_spectrum(d: dict) -> SpectrumReport:
    return SpectrumReport(
        d["sector"],
        list(d["ed_eigenvalues"]),
        [(dec_roots(m["roots"], 0), m["energy"], m["ed_index"], m["delta"]) for m in d["bethe_matches"]],
        list(d["unmatched_ed"]),
        [(dec_roots(m["roots"], 0), m["energy"]) for m in d["unmatched_bethe"]],
        [(dec_roots(m["roots"], 0), m["energy"], list(m["candidates"])) for m in d["ambiguous"]],
    )


def _enc_state(v: StateVector) -> dict:
    return {"magnon_number": v.magnon_number, "amplitudes": [enc_c(a) for a in v.amplitudes]}


def _dec_state(d: dict, digits: int = 0) -> StateVector:
    amps = [dec_c(a, digits) for a in d["amplitudes"]]
    arr = np.array(amps, dtype=complex if digits <= 0 else object)
    return StateVector(arr, d["magnon_number"])


def _enc_eig(r: EigenCheckReport) -> dict:
    return {
        "points": [enc_c(p) for p in r.points],
        "eigenvalues": [enc_c(v) for v in r.eigenvalues],
        "residuals": [float(x) for x in r.residuals],
    }


def _dec_eig(d: dict) -> EigenCheckReport:
    return EigenCheckReport(
        [dec_c(p, 0) for p in d["points"]], [dec_c(v, 0) for v in d["eigenvalues"]], list(d["residuals"])
    )


_ENCODERS = [
    (ModelSpec, "ModelSpec", enc_spec),
    (RootSet, "RootSet", lambda r: {"roots": enc_roots(r), "canonical_order": r.canonical_order}),
    (ClassificationResult, "ClassificationResult", _enc_class),
    (SingularDecomposition, "SingularDecomposition", _enc_dec),
    (SolutionSet, "SolutionSet", _enc_solset),
    (CensusReport, "CensusReport", _enc_census),
    (TwistSeries, "TwistSeries", _enc_series),
    (SpectrumReport, "SpectrumReport", _enc_spectrum),
    (StateVector, "StateVector", _enc_state),
    (EigenCheckReport, "EigenCheckReport", _enc_eig),
]


def to_document(obj, digits: int = 0) -> dict:
    """Wrap ``obj`` as a versioned, tagged JSON-ready dict.

    ``digits`` records the precision needed to decode bare numbers (root sets,
    decompositions, classifications, states); composite types carry their spec.
    """
    for cls, tag, enc in _ENCODERS:
        if isinstance(obj, cls):
            return {"schema_version": SCHEMA_VERSION, "type": tag, "digits": digits, "data": enc(obj)}
    if isinstance(obj, dict):
        return {"schema_version": SCHEMA_VERSION, "type": "Report", "digits": digits, "data": obj}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_document(doc: dict):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
    tag, data, digits = doc["type"], doc["data"], doc.get("digits", 0)
    if tag == "ModelSpec":
        return dec_spec(data)
    if tag == "RootSet":
        return dec_roots(data["roots"], digits, data.get("canonical_order", False))
    if tag == "ClassificationResult":
        return _dec_class(data, digits)
    if tag == "SingularDecomposition":
        return _dec_dec(data, digits)
    if tag == "SolutionSet":
        return _dec_solset(data)
    if tag == "CensusReport":
        return _dec_census(data)
    if tag == "TwistSeries":
        return _dec_series(data)
    if tag == "SpectrumReport":
        return _dec_spectrum(data)
    if tag == "StateVector":
        return _dec_state(data, digits)
    if tag == "EigenCheckReport":
        return _dec_eig(data)
    if tag == "Report":
        return data
    raise ValueError(f"unknown document type {tag!r}")


def dumps(obj, digits: int = 0) -> str:
    return json.dumps(to_document(obj, digits), sort_keys=True, indent=2)


def loads(text: str):
    return from_document(json.loads(text))


def emit(obj, fmt: str = "json", path: str | None = None, digits: int = 0, table: str | None = None) -> str:
    """Serialize ``obj`` as JSON or use the given ``table`` text; write to ``path`` if set."""
    text = dumps(obj, digits) if fmt == "json" else (table if table is not None else dumps(obj, digits))
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
