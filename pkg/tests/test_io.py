import json

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistbethe import io
from twistbethe.aba import bethe_vector, transfer_eigenvalue_check
from twistbethe.census import run_census
from twistbethe.ed import match_spectrum
from twistbethe.model import Family, ModelSpec, RootSet, classify, detect_singular
from twistbethe.solver import enumerate_solutions


def roundtrip(obj, digits=0):
    return io.loads(io.dumps(obj, digits))


# --- root syntax


@pytest.mark.parametrize("text,value", [
    ("i/2", 0.5j), ("-i/2", -0.5j), ("-3i/2", -1.5j), ("0.5i", 0.5j), (".5i", 0.5j), ("-i", -1j),
    ("+i", 1j), ("1.5-2i", 1.5 - 2j), ("2", 2), ("1e-3+4e-2i", 0.001 + 0.04j), ("0.3+0.1j", 0.3 + 0.1j),
])
def test_parse_root(text, value):
    assert io.parse_root(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "i/0", "2ii"])
def test_parse_root_rejects(text):
    with pytest.raises(ValueError):
        io.parse_root(text)


def test_exact_string_shorthand_is_exact_in_multiprecision():
    z = io.parse_root("i/2", 60)
    assert z.imag == mpmath.mpf(1) / 2 and z.real == 0
    r = io.parse_roots("i/2, -i/2", 60)
    assert [complex(v) for v in r] == [0.5j, -0.5j]


# --- encoding


def test_string_pair_encoding():
    doc = json.loads(io.dumps(RootSet((0.5j, -0.5j))))
    assert doc["data"]["roots"] == [["0", "0.5"], ["0", "-0.5"]]
    assert doc["schema_version"] == io.SCHEMA_VERSION


def test_keys_sorted():
    text = io.dumps(ModelSpec(sites=4, magnons=2))
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert text == json.dumps(doc, sort_keys=True, indent=2)


def test_series_encoding(series4):
    coeffs = io.to_document(series4, 40)["data"]["coefficients"]
    assert coeffs[0][0] == ["0.25", "0"]
    assert coeffs[0][1] == ["0", "0"]
    assert coeffs[0][3] == ["0", "0.00390625"]
    assert coeffs[1][3] == ["0", "-0.00390625"]
    assert mpmath.almosteq(mpmath.mpf(coeffs[0][2][0]), mpmath.mpf(-1) / 96, 1e-40)


def test_schema_version_checked():
    doc = io.to_document(RootSet((1.0,)))
    doc["schema_version"] = 99
    with pytest.raises(ValueError):
        io.from_document(doc)


# --- round trips


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e12), max_size=5))
def test_double_roots_roundtrip(zs):
    r = RootSet(tuple(zs))
    assert roundtrip(r).roots == r.roots


@settings(max_examples=20, deadline=None)
@given(st.integers(20, 80), st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_multiprecision_roundtrip_is_exact(digits, num, den):
    ctx = ModelSpec(digits=digits).ctx
    z = ctx.mpc(ctx.mpf(num) / den, ctx.mpf(1) / 3)
    back = roundtrip(RootSet((z,)), digits)[0]
    assert back == z


def test_spec_roundtrip():
    for spec in (ModelSpec(sites=6, magnons=3, beta=0.25, digits=30),
                 ModelSpec(family=Family.XXZ, spin=1, sites=5, magnons=3, eta=0.7)):
        assert roundtrip(spec) == spec


def test_series_roundtrip(series4):
    back = roundtrip(series4)
    assert back.spec == series4.spec and back.order == 4
    assert back.coefficients == series4.coefficients


def test_solution_set_and_classification_roundtrip():
    sols = enumerate_solutions(ModelSpec(sites=5, magnons=2))
    back = roundtrip(sols)
    assert [c.kind for _, c in back.solutions] == [c.kind for _, c in sols.solutions]
    for (a, _), (b, _) in zip(sols.solutions, back.solutions):
        assert a.roots == b.roots
    c = classify(ModelSpec(sites=4, magnons=2), [0.5j, -0.5j])
    assert roundtrip(c) == c


def test_decomposition_roundtrip():
    spec = ModelSpec(sites=6, magnons=3, digits=40)
    dec = detect_singular(spec, io.parse_roots("i/2,-i/2,0", 40))
    back = roundtrip(dec, 40)
    assert back.string_part == dec.string_part and back.remainder.roots == dec.remainder.roots


def test_census_roundtrip():
    rep = run_census(4)
    back = roundtrip(rep)
    assert [(r.M, r.found, r.expected) for r in back.rows] == [(r.M, r.found, r.expected) for r in rep.rows]
    assert back.weighted_total == 16


def test_reports_roundtrip():
    rep = match_spectrum(4, 1, 0.0, [])
    assert roundtrip(rep).unmatched_ed == rep.unmatched_ed
    chk = transfer_eigenvalue_check(4, [], 0.1, [0.3])
    assert roundtrip(chk).residuals == chk.residuals
    v = bethe_vector(4, [0.2, -0.7])
    assert np.array_equal(roundtrip(v).as_complex(), v.as_complex())


def test_emit_writes_file(tmp_path):
    path = tmp_path / "out.json"
    text = io.emit(RootSet((0.5j,)), "json", str(path))
    assert path.read_text().strip() == text
    assert io.emit(RootSet(()), "table", None, 0, "tbl") == "tbl"
