"""JSON documents for RNN specs, rational-system specs and reports.

Every document carries a ``schema`` tag.  Rationals are written as strings
(``"3"``, ``"-1/2"``) and polynomials in the canonical ``c * X1^e1 * ...``
text, so a written document re-parses to an identical system.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import activation as act
from .algebra import RationalFunc, format_scalar, parse_poly
from .errors import ArgumentError, ParseError, RnnRealError
from .systems import PwcInput, RationalSystemSpec, RnnSystem

RNN_SCHEMA = "rnnreal.rnn/1"
RATIONAL_SCHEMA = "rnnreal.rational/1"
REPORT_SCHEMA = "rnnreal.report/1"


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def _fail(text, key, message):
    line = _line_of(text, key) if text else None
    where = f"line {line}: " if line else ""
    raise ParseError(f"{where}field {key!r}: {message}")


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _scalar_list(values):
    return [format_scalar(v) for v in values]


def _frac_text(f: RationalFunc, names=None) -> dict:
    return {"numerator": f.numerator.to_text(names), "denominator": f.denominator.to_text(names)}


def _parse_frac(obj, num_vars, names, text, key) -> RationalFunc:
    try:
        if isinstance(obj, str):
            return RationalFunc.from_poly(parse_poly(obj, num_vars, names))
        if not isinstance(obj, dict) or "numerator" not in obj:
            raise ParseError("expected a polynomial string or {numerator, denominator}")
        num = parse_poly(obj["numerator"], num_vars, names)
        den = parse_poly(obj.get("denominator", "1"), num_vars, names)
        return RationalFunc(num, den)
    except RnnRealError as exc:
        _fail(text, key, str(exc))


# -- activation ---------------------------------------------------------------

def activation_to_dict(spec: act.ActivationSpec):
    if act.BUILTINS.get(spec.name) == spec:
        return spec.name
    return {
        "name": spec.name,
        "order": spec.order,
        "rhs": _frac_text(spec.rhs),
        "init": _scalar_list(spec.init),
        "invertible": spec.invertible,
        "closed_form": spec.closed_form,
    }


def activation_from_obj(obj, text="") -> act.ActivationSpec:
    if isinstance(obj, str):
        try:
            return act.builtin(obj)
        except RnnRealError as exc:
            _fail(text, "activation", str(exc))
    if not isinstance(obj, dict):
        _fail(text, "activation", "expected a built-in name or an inline activation object")
    try:
        order = int(obj["order"])
        rhs = _parse_frac(obj["rhs"], order, None, text, "rhs")
        return act.ActivationSpec(
            name=str(obj.get("name", "custom")),
            order=order,
            rhs=rhs,
            init=tuple(obj["init"]),
            invertible=bool(obj.get("invertible", False)),
            closed_form=obj.get("closed_form"),
        )
    except KeyError as exc:
        _fail(text, "activation", f"missing key {exc.args[0]!r}")
    except (RnnRealError, TypeError, ValueError) as exc:
        _fail(text, "activation", str(exc))


# -- RNN ------------------------------------------------------------------------

def input_to_dict(u: PwcInput) -> dict:
    return {"durations": [repr(d) for d in u.durations], "letters": list(u.letters)}


def input_from_obj(obj, text="") -> PwcInput:
    try:
        return PwcInput(tuple(float(d) for d in obj["durations"]), tuple(obj["letters"]))
    except (KeyError, TypeError, ValueError, RnnRealError) as exc:
        _fail(text, "input", f"invalid input signal ({exc})")


def rnn_to_dict(sys: RnnSystem, u: PwcInput | None = None) -> dict:
    out = {
        "schema": RNN_SCHEMA,
        "A": [_scalar_list(r) for r in sys.A],
        "B": [_scalar_list(r) for r in sys.B],
        "C": [_scalar_list(r) for r in sys.C],
        "x0": _scalar_list(sys.x0),
        "alphabet": [_scalar_list(a) for a in sys.alphabet],
        "activation": activation_to_dict(sys.activation),
    }
    if u is not None:
        out["input"] = input_to_dict(u)
    return out


def rnn_from_obj(obj: dict, text: str = "") -> tuple[RnnSystem, PwcInput | None]:
    for key in ("A", "B", "C", "alphabet", "activation"):
        if key not in obj:
            _fail(text, key, "missing")
    activation = activation_from_obj(obj["activation"], text)
    if not obj["alphabet"]:
        _fail(text, "alphabet", "the input alphabet must be a non-empty finite set")
    n = len(obj["A"])
    fields = {"A": obj["A"], "B": obj["B"], "C": obj["C"], "x0": obj.get("x0", ["0"] * n),
              "alphabet": obj["alphabet"]}
    for key in ("A", "B", "C", "alphabet"):
        rows = fields[key]
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            _fail(text, key, "expected a list of rows")
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            _fail(text, key, f"rows have different lengths {sorted(widths)}")
    try:
        sys = RnnSystem(activation=activation, **fields)
    except RnnRealError as exc:
        key = str(exc).split()[0].rstrip(":")
        _fail(text, key if key in fields else "A", str(exc))
    u = input_from_obj(obj["input"], text) if obj.get("input") is not None else None
    if u is not None and max(u.letters) >= sys.K:
        _fail(text, "input", f"letter index {max(u.letters)} outside the alphabet of size {sys.K}")
    return sys, u


# -- rational systems ---------------------------------------------------------

def rational_to_dict(sys: RationalSystemSpec) -> dict:
    return {
        "schema": RATIONAL_SCHEMA,
        "dim": sys.dim,
        "variables": list(sys.var_names),
        "letters": [_scalar_list(a) for a in sys.letters],
        "fields": [[_frac_text(f) for f in fld] for fld in sys.fields],
        "outputs": [_frac_text(h) for h in sys.outputs],
        "v0": _scalar_list(sys.v0),
    }


def rational_from_obj(obj: dict, text: str = "") -> RationalSystemSpec:
    for key in ("dim", "fields", "outputs", "v0"):
        if key not in obj:
            _fail(text, key, "missing")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        _fail(text, "dim", "must be a positive integer")
    names = obj.get("variables") or None
    if names is not None and len(names) != dim:
        _fail(text, "variables", f"expected {dim} names")
    fields = []
    for fld in obj["fields"]:
        if not isinstance(fld, list) or len(fld) != dim:
            _fail(text, "fields", f"every vector field needs {dim} components")
        fields.append([_parse_frac(f, dim, names, text, "fields") for f in fld])
    outputs = [_parse_frac(h, dim, names, text, "outputs") for h in obj["outputs"]]
    try:
        return RationalSystemSpec(fields, outputs, tuple(obj["v0"]), tuple(names or ()),
                                  tuple(tuple(a) for a in obj.get("letters", ())))
    except (RnnRealError, TypeError) as exc:
        _fail(text, "v0" if "v0" in str(exc) else "fields", str(exc))


# -- files ----------------------------------------------------------------------

def load_document(path):
    """Read a spec file; returns ``(kind, system, input_or_None, raw_bytes)``."""
    raw = Path(path).read_bytes()
    text = raw.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError("line 1: the document must be a JSON object")
    schema = obj.get("schema", RNN_SCHEMA)
    if schema == RNN_SCHEMA:
        sys, u = rnn_from_obj(obj, text)
        return "rnn", sys, u, raw
    if schema == RATIONAL_SCHEMA:
        sys = rational_from_obj(obj, text)
        u = input_from_obj(obj["input"], text) if obj.get("input") is not None else None
        return "rational", sys, u, raw
    _fail(text, "schema", f"unknown schema {schema!r}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load_rnn(path) -> tuple[RnnSystem, PwcInput | None]:
    kind, sys, u, _ = load_document(path)
    if kind != "rnn":
        raise ArgumentError(f"{path} is not an RNN spec")
    return sys, u


def load_rational(path) -> RationalSystemSpec:
    kind, sys, _, _ = load_document(path)
    if kind != "rational":
        raise ArgumentError(f"{path} is not a rational-system spec")
    return sys
