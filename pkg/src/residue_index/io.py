"""JSON/CSV formats, the u-spec mini-language and atomic file output."""

from __future__ import annotations

import ast
import csv
import io
import json
import os
import re
import tempfile

import numpy as np

from .circle import TrigPolynomial
from .cone import BDensity, ConeHeatSpec, Remainder
from .numerics import LaurentSeries
from .zeta import HeatExpansion


class InputError(ValueError):
    """Malformed user input (maps to exit code 2)."""


# --------------------------------------------------------------------------
# scalars
# --------------------------------------------------------------------------


def complex_to_json(c) -> list[float]:
    c = complex(c)
    return [c.real + 0.0, c.imag + 0.0]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise InputError(f"expected a number or [re, im], got {v!r}")


def _require(obj: dict, key: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"missing field {key!r}")
    v = obj[key]
    if kind is not None and not isinstance(v, kind):
        raise InputError(f"field {key!r} has the wrong type")
    return v


def _int(v, name: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{name} must be an integer")
    return v


# --------------------------------------------------------------------------
# structured objects
# --------------------------------------------------------------------------


def heat_expansion_to_json(h: HeatExpansion) -> dict:
    return {"terms": [{"alpha": a, "logpow": j, "coeff": complex_to_json(c)} for a, j, c in h.terms]}


def heat_expansion_from_json(obj) -> HeatExpansion:
    terms = []
    for t in _require(obj, "terms", list):
        alpha = _require(t, "alpha")
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
            raise InputError("alpha must be a real number")
        j = _int(_require(t, "logpow"), "logpow")
        if not 0 <= j <= 2:
            raise InputError("logpow must lie in 0..2")
        terms.append((float(alpha), j, complex_from_json(_require(t, "coeff"))))
    return HeatExpansion(tuple(terms))


def laurent_to_json(L: LaurentSeries) -> dict:
    return {"center": complex_to_json(L.center),
            "coeffs": {str(k): complex_to_json(c) for k, c in L.as_dict().items()}}


def laurent_from_json(obj) -> LaurentSeries:
    center = complex_from_json(_require(obj, "center"))
    raw = _require(obj, "coeffs", dict)
    try:
        coeffs = {int(k): complex_from_json(v) for k, v in raw.items()}
    except ValueError as exc:
        raise InputError(f"bad Laurent index: {exc}") from None
    if not coeffs:
        return LaurentSeries.zero(center, (0, 0))
    return LaurentSeries.from_dict(center, coeffs, (min(coeffs), max(coeffs)))


def trig_to_json(u: TrigPolynomial) -> dict:
    return {str(n): complex_to_json(c) for n, c in u.as_dict().items()}


def trig_from_json(obj) -> TrigPolynomial:
    if not isinstance(obj, dict):
        raise InputError("trig polynomial must be an object keyed by mode")
    try:
        return TrigPolynomial.from_dict({int(n): complex_from_json(v) for n, v in obj.items()})
    except ValueError as exc:
        raise InputError(f"bad trig mode: {exc}") from None


def bdensity_to_json(u: BDensity) -> dict:
    out = {"p": u.p, "coeffs": [{"k": k, "trig": trig_to_json(w)} for k, w in enumerate(u.coeffs)]}
    rem = u.remainder
    if rem is None:
        out["remainder"] = "none"
    else:
        out["remainder"] = {"order": rem.order, "r": rem.r_nodes.tolist(), "weights": rem.r_weights.tolist(),
                            "values": [[complex_to_json(v) for v in row] for row in rem.values]}
    return out


def bdensity_from_json(obj) -> BDensity:
    p = _int(_require(obj, "p"), "p")
    entries = _require(obj, "coeffs", list)
    table = {}
    for e in entries:
        k = _int(_require(e, "k"), "k")
        if k < 0 or k in table:
            raise InputError(f"coefficient index {k} is negative or repeated")
        table[k] = trig_from_json(_require(e, "trig"))
    K = max(table, default=-1)
    coeffs = tuple(table.get(k, TrigPolynomial.constant(0)) for k in range(K + 1))
    rem_spec = obj.get("remainder", "none")
    remainder = None
    if rem_spec != "none":
        if not isinstance(rem_spec, dict):
            raise InputError("remainder must be \"none\" or a grid object")
        values = np.array([[complex_from_json(v) for v in row] for row in _require(rem_spec, "values", list)])
        remainder = Remainder(_int(_require(rem_spec, "order"), "order"),
                              np.asarray(_require(rem_spec, "r", list), dtype=float),
                              np.asarray(_require(rem_spec, "weights", list), dtype=float), values)
        if values.shape[0] != len(remainder.r_nodes):
            raise InputError("remainder grid and values disagree")
    try:
        return BDensity(p, coeffs, remainder)
    except ValueError as exc:
        raise InputError(str(exc)) from None


_SPEC_MAPS = ("tr_sigma", "tr_partial", "tr_partial_sigma", "a", "b", "c")
_SPEC_CONSTANTS = ("C", "C1", "C2")


def cone_spec_from_json(obj) -> ConeHeatSpec:
    if not isinstance(obj, dict):
        raise InputError("cone spec must be an object")
    kwargs = {}
    for name in ("m", "p", "n"):
        kwargs[name] = _int(_require(obj, name), name)
    for name in _SPEC_MAPS + _SPEC_CONSTANTS:
        raw = obj.get(name, {})
        if not isinstance(raw, dict):
            raise InputError(f"{name} must be an object keyed by power")
        try:
            conv = complex_from_json if name in _SPEC_MAPS else float
            kwargs[name] = {int(k): conv(v) for k, v in raw.items()}
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad entry in {name}: {exc}") from None
    try:
        return ConeHeatSpec(**kwargs)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cone_spec_to_json(spec: ConeHeatSpec) -> dict:
    out = {"m": spec.m, "p": spec.p, "n": spec.n}
    for name in _SPEC_MAPS:
        out[name] = {str(k): complex_to_json(v) for k, v in sorted(getattr(spec, name).items())}
    for name in _SPEC_CONSTANTS:
        out[name] = {str(k): v for k, v in sorted(getattr(spec, name).items())}
    return out


# --------------------------------------------------------------------------
# files
# --------------------------------------------------------------------------


def parse_json_text(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from None


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_json_text(text, path)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_shortest(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _shortest(v: float) -> str:
    # shortest round-trip decimal; integral values drop the trailing ".0"
    v = float(v)
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_samples_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Two columns t,value (header optional); value may be complex in Python syntax."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    t, v = [], []
    for i, r in enumerate(rows, 1):
        if len(r) < 2:
            raise InputError(f"{path}: row {i} needs two columns")
        try:
            t.append(float(r[0]))
            v.append(complex(r[1].strip().replace(" ", "")))
        except ValueError:
            raise InputError(f"{path}: row {i} is not numeric") from None
    return np.array(t), np.array(v)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# --------------------------------------------------------------------------
# u-spec mini-language
# --------------------------------------------------------------------------

_ALLOWED_FUNCS = {"exp": np.exp, "cos": np.cos, "sin": np.sin}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant, ast.Load,
                  ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def _insert_products(text: str) -> str:
    text = text.replace("^", "**")
    text = re.sub(r"(?<![a-zA-Z_])it(?![a-zA-Z_])", "i t", text)
    # 2i -> 2*i, 2 t -> 2*t, ) ( -> )*(, i t -> i*t, 3exp( -> 3*exp(
    text = re.sub(r"(\d|\.)\s*(?=[a-zA-Z(])", r"\1*", text)
    text = re.sub(r"\)\s*(?=[\w(])", ")*", text)
    text = re.sub(r"\b([it])\s+(?=[\w(])", r"\1*", text)
    text = re.sub(r"\b([it])(?=\()", r"\1*", text)
    return text


def parse_u_spec(text: str, grid: int = 256) -> TrigPolynomial:
    """Trig polynomial from an expression such as "(2 + exp(i t)) exp(-2 i t)" or "3 + cos(2t)".

    The expression is evaluated on a grid and must be a trig polynomial
    with integer frequencies, which is verified on a shifted grid.
    """
    if not isinstance(text, str) or not text.strip():
        raise InputError("empty u-spec")
    src = _insert_products(text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse u-spec {text!r} at column {exc.offset}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise InputError(f"unsupported construct in u-spec: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in ("i", "t", "pi", *_ALLOWED_FUNCS):
            raise InputError(f"unknown name {node.id!r} in u-spec")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_FUNCS):
            raise InputError("only exp, cos and sin may be called")
    code = compile(tree, "<u-spec>", "eval")

    def evaluate(t):
        env = {"i": 1j, "t": t, "pi": np.pi, **_ALLOWED_FUNCS}
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(eval(code, {"__builtins__": {}}, env), dtype=complex), t.shape)

    t = 2 * np.pi * np.arange(grid) / grid
    try:
        coeffs = TrigPolynomial.from_samples(evaluate(t), tol=0.0).coeffs.copy()
        scale = max(np.abs(coeffs).max(), 1e-300)
        re_, im_ = coeffs.real, coeffs.imag
        re_[np.abs(re_) < 1e-13 * scale] = 0.0
        im_[np.abs(im_) < 1e-13 * scale] = 0.0
        u = TrigPolynomial(re_ + 1j * im_).trimmed()
        shifted = t + 0.3712
        ok = np.allclose(u(shifted), evaluate(shifted), rtol=1e-10, atol=1e-10)
    except (TypeError, ZeroDivisionError, ValueError):
        raise InputError(f"cannot evaluate u-spec {text!r}") from None
    if not ok or u.degree > grid // 4:
        raise InputError(f"u-spec {text!r} is not a trig polynomial with integer frequencies")
    return u
