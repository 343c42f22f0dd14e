"""JSON schemas and CSV writers shared by the CLI and external callers.

Complex numbers are stored as two-element arrays [re, im].  All schema
errors raise :class:`SchemaError` carrying a JSON-path-style location so the
CLI can report exactly where a file went wrong.  CSV output uses 17
significant digits so downstream regressions are byte-stable.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .algebra import MatPoly, Poly
from .phasespace import BracketPencil, PhasePoint
from .neumann import NeumannState
from .sov import DivisorCoordinates
from .spectral import SpectralCurve


class SchemaError(ValueError):
    """Malformed input document; ``location`` names the offending field."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


def _expect(cond: bool, message: str, location: str) -> None:
    if not cond:
        raise SchemaError(message, location)


def _as_complex(value: Any, location: str) -> complex:
    _expect(isinstance(value, (list, tuple)) and len(value) == 2,
            "expected [re, im]", location)
    re, im = value
    _expect(isinstance(re, (int, float)) and isinstance(im, (int, float)),
            "expected numeric [re, im]", location)
    return complex(re, im)


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# phase points
# ---------------------------------------------------------------------------

def phase_point_to_dict(at: PhasePoint) -> dict:
    coeffs = at.to_vector().reshape(at.n + 1, at.r, at.r)
    return {
        "r": at.r,
        "n": at.n,
        "coeffs": [[[_pair(coeffs[k, i, j]) for j in range(at.r)]
                    for i in range(at.r)] for k in range(at.n + 1)],
    }


def phase_point_from_dict(doc: Any, location: str = "$") -> PhasePoint:
    _expect(isinstance(doc, dict), "expected an object", location)
    for key in ("r", "n", "coeffs"):
        _expect(key in doc, f"missing key '{key}'", location)
    r, n = doc["r"], doc["n"]
    _expect(isinstance(r, int) and r >= 1, "r must be a positive integer", f"{location}.r")
    _expect(isinstance(n, int) and n >= 0, "n must be a non-negative integer", f"{location}.n")
    rows = doc["coeffs"]
    _expect(isinstance(rows, list) and len(rows) == n + 1,
            f"coeffs must list n + 1 = {n + 1} matrices", f"{location}.coeffs")
    out = np.zeros((n + 1, r, r), dtype=np.complex128)
    for k, mat in enumerate(rows):
        loc_k = f"{location}.coeffs[{k}]"
        _expect(isinstance(mat, list) and len(mat) == r, f"expected {r} rows", loc_k)
        for i, row in enumerate(mat):
            _expect(isinstance(row, list) and len(row) == r,
                    f"expected {r} entries", f"{loc_k}[{i}]")
            for j, entry in enumerate(row):
                out[k, i, j] = _as_complex(entry, f"{loc_k}[{i}][{j}]")
    return PhasePoint(MatPoly(out, r=r), n)


# ---------------------------------------------------------------------------
# pencils
# ---------------------------------------------------------------------------

def pencil_to_dict(pencil: BracketPencil) -> dict:
    return {
        "a": [_pair(c) for c in pencil.a.coeffs] or [[0.0, 0.0]],
        "b": _pair(pencil.b),
    }


def pencil_from_dict(doc: Any, location: str = "$") -> BracketPencil:
    _expect(isinstance(doc, dict), "expected an object", location)
    for key in ("a", "b"):
        _expect(key in doc, f"missing key '{key}'", location)
    _expect(isinstance(doc["a"], list), "a must be a coefficient list", f"{location}.a")
    coeffs = [_as_complex(c, f"{location}.a[{k}]") for k, c in enumerate(doc["a"])]
    return BracketPencil(Poly(coeffs), _as_complex(doc["b"], f"{location}.b"))


# ---------------------------------------------------------------------------
# spectral curves and divisors
# ---------------------------------------------------------------------------

def curve_to_dict(curve: SpectralCurve) -> dict:
    entries = []
    for j, p in enumerate(curve.z_coeffs):
        for k, c in enumerate(p.coeffs):
            if c != 0:
                entries.append({"j": j, "k": k, "re": float(c.real), "im": float(c.imag)})
    return {"r": curve.r, "n": curve.n, "coeff": entries, "genus": curve.genus}


def curve_from_dict(doc: Any, location: str = "$") -> SpectralCurve:
    from .spectral import genus as genus_formula

    _expect(isinstance(doc, dict), "expected an object", location)
    for key in ("r", "n", "coeff"):
        _expect(key in doc, f"missing key '{key}'", location)
    r, n = doc["r"], doc["n"]
    _expect(isinstance(r, int) and r >= 1, "r must be a positive integer", f"{location}.r")
    _expect(isinstance(n, int) and n >= 0, "n must be non-negative", f"{location}.n")
    tables: list[dict[int, complex]] = [dict() for _ in range(r + 1)]
    for idx, entry in enumerate(doc["coeff"]):
        loc = f"{location}.coeff[{idx}]"
        _expect(isinstance(entry, dict), "expected an object", loc)
        for key in ("j", "k", "re", "im"):
            _expect(key in entry, f"missing key '{key}'", loc)
        j, k = entry["j"], entry["k"]
        _expect(isinstance(j, int) and 0 <= j <= r, "j out of range", f"{loc}.j")
        _expect(isinstance(k, int) and k >= 0, "k out of range", f"{loc}.k")
        tables[j][k] = complex(entry["re"], entry["im"])
    z_coeffs = []
    for j, table in enumerate(tables):
        size = max(table) + 1 if table else 0
        arr = np.zeros(size, dtype=np.complex128)
        for k, c in table.items():
            arr[k] = c
        z_coeffs.append(Poly(arr))
    stated = doc.get("genus", genus_formula(r, n))
    return SpectralCurve(r, n, tuple(z_coeffs), stated)


def divisor_to_dict(div: DivisorCoordinates) -> dict:
    return {"points": [{"lambda": _pair(l), "z": _pair(z)} for l, z in div.points]}


def divisor_from_dict(doc: Any, location: str = "$") -> DivisorCoordinates:
    _expect(isinstance(doc, dict) and "points" in doc, "expected {'points': [...]}", location)
    lams, zs = [], []
    for idx, pt in enumerate(doc["points"]):
        loc = f"{location}.points[{idx}]"
        _expect(isinstance(pt, dict) and "lambda" in pt and "z" in pt,
                "expected {'lambda': [re,im], 'z': [re,im]}", loc)
        lams.append(_as_complex(pt["lambda"], f"{loc}.lambda"))
        zs.append(_as_complex(pt["z"], f"{loc}.z"))
    return DivisorCoordinates(np.array(lams), np.array(zs), len(lams), ())


# ---------------------------------------------------------------------------
# Neumann states
# ---------------------------------------------------------------------------

def neumann_to_dict(s: NeumannState) -> dict:
    return {"x": list(map(float, s.x)), "y": list(map(float, s.y)),
            "alpha": list(map(float, s.alpha))}


def neumann_from_dict(doc: Any, location: str = "$") -> NeumannState:
    _expect(isinstance(doc, dict), "expected an object", location)
    for key in ("x", "y", "alpha"):
        _expect(key in doc, f"missing key '{key}'", location)
        _expect(isinstance(doc[key], list), f"{key} must be a list", f"{location}.{key}")
        for idx, v in enumerate(doc[key]):
            _expect(isinstance(v, (int, float)), "expected a real number",
                    f"{location}.{key}[{idx}]")
    try:
        return NeumannState(np.array(doc["x"], dtype=float),
                            np.array(doc["y"], dtype=float),
                            np.array(doc["alpha"], dtype=float))
    except ValueError as exc:
        raise SchemaError(str(exc), location) from exc


# ---------------------------------------------------------------------------
# files and CSV
# ---------------------------------------------------------------------------

def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read file: {exc}", path) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}",
                          path) from exc


def dump_json(doc: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_rows(times: np.ndarray, states: list[PhasePoint]) -> tuple[list[str], list[list[str]]]:
    """Header and rows for a phi-trajectory CSV, lexicographic in (k, i, j)."""
    r, n = states[0].r, states[0].n
    header = ["t"]
    for k in range(n + 1):
        for i in range(r):
            for j in range(r):
                header += [f"re(phi[{k}][{i}][{j}])", f"im(phi[{k}][{i}][{j}])"]
    rows = []
    for t, state in zip(times, states):
        vec = state.to_vector()
        row = [_fmt(t)]
        for v in vec:
            row += [_fmt(v.real), _fmt(v.imag)]
        rows.append(row)
    return header, rows


def divisor_trajectory_rows(times: np.ndarray, divs: list[DivisorCoordinates]
                            ) -> tuple[list[str], list[list[str]]]:
    g = len(divs[0])
    header = ["t"]
    for mu in range(g):
        header += [f"re(lambda_{mu})", f"im(lambda_{mu})", f"re(z_{mu})", f"im(z_{mu})"]
    rows = []
    for t, div in zip(times, divs):
        row = [_fmt(t)]
        for mu in range(g):
            row += [_fmt(div.lams[mu].real), _fmt(div.lams[mu].imag),
                    _fmt(div.zs[mu].real), _fmt(div.zs[mu].imag)]
        rows.append(row)
    return header, rows


def neumann_trajectory_rows(times: np.ndarray, states: list[NeumannState]
                            ) -> tuple[list[str], list[list[str]]]:
    from .neumann import build_phi

    phis = [build_phi(s) for s in states]
    header, rows = trajectory_rows(times, phis)
    n = states[0].n
    header += [f"x_{i}" for i in range(n)] + [f"y_{i}" for i in range(n)]
    for row, s in zip(rows, states):
        row += [_fmt(v) for v in s.x] + [_fmt(v) for v in s.y]
    return header, rows


def write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
