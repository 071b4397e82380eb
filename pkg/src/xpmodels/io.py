"""Plain-text formats: model records (JSON) and numeric tables (CSV).

CSV floats are written with ``repr`` (shortest string that round-trips), so
writing and re-reading a table is lossless and byte-stable.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import IngestionError, UsageError
from .models import make_model, tabulated_model
from .semiclassics import CountingCurve, InversionResult


def fmt(value):
    """Lossless text for a cell (ints stay ints, non-finite as inf/-inf/nan, strings as is)."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(rows, header, meta=None, delimiter=","):
    """Table as text: ``# key=value`` lines, a header line, then rows."""
    buf = _io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={fmt(v)}\n")
    if delimiter == ",":
        buf.write(",".join(header) + "\n")
        for r in rows:
            buf.write(",".join(fmt(x) for x in r) + "\n")
    else:
        buf.write("# " + " ".join(header) + "\n")
        for r in rows:
            buf.write(" ".join(fmt(x) for x in r) + "\n")
    return buf.getvalue()


def read_csv(text, n_cols=None):
    """Parse text written by :func:`write_csv`; returns (meta, header, float array)."""
    meta, header, rows = {}, None, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if header is None:
            cells = next(csv.reader([line]))
            try:
                [float(c) for c in cells]
            except ValueError:
                header = [c.strip() for c in cells]
                continue
            header = []
        cells = next(csv.reader([line]))
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise IngestionError(f"non-numeric cell in {line!r}", lineno) from None
        if n_cols is not None and len(vals) != n_cols:
            raise IngestionError(f"expected {n_cols} columns, got {len(vals)}", lineno)
        if rows and len(vals) != len(rows[0]):
            raise IngestionError("ragged row", lineno)
        rows.append(vals)
    arr = np.array(rows, dtype=float) if rows else np.empty((0, n_cols or 0))
    return meta, header or [], arr


# -- models ---------------------------------------------------------------------

def model_to_dict(m):
    if m.kind in ("tabulated", "mapped"):
        raise UsageError(f"{m.kind} models serialise as tables, not parameter records")
    upper = m.upper if math.isfinite(m.upper) else None
    return {"kind": m.kind, "params": dict(m.params), "domain": [m.lower, upper], "hbar": m.hbar}


def model_schema():
    return json.loads(resources.files("xpmodels").joinpath("schemas/model.schema.json").read_text())


def model_from_dict(d):
    """Validate a record against ``schemas/model.schema.json`` and build the model."""
    try:
        jsonschema.validate(d, model_schema())
    except jsonschema.ValidationError as exc:
        raise IngestionError(f"invalid model record: {exc.message}") from None
    m = make_model(d["kind"], d["params"], d.get("hbar", 1.0))
    dom = d.get("domain")
    if dom is not None and not math.isclose(dom[0], m.lower, rel_tol=1e-12, abs_tol=1e-300):
        raise IngestionError(f"domain lower {dom[0]} does not match the model ({m.lower})")
    return m


def save_model(m, path):
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2, sort_keys=True) + "\n")


def load_model(path):
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read model record {path}: {exc}") from exc
    return model_from_dict(d)


def tabulated_to_csv(m):
    x, w = m.data
    return write_csv(zip(x, w), ["x", "w"], {"source": "tabulated", "hbar": fmt(m.hbar)})


def tabulated_from_csv(text, hbar=None):
    meta, _, arr = read_csv(text, 2)
    if arr.shape[0] < 2:
        raise IngestionError("a tabulated model needs at least two rows")
    h = float(meta.get("hbar", 1.0)) if hbar is None else hbar
    return tabulated_model(arr[:, 0], arr[:, 1], h)


# -- semiclassical curves ----------------------------------------------------------

def curve_to_csv(curve):
    return write_csv(zip(curve.E, curve.n), ["E", "n"],
                     {"source": curve.source, "hbar": fmt(curve.hbar)})


def curve_from_csv(text):
    meta, _, arr = read_csv(text, 2)
    return CountingCurve(arr[:, 0], arr[:, 1], meta.get("source", "external"),
                         float(meta.get("hbar", 1.0)))


def inversion_to_csv(res):
    meta = {"source": res.family, "monotone": int(res.monotone)}
    if res.gamma is not None:
        meta["gamma"] = fmt(res.gamma)
    name = "w" if res.family == "xp" else "V"
    return write_csv(zip(res.w, res.x), [name, "x"], meta)


def inversion_from_csv(text):
    meta, _, arr = read_csv(text, 2)
    fam = meta.get("source", "xp")
    gamma = float(meta["gamma"]) if "gamma" in meta else None
    return InversionResult(arr[:, 0], arr[:, 1], fam, bool(int(meta.get("monotone", 1))), gamma)


# -- spectra ------------------------------------------------------------------------

def spectrum_to_csv(spec):
    rows = [(k, e, r) for k, (e, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]
    meta = {"theta": fmt(spec.theta), "hbar": fmt(spec.hbar), "solver": spec.solver}
    if spec.zero_mode is not None:
        meta["zero_mode_norm"] = fmt(spec.zero_mode)
    if spec.continuum is not None:
        meta["continuum"] = " ".join(fmt(c) for c in spec.continuum)
    return write_csv(rows, ["index", "E", "residual"], meta)


def spectrum_to_json(spec):
    return json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n"
