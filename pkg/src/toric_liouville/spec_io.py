"""Reading polytope specifications and writing deterministic reports.

Two JSON input formats are accepted::

    {"dim": 2, "rays": [[1, 0], ...], "maximal_cones": [[0, 1], ...],
     "phi": ["-1", "-1/2", ...], "r": 2}

    {"normals": [[1, 0], ...], "offsets": ["-1", ...], "r": 1}

``r`` is optional (the minimal scale is used).  ``"normalize_origin": false``
keeps the polytope where it is; by default it is translated so that the
interior lattice point closest to the average lattice point is the origin.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from ._exact import frac_str, to_fraction
from .errors import SpecError, ToricError
from .lattice_fan import SectionPolytope, build_fan, normalize_origin, pl_from_ray_values, polytope_from_hrep, section_polytope


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _where(text, key):
    line = _line_of(text, key) if text else None
    return f" (line {line}, key '{key}')" if line else f" (key '{key}')"


def load_spec(path) -> tuple[dict, str]:
    """Parse a JSON spec file; returns (data, raw text)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise SpecError(f"{path}: top level must be a JSON object")
    return data, text


def _int_matrix(data, key, text):
    rows = data.get(key)
    if not isinstance(rows, list) or not rows:
        raise SpecError(f"'{key}' must be a nonempty list of integer vectors" + _where(text, key))
    out = []
    for row in rows:
        if not isinstance(row, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in row):
            raise SpecError(f"'{key}' entries must be lists of integers, got {row!r}" + _where(text, key))
        out.append(tuple(row))
    return out


def _rationals(data, key, text, count):
    vals = data.get(key)
    if not isinstance(vals, list) or len(vals) != count:
        raise SpecError(f"'{key}' must be a list of {count} rationals" + _where(text, key))
    try:
        return [to_fraction(v) for v in vals]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"'{key}': {exc}" + _where(text, key)) from exc


def polytope_from_spec(data: dict, text: str = "") -> SectionPolytope:
    """Build the section polytope described by a parsed spec."""
    r = data.get("r")
    if r is not None and (not isinstance(r, int) or isinstance(r, bool) or r <= 0):
        raise SpecError("'r' must be a positive integer" + _where(text, "r"))
    try:
        if "rays" in data:
            rays = _int_matrix(data, "rays", text)
            dim = data.get("dim", len(rays[0]))
            if not isinstance(dim, int) or any(len(u) != dim for u in rays):
                raise SpecError("ray lengths must equal 'dim'" + _where(text, "rays"))
            cones = data.get("maximal_cones")
            if not isinstance(cones, list) or not all(isinstance(c, list) for c in cones):
                raise SpecError("'maximal_cones' must be a list of ray-index lists" + _where(text, "maximal_cones"))
            phi = _rationals(data, "phi", text, len(rays))
            fan = build_fan(dim, rays, cones)
            P = section_polytope(pl_from_ray_values(fan, phi, r))
        elif "normals" in data:
            normals = _int_matrix(data, "normals", text)
            offsets = _rationals(data, "offsets", text, len(normals))
            P = polytope_from_hrep(normals, offsets, r)
        else:
            raise SpecError("spec needs either 'rays'/'maximal_cones'/'phi' or 'normals'/'offsets'")
    except SpecError:
        raise
    except ToricError as exc:
        witness = getattr(exc, "witness", None)
        extra = f"; witness direction {list(witness)}" if witness is not None else ""
        key = "maximal_cones" if "rays" in data else "normals"
        err = type(exc)(f"{exc}{extra}" + _where(text, key))
        if witness is not None:
            err.witness = witness
        raise err from exc
    if data.get("normalize_origin", True):
        P = normalize_origin(P)
    return P


def read_polytope(path) -> SectionPolytope:
    data, text = load_spec(path)
    return polytope_from_spec(data, text)


def jsonable(obj):
    """Recursively convert Fractions, tuples and numpy scalars for json."""
    import numpy as np

    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")
