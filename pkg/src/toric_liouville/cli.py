"""Command line entry point: ``toric-liouville {info,levelset,orbits,verify}``.

Exit codes: 0 success, 1 a verification check failed or was refused,
2 invalid input.  Outputs are deterministic for identical inputs and seeds.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from ._exact import frac_str
from .contact_verify import (
    check_wrapping_average,
    contact_check,
    distortion_constant,
    exact_torus_check,
    infinitesimal_wrapping,
)
from .dynamics import dynamical_support
from .errors import HypothesisUnmet, InadmissibleEpsilon, ToricError
from .smoothing import bump_params, sample_level_set
from .spec_io import load_spec, polytope_from_spec, write_json

DEFAULTS = {
    "epsilon": [0.5],
    "delta": [0.25, 0.5, 0.75, 1.0],  # level-set figure
    "contact_delta": [0.25, 0.5, 0.9],  # contact check
    "radii": [0.3, 0.7, 1.0, 1.5],
    "samples": 300,
    "distortion_samples": 100,
    "seed": 0,
    "tol_identity": 1e-8,
    "tol_limit": 1e-2,
    "tol_distortion": 1e-9,
    "tol_torus": 1e-10,
    "a_small": 1e-3,
    "n_quad": 128,
    "n_dirs": 360,
    "bound": None,
}


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not vals:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    return vals


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toric-liouville", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, help="JSON fan or H-representation")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--config", help="JSON file with option defaults (flags override)")

    sub.add_parser("info", parents=[common], help="combinatorial summary")

    eps = argparse.ArgumentParser(add_help=False)
    eps.add_argument("--epsilon", type=_float_list, help="scalar or per-ray smoothing parameters")

    p = sub.add_parser("levelset", parents=[common, eps], help="level sets of the smoothing function")
    p.add_argument("--delta", type=_float_list, metavar="D1,D2,...")
    p.add_argument("--n-dirs", type=int, dest="n_dirs")

    p = sub.add_parser("orbits", parents=[common, eps], help="dynamical supports and orbit families")
    p.add_argument("--bound", type=_positive, help="optional cap on |v| below the proof bound")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("verify", parents=[common, eps], help="run the verification suite")
    p.add_argument("--delta", type=_float_list, dest="contact_delta", metavar="D1,D2,...")
    p.add_argument("--radii", type=_float_list, metavar="A1,A2,...")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol-identity", type=_positive, dest="tol_identity")
    p.add_argument("--tol-limit", type=_positive, dest="tol_limit")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Built-in defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ToricError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ToricError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("tol_identity", "tol_limit", "tol_distortion", "tol_torus"):
        if not cfg[key] > 0:
            raise ToricError(f"{key} must be positive")
    if np.ndim(cfg["epsilon"]) == 0:
        cfg["epsilon"] = [cfg["epsilon"]]
    return cfg


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_info(P, spec_path, cfg) -> dict:
    pl = P.pl
    return {
        "spec": spec_path,
        "dim": P.dim,
        "rays": [list(u) for u in P.fan.rays],
        "ray_count": len(P.fan.rays),
        "maximal_cones": [sorted(c.rays) for c in P.fan.maximal_cones],
        "complete": P.fan.complete,
        "strictly_concave": True,  # construction raises otherwise
        "phi": [frac_str(v) for v in pl.ray_values],
        "r": pl.r,
        "minimal_r": pl.minimal_r,
        "offsets": [frac_str(b) for b in P.offsets],
        "vertices": [list(v) for v in P.vertices],
        "lattice_point_count": len(P.lattice_points),
        "average_lattice_point": [frac_str(x) for x in P.average_lattice_point],
        "shift": list(P.shift),
        "origin_normalized": P.origin_normalized,
    }


def _fmt_delta(delta: float) -> str:
    return format(delta, "g")


def _levelset_csv(sample) -> str:
    n = sample.directions.shape[1]
    head = ["direction_index"] + [f"v_{k + 1}" for k in range(n)] + ["t"] + [f"m_{k + 1}" for k in range(n)]
    lines = [",".join(head)]
    for i, (v, t, m) in enumerate(zip(sample.directions, sample.radii, sample.points)):
        row = [str(i)] + [repr(float(x)) for x in v]
        row += [""] * (n + 1) if math.isnan(t) else [repr(float(t))] + [repr(float(x)) for x in m]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _ordered_vertices(P):
    V = np.array(P.vertices, dtype=float)
    c = V.mean(axis=0)
    order = np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]), kind="stable")
    return V[order]


def _svg(P, samples) -> str:
    V = _ordered_vertices(P)
    lo, hi = V.min(axis=0), V.max(axis=0)
    size, pad = 400.0, 20.0
    scale = (size - 2 * pad) / float(max(hi - lo))

    def xy(p):
        return f"{pad + (p[0] - lo[0]) * scale:.4f},{size - pad - (p[1] - lo[1]) * scale:.4f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<polygon points="{" ".join(xy(v) for v in V)}" fill="none" stroke="black" stroke-width="1.5"/>',
    ]
    for sample in samples:
        dash = ' stroke-dasharray="6,4"' if sample.delta == 1.0 else ""
        present = sample.present
        # split into runs of present directions; a full run closes into a polygon
        if present.all():
            pts = " ".join(xy(p) for p in sample.points)
            parts.append(f'<polygon points="{pts}" fill="none" stroke="steelblue" stroke-width="1"{dash} data-delta="{_fmt_delta(sample.delta)}"/>')
            continue
        run = []
        for ok, p in zip(present, sample.points):
            if ok:
                run.append(xy(p))
            elif run:
                parts.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="steelblue" stroke-width="1"{dash} data-delta="{_fmt_delta(sample.delta)}"/>')
                run = []
        if run:
            parts.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="steelblue" stroke-width="1"{dash} data-delta="{_fmt_delta(sample.delta)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_levelset(P, spec_path, cfg, out: Path) -> dict:
    eps = bump_params(P, cfg["epsilon"])
    samples = []
    summary = {"spec": spec_path, "epsilon": list(eps.epsilon), "n_dirs": cfg["n_dirs"], "levels": []}
    for delta in cfg["delta"]:
        sample = sample_level_set(P, eps, delta, cfg["n_dirs"])
        samples.append(sample)
        name = f"levelset_{_fmt_delta(delta)}.csv"
        (out / name).write_text(_levelset_csv(sample))
        summary["levels"].append(
            {"delta": delta, "file": name, "present": int(sample.present.sum()), "absent": int((~sample.present).sum())}
        )
    if P.dim == 2:
        (out / "levelset.svg").write_text(_svg(P, samples))
        summary["svg"] = "levelset.svg"
    return summary


def cmd_orbits(P, spec_path, cfg) -> dict:
    eps = bump_params(P, cfg["epsilon"])
    cones = []
    for k in range(1, P.dim + 1):
        for sigma in P.fan.cones_of_dim(k):
            ds = dynamical_support(P, eps, sigma, seed=cfg["seed"], cap=cfg["bound"])
            cones.append(ds.to_dict())
    return {"spec": spec_path, "epsilon": list(eps.epsilon), "seed": cfg["seed"], "bound_cap": cfg["bound"], "cones": cones}


def cmd_verify(P, spec_path, cfg) -> dict:
    eps = bump_params(P, cfg["epsilon"])
    rays = range(len(P.facets))
    checks = {}
    checks["wrapping_average"] = [
        check_wrapping_average(P, i, cfg["radii"], cfg["tol_identity"], cfg["n_quad"], strict=False).to_dict()
        for i in rays
    ]
    checks["infinitesimal_wrapping"] = [
        infinitesimal_wrapping(P, i, cfg["a_small"], cfg["tol_limit"], cfg["n_quad"], strict=False).to_dict()
        for i in rays
    ]
    checks["distortion"] = [
        distortion_constant(P, i, cfg["distortion_samples"], cfg["seed"], cfg["tol_distortion"], strict=False).to_dict()
        for i in rays
    ]
    try:
        checks["contact"] = contact_check(
            P, eps, cfg["contact_delta"], cfg["samples"], cfg["seed"], cfg["tol_identity"], strict=False
        ).to_dict()
    except (InadmissibleEpsilon, HypothesisUnmet) as exc:
        checks["contact"] = {"passed": False, "refused": type(exc).__name__, "reason": str(exc)}
    try:
        checks["exact_torus"] = exact_torus_check(P, cfg["tol_torus"], seed=cfg["seed"], strict=False).to_dict()
    except ToricError as exc:
        checks["exact_torus"] = {"passed": False, "refused": type(exc).__name__, "reason": str(exc)}

    def ok(entry):
        return all(e["passed"] for e in entry) if isinstance(entry, list) else entry["passed"]

    status = {name: ok(entry) for name, entry in checks.items()}
    return {
        "spec": spec_path,
        "epsilon": list(eps.epsilon),
        "contact_admissible": eps.contact_admissible,
        "seed": cfg["seed"],
        "tolerances": {k: cfg[k] for k in ("tol_identity", "tol_limit", "tol_distortion", "tol_torus")},
        "config": {k: cfg[k] for k in ("contact_delta", "radii", "samples", "distortion_samples", "a_small", "n_quad")},
        "checks": checks,
        "status": status,
        "passed": all(status.values()),
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        cfg = resolve_config(args)
        data, text = load_spec(args.spec)
        P = polytope_from_spec(data, text)
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if args.command == "info":
                report, name = cmd_info(P, args.spec, cfg), "info.json"
            elif args.command == "levelset":
                report, name = cmd_levelset(P, args.spec, cfg, out), "levelset.json"
            elif args.command == "orbits":
                report, name = cmd_orbits(P, args.spec, cfg), "orbits.json"
            else:
                report, name = cmd_verify(P, args.spec, cfg), "verify.json"
    except ToricError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    write_json(report, out / name)
    if args.command == "verify":
        for check, passed in report["status"].items():
            print(f"{check:24s} {'PASS' if passed else 'FAIL'}")
        return 0 if report["passed"] else 1
    print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
