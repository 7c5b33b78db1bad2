"""Batch front-end: every study as a subcommand with machine-readable output.

Reports are JSON objects {command, params, results, checks} (CSV for the
tabular studies).  A run exits 0 when every mathematical check passed,
2 when one failed (the failing quantity is named in the report), and 1 on
usage errors.  Identical config and seed produce byte-identical payloads;
the FRAMEKIT_THREADS environment variable caps fan-out across parameter
ranges (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fixtures
from .errors import DomainError, FramekitError
from .frames import (
    analysis,
    cross_gramian,
    dual_frame,
    frame_bounds,
    frame_operator_matrix,
    reconstruct_dual,
    reconstruct_primal,
    reference_frame,
)
from .multiscale import bernstein_rate, bpx_frame, build_hierarchy, jackson_rate, norm_equivalence_ratio
from .operator_repr import (
    composition_check,
    direct_solution,
    galerkin_solve,
    gram_identity_check,
    make_operator,
    manufactured_sine_load,
    manufactured_sine_solution,
    matrix_representation,
    operator_from_matrix,
    poisson_operator,
    pseudo_inverse_identity_check,
)
from .spaces import DualVector, PrimalVector, build_triple, primal_norm
from .frames import min_norm_coefficients

COMMANDS = (
    "bounds",
    "dual",
    "gramian",
    "rates",
    "norm-equiv",
    "bpx",
    "solve-poisson",
    "identities",
)

CSV_COMMANDS = ("rates", "bpx")


@dataclass
class RunConfig:
    command: str
    j_fine: Optional[int] = None
    j_levels: tuple[int, ...] = ()
    q: float = 1.0
    seed: int = 0
    tol: float = 1e-8
    output: Optional[str] = None
    fmt: str = "json"
    fixture: Optional[str] = None
    samples: int = 20
    max_ratio: float = 60.0
    max_spread: float = 20.0

    def params_dict(self) -> dict:
        return {
            "J_fine": self.j_fine,
            "J": list(self.j_levels),
            "q": self.q,
            "seed": self.seed,
            "tol": self.tol,
            "format": self.fmt,
            "fixture": self.fixture,
            "samples": self.samples,
            "max_ratio": self.max_ratio,
            "max_spread": self.max_spread,
        }


class UsageError(Exception):
    pass


def _check(name: str, passed: bool, value, tolerance) -> dict:
    return {"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _thread_count() -> int:
    raw = os.environ.get("FRAMEKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_levels(fn, levels):
    """Apply fn over hierarchy depths, optionally fanning out across threads."""
    workers = _thread_count()
    if workers == 1 or len(levels) <= 1:
        return [fn(j) for j in levels]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, levels))


# -- subcommands ---------------------------------------------------------------


def _cmd_bounds(cfg: RunConfig, rng):
    name = (cfg.fixture or "F2").upper()
    frame = fixtures.by_name(name)
    b = frame_bounds(frame)
    results = {
        "fixture": name,
        "lower": b.lower,
        "upper": b.upper,
        "ratio": b.ratio,
        "tight": b.tight,
        "note": fixtures.FIXTURE_NOTES.get(name),
    }
    checks = [
        _check("lower_bound_positive", b.lower > 0.0, b.lower, 0.0),
        _check("bounds_ordered", b.lower <= b.upper, b.ratio, 1.0),
    ]
    return results, checks, None


def _random_suite(cfg: RunConfig, rng):
    qs = (0.0, 0.5, 1.0)
    fines = (2, 3, 4)
    for i in range(cfg.samples):
        j_fine = fines[i % len(fines)]
        q = qs[i % len(qs)]
        n = 2**j_fine - 1
        k = n + int(rng.integers(1, n + 5))
        yield fixtures.random_spanning_frame(rng, j_fine, q, min(k, 60))


def _cmd_dual(cfg: RunConfig, rng):
    if cfg.fixture:
        frames = [fixtures.by_name(cfg.fixture)]
    else:
        frames = list(_random_suite(cfg, rng))
    dev_bounds = 0.0
    dev_sop = 0.0
    dev_recon = 0.0
    for frame in frames:
        b = frame_bounds(frame)
        dual = dual_frame(frame)
        db = frame_bounds(dual)
        dev_bounds = max(
            dev_bounds, abs(db.lower - 1.0 / b.upper), abs(db.upper - 1.0 / b.lower)
        )
        s = frame_operator_matrix(frame)
        s_dual = frame_operator_matrix(dual)
        s_inv = np.linalg.inv(s)
        dev_sop = max(
            dev_sop, float(np.linalg.norm(s_dual - s_inv) / np.linalg.norm(s_inv))
        )
        f = PrimalVector(rng.standard_normal(frame.n))
        g = DualVector(rng.standard_normal(frame.n))
        rf = reconstruct_primal(frame, dual, f)
        rg = reconstruct_dual(frame, dual, g)
        dev_recon = max(
            dev_recon,
            float(np.linalg.norm(rf.coeffs - f.coeffs) / np.linalg.norm(f.coeffs)),
            float(np.linalg.norm(rg.action - g.action) / np.linalg.norm(g.action)),
        )
    results = {
        "frames_tested": len(frames),
        "dual_bounds_deviation": dev_bounds,
        "frame_operator_inverse_deviation": dev_sop,
        "reconstruction_deviation": dev_recon,
    }
    checks = [
        _check("dual_bounds_are_reciprocal", dev_bounds <= 1e-8, dev_bounds, 1e-8),
        _check("dual_frame_operator_is_inverse", dev_sop <= 1e-9, dev_sop, 1e-9),
        _check("reconstruction_identities", dev_recon <= 1e-10, dev_recon, 1e-10),
    ]
    return results, checks, None


def _projector_residuals(frame, rng):
    dual = dual_frame(frame)
    g = cross_gramian(frame, dual)
    g_rev = cross_gramian(dual, frame)
    gn = float(np.linalg.norm(g))
    idem = float(np.linalg.norm(g @ g - g)) / gn
    sym = float(np.linalg.norm(g - g.T)) / gn
    pair = float(np.linalg.norm(g - g_rev)) / gn
    u, s, _ = np.linalg.svd(frame.elements.T, full_matrices=False)
    keep = s > s[0] * 1e-10
    p_svd = u[:, keep] @ u[:, keep].T
    svd_diff = float(np.linalg.norm(g - p_svd)) / gn
    split = 0.0
    for _ in range(20):
        c = rng.standard_normal(frame.k)
        tail = c - g @ c
        synth = frame.elements @ tail
        split = max(split, float(np.linalg.norm(synth)) / max(np.linalg.norm(c), 1e-300))
    return {
        "idempotency": idem,
        "symmetry": sym,
        "transpose_pair": pair,
        "svd_projector": svd_diff,
        "splitting": split,
    }


def _cmd_gramian(cfg: RunConfig, rng):
    if cfg.fixture:
        frame = fixtures.by_name(cfg.fixture)
        source = cfg.fixture.upper()
    elif cfg.j_levels:
        frame = bpx_frame(build_hierarchy(cfg.j_levels[0]), cfg.q)
        source = f"bpx(J={cfg.j_levels[0]}, q={cfg.q})"
    else:
        frame = fixtures.by_name("F1")
        source = "F1"
    res = _projector_residuals(frame, rng)
    results = {"frame": source, **res}
    checks = [_check(name, value <= 1e-10, value, 1e-10) for name, value in res.items()]
    return results, checks, None


def _growth_band(q: float) -> tuple[float, float]:
    center = 4.0**q
    return 0.8 * center, 1.2 * center


def _cmd_rates(cfg: RunConfig, rng):
    j_max = cfg.j_levels[0] if cfg.j_levels else 8
    hy = build_hierarchy(j_max)
    jackson = jackson_rate(hy, lambda x: np.sin(np.pi * x))
    bernstein = bernstein_rate(hy, cfg.q)
    results = {
        "jackson": jackson.to_json_dict(),
        "bernstein": bernstein.to_json_dict(),
    }
    checks = [
        _check("jackson_slope", abs(jackson.slope + 2.0) <= 0.15, jackson.slope, "-2 +/- 0.15")
    ]
    values = bernstein.values
    if cfg.q == 0.0:
        dev = max(abs(v - 1.0) for v in values)
        checks.append(_check("bernstein_flat_at_q0", dev <= 1e-10, dev, 1e-10))
    else:
        lo, hi = _growth_band(cfg.q)
        growth = [values[j + 1] / values[j] for j in range(3, len(values) - 1)]
        ok = all(lo <= gr <= hi for gr in growth) if growth else False
        worst = max(growth, key=lambda gr: abs(gr - 4.0**cfg.q)) if growth else None
        checks.append(_check("bernstein_growth", ok, worst, f"[{lo}, {hi}]"))
    rows = [["study", "level", "value", "slope"]]
    for rep, study in ((jackson, "jackson"), (bernstein, "bernstein")):
        for j, v in zip(rep.levels, rep.values):
            rows.append([study, j, repr(v), repr(rep.slope)])
    return results, checks, rows


def _cmd_norm_equiv(cfg: RunConfig, rng):
    j_max = cfg.j_levels[0] if cfg.j_levels else 6
    if not 0.0 < cfg.q < 1.5:
        raise DomainError(f"norm-equiv needs 0 < q < 3/2, got {cfg.q}")
    hy = build_hierarchy(j_max)
    n = hy.fine_triple().n
    ratios = []
    for _ in range(cfg.samples):
        g = DualVector(rng.standard_normal(n))
        ratios.append(norm_equivalence_ratio(hy, cfg.q, g))
    ratios = np.asarray(ratios)
    g = DualVector(rng.standard_normal(n))
    r1 = norm_equivalence_ratio(hy, cfg.q, g)
    r2 = norm_equivalence_ratio(hy, cfg.q, DualVector(2.0 * g.action))
    homogeneity = abs(r2 - r1) / r1
    spread = float(ratios.max() / ratios.min())
    results = {
        "samples": cfg.samples,
        "r_min": float(ratios.min()),
        "r_max": float(ratios.max()),
        "spread": spread,
        "homogeneity_deviation": homogeneity,
    }
    checks = [
        _check("equivalence_spread", spread <= cfg.max_spread, spread, cfg.max_spread),
        _check("scaling_invariance", homogeneity <= 1e-12, homogeneity, 1e-12),
    ]
    return results, checks, None


def _cmd_bpx(cfg: RunConfig, rng):
    levels = cfg.j_levels or tuple(range(2, 8))

    def one(j):
        hy = build_hierarchy(j)
        frame = bpx_frame(hy, cfg.q)
        b = frame_bounds(frame)
        stiff = hy.fine_triple(1.0).stiffness.a
        w = np.linalg.eigvalsh(stiff)
        return {
            "J": j,
            "lower": b.lower,
            "upper": b.upper,
            "ratio": b.ratio,
            "kappa_single": float(w[-1] / w[0]),
        }

    rows_data = _map_levels(one, list(levels))
    results = {"q": cfg.q, "rows": rows_data}
    ratios = [r["ratio"] for r in rows_data]
    checks = []
    if cfg.q > 0.0:
        worst = max(ratios)
        checks.append(
            _check("bound_ratio_capped", worst <= cfg.max_ratio, worst, cfg.max_ratio)
        )
    else:
        increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
        checks.append(
            _check(
                "ratio_grows_without_scaling",
                increasing,
                ratios[-1] / ratios[0] if ratios[0] else None,
                "strictly increasing",
            )
        )
    kappas = [r["kappa_single"] for r in rows_data]
    growth = [b / a for a, b in zip(kappas, kappas[1:])]
    if growth:
        ok = all(3.2 <= gr <= 4.8 for gr in growth)
        worst_growth = max(growth, key=lambda gr: abs(gr - 4.0))
        checks.append(_check("single_level_kappa_growth", ok, worst_growth, "[3.2, 4.8]"))
    rows = [["J", "lower", "upper", "ratio", "kappa_single"]]
    for r in rows_data:
        rows.append([r["J"], repr(r["lower"]), repr(r["upper"]), repr(r["ratio"]), repr(r["kappa_single"])])
    return results, checks, rows


def _cmd_solve_poisson(cfg: RunConfig, rng):
    j_max = cfg.j_levels[0] if cfg.j_levels else 6
    hy = build_hierarchy(j_max)
    triple = hy.fine_triple(1.0)
    frame = bpx_frame(hy, 1.0)
    op = poisson_operator(triple)
    b = manufactured_sine_load(triple)
    sol = galerkin_solve(frame, op, b, tol=cfg.tol)
    u_direct = direct_solution(op, b)
    scale = primal_norm(triple, u_direct)
    err_direct = primal_norm(
        triple, PrimalVector(sol.solution.coeffs - u_direct.coeffs)
    ) / scale
    u_exact = manufactured_sine_solution(triple)
    err_interp = primal_norm(
        triple, PrimalVector(sol.solution.coeffs - u_exact.coeffs)
    ) / primal_norm(triple, u_exact)
    mn = min_norm_coefficients(frame, u_direct)
    mn_diff = float(np.linalg.norm(sol.coefficients - mn) / np.linalg.norm(mn))
    results = {
        "J": j_max,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "h1_error_vs_direct": err_direct,
        "h1_error_vs_interpolant": err_interp,
        "min_norm_deviation": mn_diff,
    }
    checks = [
        _check("matches_direct_solve", err_direct <= 10 * cfg.tol, err_direct, 10 * cfg.tol),
        _check("min_norm_coefficients", mn_diff <= 10 * cfg.tol, mn_diff, 10 * cfg.tol),
        _check(
            "h1_rate_vs_interpolant",
            err_interp <= 2.0 ** -float(j_max),
            err_interp,
            2.0 ** -float(j_max),
        ),
    ]
    return results, checks, None


def _identity_block(frame, op, rng):
    m = matrix_representation(frame, frame, op)
    sym = float(np.abs(m - m.T).max()) / max(float(np.abs(m).max()), 1e-300)
    ritz_min = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
    gram = gram_identity_check(frame, op)
    comp = composition_check(frame, frame, op, op)
    pinv_res = pseudo_inverse_identity_check(frame, op)
    from .operator_repr import inverse_representation

    m_inv = inverse_representation(frame, op)
    rec_inv = operator_from_matrix(frame, frame, m_inv).matrix
    l_inv = np.linalg.inv(op.matrix)
    rec_inv_res = float(np.linalg.norm(rec_inv - l_inv) / np.linalg.norm(l_inv))
    dual = dual_frame(frame)
    rec_fwd = operator_from_matrix(dual, dual, m).matrix
    rec_fwd_res = float(np.linalg.norm(rec_fwd - op.matrix) / np.linalg.norm(op.matrix))
    return {
        "symmetry": sym,
        "ritz_min": ritz_min,
        "gram_left": gram.left_residual,
        "gram_right": gram.right_residual,
        "kernel_angle": gram.kernel_angle,
        "composition": comp,
        "pseudo_inverse": pinv_res,
        "reconstruct_inverse": rec_inv_res,
        "reconstruct_forward": rec_fwd_res,
    }


def _cmd_identities(cfg: RunConfig, rng):
    j_max = cfg.j_levels[0] if cfg.j_levels else 3
    f1 = fixtures.fixture_f1()
    instances = [
        ("F1", f1, make_operator(f1.triple, np.diag([3.0, 5.0]))),
    ]
    t = build_triple(3, 1.0)
    instances.append(("hat-basis", reference_frame(t), poisson_operator(t)))
    hy = build_hierarchy(j_max)
    tq = hy.fine_triple(1.0)
    instances.append((f"bpx-J{j_max}", bpx_frame(hy, 1.0), poisson_operator(tq)))
    results = {}
    checks = []
    for name, frame, op in instances:
        block = _identity_block(frame, op, rng)
        results[name] = block
        for key, value in block.items():
            if key == "ritz_min":
                checks.append(
                    _check(f"{name}.non_negative", value >= -1e-10, value, -1e-10)
                )
            else:
                checks.append(_check(f"{name}.{key}", value <= 1e-8, value, 1e-8))
    return results, checks, None


_HANDLERS = {
    "bounds": _cmd_bounds,
    "dual": _cmd_dual,
    "gramian": _cmd_gramian,
    "rates": _cmd_rates,
    "norm-equiv": _cmd_norm_equiv,
    "bpx": _cmd_bpx,
    "solve-poisson": _cmd_solve_poisson,
    "identities": _cmd_identities,
}


# -- report assembly -----------------------------------------------------------

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "params", "results", "checks"],
    "properties": {
        "command": {"type": "string", "enum": list(COMMANDS)},
        "params": {"type": "object"},
        "results": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "value", "tolerance"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "value": {},
                    "tolerance": {},
                },
            },
        },
    },
}

RESULT_SCHEMAS = {
    "bounds": {
        "type": "object",
        "required": ["fixture", "lower", "upper", "ratio", "tight"],
        "properties": {
            "fixture": {"type": "string"},
            "lower": {"type": "number"},
            "upper": {"type": "number"},
            "ratio": {"type": "number"},
            "tight": {"type": "boolean"},
            "note": {"type": ["string", "null"]},
        },
    },
    "dual": {
        "type": "object",
        "required": [
            "frames_tested",
            "dual_bounds_deviation",
            "frame_operator_inverse_deviation",
            "reconstruction_deviation",
        ],
    },
    "gramian": {
        "type": "object",
        "required": [
            "frame",
            "idempotency",
            "symmetry",
            "transpose_pair",
            "svd_projector",
            "splitting",
        ],
    },
    "rates": {
        "type": "object",
        "required": ["jackson", "bernstein"],
        "properties": {
            "jackson": {
                "type": "object",
                "required": ["levels", "values", "slope", "constant", "fit_window"],
            },
            "bernstein": {
                "type": "object",
                "required": ["levels", "values", "slope", "constant", "fit_window"],
            },
        },
    },
    "norm-equiv": {
        "type": "object",
        "required": ["samples", "r_min", "r_max", "spread", "homogeneity_deviation"],
    },
    "bpx": {
        "type": "object",
        "required": ["q", "rows"],
        "properties": {
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["J", "lower", "upper", "ratio", "kappa_single"],
                },
            }
        },
    },
    "solve-poisson": {
        "type": "object",
        "required": [
            "J",
            "iterations",
            "residual",
            "h1_error_vs_direct",
            "h1_error_vs_interpolant",
            "min_norm_deviation",
        ],
    },
    "identities": {"type": "object"},
}


def render_json(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def render_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def run(config: RunConfig) -> int:
    """Execute one configured study; returns the process exit code."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise UsageError(f"unknown command {config.command!r}")
    if config.fmt == "csv" and config.command not in CSV_COMMANDS:
        raise UsageError(
            f"csv output is supported for {CSV_COMMANDS}, not {config.command!r}"
        )
    rng = np.random.default_rng(config.seed)
    try:
        results, checks, rows = handler(config, rng)
    except (DomainError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    except FramekitError as exc:
        results = {"error": str(exc)}
        checks = [_check("computation_completed", False, str(exc), None)]
        rows = None
    report = {
        "command": config.command,
        "params": config.params_dict(),
        "results": results,
        "checks": checks,
    }
    if config.fmt == "csv":
        payload = render_csv(rows or [])
    else:
        payload = render_json(report)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0 if all(c["passed"] for c in checks) else 2


# -- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        raise UsageError(message)


def parse_level_range(text: str) -> tuple[int, ...]:
    """Expand '2..7' into (2, ..., 7); a single integer stays a singleton."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise UsageError(f"bad level range {text!r}") from None
        if hi < lo:
            raise UsageError(f"empty level range {text!r}")
        return tuple(range(lo, hi + 1))
    try:
        return (int(text),)
    except ValueError:
        raise UsageError(f"bad level {text!r}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="framekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for random-vector studies")
    common.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    common.add_argument("--output", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    common.add_argument("--q", type=float, default=1.0, help="Sobolev exponent")
    common.add_argument("--J", dest="j_levels", help="hierarchy depth or range like 2..7")
    common.add_argument("--J-fine", dest="j_fine", type=int, help="fine grid level")
    common.add_argument("--fixture", help="named fixture (F1..F4)")
    common.add_argument("--samples", type=int, default=20, help="random sample count")
    common.add_argument("--max-ratio", type=float, default=60.0, help="bound-ratio cap checked by bpx")
    common.add_argument("--max-spread", type=float, default=20.0, help="spread cap checked by norm-equiv")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the {name} study")
    return parser


def config_from_args(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("a subcommand is required")
    levels: tuple[int, ...] = ()
    if ns.j_levels:
        levels = parse_level_range(ns.j_levels)
    return RunConfig(
        command=ns.command,
        j_fine=ns.j_fine,
        j_levels=levels,
        q=ns.q,
        seed=ns.seed,
        tol=ns.tol,
        output=ns.output,
        fmt=ns.fmt,
        fixture=ns.fixture,
        samples=ns.samples,
        max_ratio=ns.max_ratio,
        max_spread=ns.max_spread,
    )


def main(argv=None) -> int:
    try:
        config = config_from_args(sys.argv[1:] if argv is None else argv)
        return run(config)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        sys.stderr.write(build_parser().format_usage())
        return 1


if __name__ == "__main__":
    sys.exit(main())
