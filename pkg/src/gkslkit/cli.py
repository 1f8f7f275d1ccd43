"""Command-line front end.

Every command writes a JSON report (to ``--out`` or stdout) that embeds the
tool version, the configuration and the tolerances used. The exit status is
0 when all checks pass, 1 when a numerical band fails, 2 for usage or parse
errors, and a per-family code (see ``gkslkit.errors``) for numerical errors.

Each flag can also be set through an environment variable ``GKSLKIT_<FLAG>``,
e.g. ``GKSLKIT_SEED=7`` or ``GKSLKIT_DT_GRID=1e-2,1e-3``; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys

import numpy as np

from . import __version__
from .channels import (
    kraus_from_choi,
    super_apply,
    super_dim,
    super_from_kraus,
)
from .ensembles import random_generator, random_kraus
from .errors import GkslError, ParseError
from .extraction import DEFAULT_DT_GRID, DEFAULT_DT_PAIR, extract_generator, order_diagnostics
from .gksl import (
    GkslGenerator,
    amplitude_damping,
    build_super,
    canonicalize,
    generator_distance,
    is_canonical,
    trace_identity_check,
    zero_generator,
)
from .io import (
    channel_choi,
    channel_from_json,
    channel_super,
    channel_to_json,
    dumps,
    file_kind,
    generator_from_json,
    generator_to_json,
    operator_to_json,
    read_json,
    write_text_atomic,
)
from .kraus_align import align, closeness_experiment
from .operator_core import dag
from .semigroup import channel_at, trotter_convergence

ENV_PREFIX = "GKSLKIT_"
MAX_DIM = 8
DEFAULT_N_GRID = (16, 64, 256, 1024, 4096)
DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
DEFAULT_TOL = 1e-9
MODELS = {"amplitude-damping": lambda d: amplitude_damping(), "zero": zero_generator}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _env(name: str, convert, fallback):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return convert(raw)
    except ValueError:
        raise ParseError(f"environment variable {ENV_PREFIX + name}={raw!r} is malformed") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkslkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gkslkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--dim", type=int, default=None)
    common.add_argument("--in", dest="inputs", action="append", default=None, metavar="PATH")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--model", choices=sorted(MODELS), default=None,
                        help="built-in generator instead of --in")

    p = sub.add_parser("gen", parents=[common], help="write a random instance")
    p.add_argument("--kind", choices=["generator", "unital_channel", "cp_map"], default="generator")
    sub.add_parser("validate", parents=[common], help="check a channel or generator file")
    p = sub.add_parser("expm", parents=[common], help="channel exp(tL) of a generator")
    p.add_argument("--t", type=float, default=None)
    p = sub.add_parser("trotter", parents=[common], help="Trotter convergence experiment")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--n-grid", type=_ints, default=None)
    p = sub.add_parser("extract", parents=[common], help="recover a generator from its semigroup")
    p.add_argument("--dt1", type=float, default=None)
    p.add_argument("--dt2", type=float, default=None)
    p.add_argument("--dt-grid", type=_floats, default=None)
    sub.add_parser("align", parents=[common], help="align the Kraus sets of two channel files")
    p = sub.add_parser("closeness", parents=[common], help="aligned Kraus distance under perturbation")
    p.add_argument("--eps-grid", type=_floats, default=None)
    p.add_argument("--t", type=float, default=None)
    p = sub.add_parser("diagnose", parents=[common], help="order-law diagnostics of a generator")
    p.add_argument("--dt-grid", type=_floats, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge flags over ``GKSLKIT_*`` environment defaults."""
    def pick(attr, env, convert, fallback):
        value = getattr(args, attr, None)
        return value if value is not None else _env(env, convert, fallback)

    cfg = {
        "command": args.command,
        "seed": pick("seed", "SEED", int, 0),
        "dim": pick("dim", "DIM", int, 2),
        "inputs": list(args.inputs) if args.inputs else _env("IN", lambda s: s.split(","), []),
        "out": pick("out", "OUT", str, None),
        "tol": pick("tol", "TOL", float, DEFAULT_TOL),
        "model": pick("model", "MODEL", str, None),
    }
    if args.command == "gen":
        cfg["kind"] = args.kind
    if args.command in ("expm", "trotter", "closeness"):
        cfg["t"] = pick("t", "T", float, 1.0)
    if args.command == "trotter":
        cfg["n_grid"] = pick("n_grid", "N_GRID", _ints, list(DEFAULT_N_GRID))
    if args.command == "extract":
        cfg["dt1"] = pick("dt1", "DT1", float, DEFAULT_DT_PAIR[0])
        cfg["dt2"] = pick("dt2", "DT2", float, cfg["dt1"] / 2)
    if args.command in ("extract", "diagnose"):
        cfg["dt_grid"] = pick("dt_grid", "DT_GRID", _floats, list(DEFAULT_DT_GRID))
    if args.command == "closeness":
        cfg["eps_grid"] = pick("eps_grid", "EPS_GRID", _floats, list(DEFAULT_EPS_GRID))
    if cfg["model"] is not None and cfg["model"] not in MODELS:
        raise ParseError(f"unknown model {cfg['model']!r}")
    return cfg


def _load_generator(cfg) -> GkslGenerator:
    if cfg["model"] is not None:
        return MODELS[cfg["model"]](cfg["dim"])
    if not cfg["inputs"]:
        raise ParseError("a generator is required: pass --in PATH or --model NAME")
    obj = read_json(cfg["inputs"][0])
    if file_kind(obj) != "generator":
        raise ParseError(f"{cfg['inputs'][0]}: expected a generator file")
    return generator_from_json(obj)


def _load_channel(path):
    obj = read_json(path)
    if file_kind(obj) != "channel":
        raise ParseError(f"{path}: expected a channel file")
    return channel_from_json(obj)


def _check_dim(d: int) -> None:
    if not 2 <= d <= MAX_DIM:
        raise ParseError(f"unsupported dimension {d}; expected 2..{MAX_DIM}")


def cmd_gen(cfg) -> tuple[dict, bool]:
    d = cfg["dim"]
    _check_dim(d)
    rng = np.random.default_rng(cfg["seed"])
    if cfg["kind"] == "generator":
        return generator_to_json(random_generator(rng, d)), True
    if cfg["kind"] == "unital_channel":
        return channel_to_json(channel_at(random_generator(rng, d), 1.0), "super"), True
    n = int(rng.integers(1, d * d + 1))
    return channel_to_json(random_kraus(rng, d, n), "kraus"), True


def _channel_checks(s: np.ndarray, choi: np.ndarray, tol: float) -> dict:
    d = super_dim(s)
    spectrum = np.linalg.eigvalsh((choi + dag(choi)) / 2)[::-1]
    scale = max(float(np.max(np.abs(spectrum))), 1e-300)
    unital_res = float(np.linalg.norm(super_apply(s, np.eye(d)) - np.eye(d)))
    herm_res = float(np.linalg.norm(choi - dag(choi)))
    return {
        "dim": d,
        "choi_spectrum": spectrum.tolist(),
        "min_choi_eigenvalue": float(spectrum[-1]),
        "unitality_residual": unital_res,
        "unital": unital_res <= tol,
        "checks": {
            "cp": bool(spectrum[-1] >= -tol * scale),
            "hermiticity_preserving": herm_res <= 1e-12 * max(1.0, float(np.linalg.norm(choi))),
        },
    }


def _generator_checks(g: GkslGenerator, tol: float) -> dict:
    lsup = build_super(g)
    d = g.dim
    canonical = is_canonical(g)
    lhs, rhs = trace_identity_check(g if canonical else canonicalize(g))
    rng = np.random.default_rng(0)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    herm_pres = float(np.linalg.norm(super_apply(lsup, dag(a)) - dag(super_apply(lsup, a))))
    unit_res = float(np.linalg.norm(super_apply(lsup, np.eye(d))))
    scale = max(1.0, float(np.linalg.norm(lsup)))
    return {
        "dim": d,
        "n_jumps": g.n_jumps,
        "trace_identity": {"lhs": lhs, "rhs": rhs},
        "L_identity_residual": unit_res,
        "checks": {
            "H_hermitian": bool(np.linalg.norm(g.H - dag(g.H)) <= 1e-12 * max(1.0, float(np.linalg.norm(g.H)))),
            "traceless": canonical,
            "trace_identity": abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs)),
            "L_identity_zero": unit_res <= 1e-12 * scale,
            "hermiticity_preserving": herm_pres <= 1e-12 * scale * float(np.linalg.norm(a)),
        },
    }


def cmd_validate(cfg) -> tuple[dict, bool]:
    if not cfg["inputs"]:
        raise ParseError("validate needs --in PATH")
    path = cfg["inputs"][0]
    obj = read_json(path)
    if file_kind(obj) == "generator":
        report = {"kind": "generator", **_generator_checks(generator_from_json(obj), cfg["tol"])}
    else:
        rep, data = channel_from_json(obj)
        report = {"kind": "channel", "repr": rep,
                  **_channel_checks(channel_super(rep, data), channel_choi(rep, data), cfg["tol"])}
    return report, all(report["checks"].values())


def cmd_expm(cfg) -> tuple[dict, bool]:
    g = _load_generator(cfg)
    s = channel_at(g, cfg["t"])
    checks = _channel_checks(s, channel_choi("super", s), cfg["tol"])
    checks["checks"]["unital"] = checks["unital"]
    return {"channel": channel_to_json(s, "super"), **checks}, all(checks["checks"].values())


def cmd_trotter(cfg) -> tuple[dict, bool]:
    report = trotter_convergence(_load_generator(cfg), cfg["t"], cfg["n_grid"])
    return report.to_dict(), report.in_band


def cmd_extract(cfg) -> tuple[dict, bool]:
    g = _load_generator(cfg)
    result = extract_generator(lambda t: channel_at(g, t), (cfg["dt1"], cfg["dt2"]), cfg["dt_grid"])
    scale = float(np.linalg.norm(build_super(g)))
    rel = generator_distance(result.generator, g) / scale if scale > 0 else generator_distance(result.generator, g)
    diag = result.diagnostics.to_dict()
    checks = {
        "slope_m": diag["in_bands"]["slope_m"],
        "slope_y": diag["in_bands"]["slope_y"],
        "residuals": all(r <= 1e-10 * max(1.0, scale) for r in result.residuals),
        "round_trip": rel < 1e-4,
        "jump_count": result.generator.n_jumps <= g.dim ** 2 - 1,
    }
    report = {
        "generator": generator_to_json(result.generator),
        "diagnostics": diag,
        "residuals": result.residuals,
        "extrapolation_record": result.extrapolation_record,
        "relative_distance_to_input": rel,
        "checks": checks,
    }
    return report, all(checks.values())


def _kraus_of(rep, data):
    return data if rep == "kraus" else kraus_from_choi(channel_choi(rep, data))


def cmd_align(cfg) -> tuple[dict, bool]:
    if len(cfg["inputs"]) != 2:
        raise ParseError("align needs two channel files: --in REF --in TARGET")
    ref = _kraus_of(*_load_channel(cfg["inputs"][0]))
    tgt = _kraus_of(*_load_channel(cfg["inputs"][1]))
    result = align(ref, tgt)
    map_res = float(np.linalg.norm(super_from_kraus(result.aligned) - super_from_kraus(tgt)))
    scale = max(1.0, float(np.linalg.norm(super_from_kraus(tgt))))
    checks = {
        "not_worse": result.distance_after <= result.distance_before + 1e-12,
        "same_map": map_res < 1e-11 * scale,
    }
    report = {
        "mixing": operator_to_json(result.mixing),
        "aligned": channel_to_json(result.aligned, "kraus"),
        "distance_before": result.distance_before,
        "distance_after": result.distance_after,
        "map_residual": map_res,
        "checks": checks,
    }
    return report, all(checks.values())


def cmd_closeness(cfg) -> tuple[dict, bool]:
    if cfg["inputs"]:
        obj = read_json(cfg["inputs"][0])
        if file_kind(obj) == "generator":
            base = generator_from_json(obj)
        else:
            base = _kraus_of(*channel_from_json(obj))
    elif cfg["model"] is not None:
        base = MODELS[cfg["model"]](cfg["dim"])
    else:
        _check_dim(cfg["dim"])
        base = random_generator(np.random.default_rng(cfg["seed"]), cfg["dim"])
    table = closeness_experiment(base, cfg["eps_grid"], cfg["seed"], cfg["t"])
    checks = {
        "strictly_decreasing": table["strictly_decreasing"],
        "exponent": table["exponent"] is not None and table["exponent"] >= 0.4,
    }
    return {**table, "checks": checks}, all(checks.values())


def cmd_diagnose(cfg) -> tuple[dict, bool]:
    g = _load_generator(cfg)
    diag = order_diagnostics(lambda t: channel_at(g, t), cfg["dt_grid"]).to_dict()
    return {**diag, "checks": diag["in_bands"]}, all(diag["in_bands"].values())


COMMANDS = {
    "gen": cmd_gen,
    "validate": cmd_validate,
    "expm": cmd_expm,
    "trotter": cmd_trotter,
    "extract": cmd_extract,
    "align": cmd_align,
    "closeness": cmd_closeness,
    "diagnose": cmd_diagnose,
}

TOLERANCES = {
    "cp_eigenvalue_relative": "--tol",
    "extraction_unital": 1e-9,
    "kraus_truncation": 1e-10,
    "trotter_slope_band": [-1.15, -0.85],
    "slope_m_band": [0.45, 0.55],
    "slope_y_band": [0.85, 1.15],
    "closeness_min_exponent": 0.4,
}


def _closeness_csv(table: dict) -> str:
    buf = _io.StringIO()
    fields = ["eps", "channel_distance", "distance_before", "distance_after"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in table["rows"]:
        writer.writerow({k: repr(row[k]) for k in fields})
    return buf.getvalue()


def _emit(cfg, text: str) -> None:
    if cfg["out"]:
        write_text_atomic(cfg["out"], text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        body, passed = COMMANDS[cfg["command"]](cfg)
    except GkslError as exc:
        sys.stderr.write(f"gkslkit: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"gkslkit: {type(exc).__name__}: {exc}\n")
        return 2
    if cfg["command"] == "gen":
        _emit(cfg, dumps(body))
        return 0
    tolerances = dict(TOLERANCES, cp_eigenvalue_relative=cfg["tol"])
    failures = [name for name, ok in body.get("checks", {}).items() if not ok]
    report = {
        "tool": "gkslkit",
        "version": __version__,
        "config": cfg,
        "tolerances": tolerances,
        "passed": passed,
        "failures": failures,
        **body,
    }
    _emit(cfg, dumps(report))
    if cfg["command"] == "closeness" and cfg["out"]:
        root, _ = os.path.splitext(cfg["out"])
        write_text_atomic(root + ".csv", _closeness_csv(body))
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
