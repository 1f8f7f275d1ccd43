"""JSON file formats for operators, channels and generators.

Operator: ``{"dim": d, "re": [[...]], "im": [[...]]}`` (row-major).
Channel: ``{"dim": d, "repr": "kraus" | "choi" | "super", "payload": ...}``
where a Kraus payload is a list of operators and Choi/super payloads are
operator objects of dimension ``d^2``. Superoperators use column stacking.
Generator: ``{"dim": d, "H": operator, "jumps": [operator, ...]}``.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .channels import choi_from_super, super_from_choi, super_from_kraus
from .errors import ParseError
from .gksl import GkslGenerator

REPRS = ("kraus", "choi", "super")


def operator_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def operator_from_json(obj, where: str = "operator") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object with dim/re/im")
    for key in ("dim", "re", "im"):
        if key not in obj:
            raise ParseError(f"{where}: missing field '{key}'")
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}.re/im: {exc}") from None
    d = obj["dim"]
    if not isinstance(d, int) or d < 1 or re.shape != (d, d) or im.shape != (d, d):
        raise ParseError(f"{where}: dim={d!r} does not match re {re.shape} / im {im.shape}")
    a = re + 1j * im
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{where}: non-finite entries")
    return a


def channel_to_json(payload, repr: str) -> dict:
    if repr == "kraus":
        ops = np.asarray(payload, dtype=complex)
        return {"dim": int(ops.shape[1]), "repr": "kraus", "payload": [operator_to_json(m) for m in ops]}
    if repr not in REPRS:
        raise ValueError(f"unknown channel representation {repr!r}")
    m = np.asarray(payload, dtype=complex)
    return {"dim": int(round(np.sqrt(m.shape[0]))), "repr": repr, "payload": operator_to_json(m)}


def channel_from_json(obj) -> tuple[str, np.ndarray]:
    """Return ``(repr, data)`` with data the Kraus stack or the d^2 x d^2 matrix."""
    if not isinstance(obj, dict):
        raise ParseError("channel: expected a JSON object")
    for key in ("dim", "repr", "payload"):
        if key not in obj:
            raise ParseError(f"channel: missing field '{key}'")
    rep, d = obj["repr"], obj["dim"]
    if rep not in REPRS:
        raise ParseError(f"channel.repr: expected one of {REPRS}, got {rep!r}")
    if rep == "kraus":
        if not isinstance(obj["payload"], list) or not obj["payload"]:
            raise ParseError("channel.payload: expected a non-empty list of operators")
        ops = [operator_from_json(o, f"channel.payload[{i}]") for i, o in enumerate(obj["payload"])]
        if any(o.shape != (d, d) for o in ops):
            raise ParseError(f"channel.payload: operators must be {d}x{d}")
        return rep, np.asarray(ops)
    m = operator_from_json(obj["payload"], "channel.payload")
    if m.shape != (d * d, d * d):
        raise ParseError(f"channel.payload: expected {d * d}x{d * d}, got {m.shape}")
    return rep, m


def channel_super(rep: str, data: np.ndarray) -> np.ndarray:
    if rep == "kraus":
        return super_from_kraus(data)
    if rep == "choi":
        return super_from_choi(data)
    return np.asarray(data, dtype=complex)


def channel_choi(rep: str, data: np.ndarray) -> np.ndarray:
    if rep == "choi":
        return np.asarray(data, dtype=complex)
    return choi_from_super(channel_super(rep, data))


def generator_to_json(g: GkslGenerator) -> dict:
    return {"dim": g.dim, "H": operator_to_json(g.H), "jumps": [operator_to_json(v) for v in g.jumps]}


def generator_from_json(obj) -> GkslGenerator:
    if not isinstance(obj, dict):
        raise ParseError("generator: expected a JSON object")
    for key in ("dim", "H", "jumps"):
        if key not in obj:
            raise ParseError(f"generator: missing field '{key}'")
    d = obj["dim"]
    h = operator_from_json(obj["H"], "generator.H")
    if h.shape != (d, d):
        raise ParseError(f"generator.H: expected {d}x{d}")
    if not isinstance(obj["jumps"], list):
        raise ParseError("generator.jumps: expected a list")
    jumps = [operator_from_json(v, f"generator.jumps[{i}]") for i, v in enumerate(obj["jumps"])]
    if any(v.shape != (d, d) for v in jumps):
        raise ParseError(f"generator.jumps: operators must be {d}x{d}")
    try:
        return GkslGenerator(h, np.asarray(jumps).reshape(-1, d, d))
    except ValueError as exc:
        raise ParseError(f"generator: {exc}") from None


def file_kind(obj) -> str:
    if isinstance(obj, dict) and "repr" in obj:
        return "channel"
    if isinstance(obj, dict) and "H" in obj:
        return "generator"
    raise ParseError("unrecognised file: expected a channel (repr) or generator (H) object")


def read_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    write_text_atomic(path, dumps(obj))
