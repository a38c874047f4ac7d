"""JSON schemas for channels, states and reports.

Parsing is strict: every failure names the offending field.  Serialization
is deterministic (fixed key order, plain Python scalars) so identical
inputs produce byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .channels import (
    Alphabet,
    ClassicalChannel,
    make_constant,
    make_erasure,
    make_generalized_erasure,
    make_identity,
)
from .errors import ValidationError
from .quantum import DensityMatrix, ErasureVerdict, KrausChannel

SHORTHAND_TYPES = ("identity", "constant", "erasure", "generalized_erasure")


def _require(data: dict, field: str, what: str) -> Any:
    if field not in data:
        raise ValidationError(f"{what} is missing required field {field!r}")
    return data[field]


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# classical channels
# ---------------------------------------------------------------------------

def _matrix_from_data(raw: Any, what: str) -> np.ndarray:
    if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
        raise ValidationError(f"field 'matrix' of {what} must be a list of rows")
    lengths = {len(row) for row in raw}
    if len(lengths) > 1:
        raise ValidationError(f"field 'matrix' of {what} has rows of unequal length")
    try:
        return np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"field 'matrix' of {what} must contain numbers") from None


def _classical_from_data(data: dict) -> ClassicalChannel:
    inp = _require(data, "input_labels", "channel file")
    out = _require(data, "output_labels", "channel file")
    matrix = _matrix_from_data(_require(data, "matrix", "channel file"), "channel file")
    return ClassicalChannel(Alphabet(tuple(inp)), Alphabet(tuple(out)), matrix)


def _shorthand_from_data(data: dict) -> ClassicalChannel:
    kind = data["type"]
    if kind == "identity":
        return make_identity(int(_require(data, "n", "identity shorthand")))
    if kind == "constant":
        n = int(_require(data, "n", "constant shorthand"))
        return make_constant(n, data.get("masses"), data.get("output_labels"))
    if kind == "erasure":
        return make_erasure(int(_require(data, "r", "erasure shorthand")),
                            float(_require(data, "eta", "erasure shorthand")))
    if kind == "generalized_erasure":
        blocks = _require(data, "blocks", "generalized erasure shorthand")
        etas = _require(data, "etas", "generalized erasure shorthand")
        return make_generalized_erasure(blocks, [float(e) for e in etas])
    raise ValidationError(f"unknown channel type {kind!r}, expected one of {SHORTHAND_TYPES}")


def parse_channel_data(data: Any) -> ClassicalChannel | KrausChannel:
    """Channel from decoded JSON: full matrix, shorthand, or Kraus form."""
    if not isinstance(data, dict):
        raise ValidationError("channel file must contain a JSON object")
    if "kraus" in data:
        return parse_kraus_data(data)
    if "type" in data:
        return _shorthand_from_data(data)
    return _classical_from_data(data)


def parse_channel_file(path: str | Path) -> ClassicalChannel | KrausChannel:
    return parse_channel_data(load_json(path))


def channel_to_data(channel: ClassicalChannel) -> dict:
    return {
        "input_labels": list(channel.input.labels),
        "output_labels": list(channel.output.labels),
        "matrix": [[float(v) for v in row] for row in channel.matrix],
    }


# ---------------------------------------------------------------------------
# complex matrices, states, Kraus channels
# ---------------------------------------------------------------------------

def complex_matrix_to_data(m: np.ndarray) -> dict:
    return {
        "re": [[float(v) for v in row] for row in np.real(m)],
        "im": [[float(v) for v in row] for row in np.imag(m)],
    }


def complex_matrix_from_data(data: Any, what: str) -> np.ndarray:
    if not isinstance(data, dict):
        raise ValidationError(f"{what} must be an object with 're' and 'im' parts")
    re = _matrix_from_data(_require(data, "re", what), what)
    im = _matrix_from_data(_require(data, "im", what), what)
    if re.shape != im.shape:
        raise ValidationError(f"{what} has mismatched 're' shape {re.shape} and 'im' shape {im.shape}")
    return re + 1j * im


def parse_density_matrix_data(data: Any) -> DensityMatrix:
    return DensityMatrix(complex_matrix_from_data(data, "density matrix"))


def parse_density_matrix_file(path: str | Path) -> DensityMatrix:
    return parse_density_matrix_data(load_json(path))


def density_matrix_to_data(rho: DensityMatrix) -> dict:
    return complex_matrix_to_data(rho.matrix)


def parse_kraus_data(data: dict) -> KrausChannel:
    in_dim = int(_require(data, "in_dim", "Kraus channel file"))
    out_dim = int(_require(data, "out_dim", "Kraus channel file"))
    raw_ops = _require(data, "kraus", "Kraus channel file")
    if not isinstance(raw_ops, list) or len(raw_ops) == 0:
        raise ValidationError("field 'kraus' must be a nonempty list of operators")
    ops = []
    for i, raw in enumerate(raw_ops):
        op = complex_matrix_from_data(raw, f"Kraus operator {i}")
        if op.shape != (out_dim, in_dim):
            raise ValidationError(
                f"Kraus operator {i} has shape {op.shape}, expected ({out_dim}, {in_dim})"
            )
        ops.append(op)
    return KrausChannel(tuple(ops))


def parse_kraus_file(path: str | Path) -> KrausChannel:
    data = load_json(path)
    if not isinstance(data, dict):
        raise ValidationError("Kraus channel file must contain a JSON object")
    return parse_kraus_data(data)


def kraus_to_data(channel: KrausChannel) -> dict:
    return {
        "in_dim": channel.in_dim,
        "out_dim": channel.out_dim,
        "kraus": [complex_matrix_to_data(k) for k in channel.kraus],
    }


def verdict_to_data(verdict: ErasureVerdict) -> dict:
    return {
        "dim": verdict.dim,
        "eta": verdict.eta,
        "epsilon": verdict.epsilon,
        "threshold": verdict.threshold,
        "compressible": verdict.compressible,
        "gamma": verdict.gamma,
        "seed": verdict.seed,
        "probe_count": verdict.probe_count,
        "min_fidelity": verdict.min_fidelity,
        "witness": density_matrix_to_data(verdict.witness),
        "rejections": [
            {"kind": r.kind, "kernel_dim": r.kernel_dim, "witness_fidelity": r.witness_fidelity}
            for r in verdict.rejections
        ],
    }
