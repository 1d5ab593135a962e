"""File formats: matrices, function literals, witnesses, deterministic output."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .coe import CoeWitness, substitution
from .locfun import LocallyConstantFunction, from_json
from .sft import TransitionMatrix, validate

SIG_DIGITS = 15


def parse_matrix(text: str) -> TransitionMatrix:
    """Plain form (``N`` then ``N`` rows of 0/1 digits) or JSON.

    JSON is either ``{"n": N, "rows": [...]}`` or a bare list of rows.
    """
    stripped = text.strip()
    if stripped.startswith(("{", "[")):
        data = json.loads(stripped)
        return matrix_from_json(data)
    lines = [ln.split() for ln in stripped.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        n = int(lines[0][0])
        rows = [[int(v) for v in ln] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed matrix file: {exc}") from None
    if len(rows) != n:
        raise ValueError(f"header says N = {n} but found {len(rows)} rows")
    return validate(rows)


def matrix_from_json(data) -> TransitionMatrix:
    if isinstance(data, list):
        return validate(data)
    try:
        rows = data["rows"]
    except (KeyError, TypeError):
        raise ValueError("matrix object needs a 'rows' entry") from None
    if "n" in data and int(data["n"]) != len(rows):
        raise ValueError("'n' does not match the number of rows")
    return validate(rows)


def matrix_to_json(m: TransitionMatrix) -> dict:
    return {"n": m.size, "rows": [list(r) for r in m.rows]}


def matrix_to_text(m: TransitionMatrix) -> str:
    return "\n".join([str(m.size)] + [" ".join(str(v) for v in r) for r in m.rows]) + "\n"


def read_matrix(path) -> TransitionMatrix:
    return parse_matrix(Path(path).read_text())


def read_function(m: TransitionMatrix, path) -> LocallyConstantFunction:
    return from_json(m, json.loads(Path(path).read_text()))


def witness_to_json(w: CoeWitness) -> dict:
    code = w.code
    return {
        "source": matrix_to_json(code.source),
        "target": matrix_to_json(code.target),
        "tau": {str(a): code.target.format_word(img) for a, img in enumerate(code.tau, start=1)},
        "k1": w.k1.to_json(),
        "l1": w.l1.to_json(),
        "k2": w.k2.to_json(),
        "l2": w.l2.to_json(),
    }


def witness_from_json(data) -> CoeWitness:
    try:
        source = matrix_from_json(data["source"])
        target = matrix_from_json(data["target"])
        code = substitution(source, target, data["tau"])
        return CoeWitness(
            code,
            k1=from_json(source, data["k1"]),
            l1=from_json(source, data["l1"]),
            k2=from_json(target, data["k2"]),
            l2=from_json(target, data["l2"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed witness file: {exc}") from None


def read_witness(path) -> CoeWitness:
    return witness_from_json(json.loads(Path(path).read_text()))


def round_floats(obj: Any) -> Any:
    """Round every float to 15 significant digits (shortest repr after rounding)."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed float precision."""
    return json.dumps(round_floats(obj), sort_keys=True, indent=2) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.{SIG_DIGITS}g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()
