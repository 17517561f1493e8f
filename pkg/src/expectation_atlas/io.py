"""File formats and deterministic emission.

Operator-set JSON is the single ingestion point for the CLI:

    {
      "dim": N,
      "operators": [ [[ [re, im], ... N cols ], ... N rows ], ... n matrices ],
      "labels": ["H", "O", ...]          # optional
    }

Complex numbers are always [re, im] pairs.  CSV artifacts carry a header
row and 17-significant-digit numbers; all writes go through a temp file
and an atomic rename so no command leaves partial output behind.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

import numpy as np

from .linalg import OperatorSet, ValidationError

__all__ = [
    "load_operator_matrices",
    "load_operator_set",
    "load_marginal_pair",
    "complex_matrix_from_json",
    "complex_matrix_to_json",
    "fmt",
    "write_text",
    "write_json",
    "write_csv",
]


def fmt(x: float) -> str:
    """17-significant-digit decimal; round-trips any float exactly."""
    return f"{float(x):.17g}"


def complex_matrix_from_json(entry, name: str) -> np.ndarray:
    arr = np.asarray(entry, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise ValidationError(
            f"{name}: expected an N x N matrix of [re, im] pairs, got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def complex_matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None


def load_operator_matrices(path: str) -> tuple[list[np.ndarray], list[str], int]:
    """Raw matrices + labels from an operator-set file, before validation."""
    doc = _load_json(path)
    if "dim" not in doc or "operators" not in doc:
        raise ValidationError(f"{path}: operator-set file needs 'dim' and 'operators' keys")
    N = int(doc["dim"])
    mats = []
    for i, entry in enumerate(doc["operators"]):
        M = complex_matrix_from_json(entry, f"operator {i}")
        if M.shape != (N, N):
            raise ValidationError(f"operator {i} has shape {M.shape}, expected ({N}, {N})")
        mats.append(M)
    labels = doc.get("labels") or [f"O{i + 1}" for i in range(len(mats))]
    if len(labels) != len(mats):
        raise ValidationError(f"{path}: {len(labels)} labels for {len(mats)} operators")
    return mats, list(labels), N


def load_operator_set(path: str) -> OperatorSet:
    mats, labels, _ = load_operator_matrices(path)
    return OperatorSet.from_matrices(mats, labels=labels)


def load_marginal_pair(path: str) -> tuple[np.ndarray, np.ndarray]:
    doc = _load_json(path)
    if "rho_A" not in doc or "rho_B" not in doc:
        raise ValidationError(f"{path}: marginal file needs 'rho_A' and 'rho_B' keys")
    return (
        complex_matrix_from_json(doc["rho_A"], "rho_A"),
        complex_matrix_from_json(doc["rho_B"], "rho_B"),
    )


def write_text(text: str, output: str | None) -> None:
    """Emit to --output atomically, or to stdout when no path was given."""
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(obj, output: str | None) -> None:
    write_text(json.dumps(obj, indent=2), output)


def write_csv(header: list[str], rows, output: str | None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row))
    write_text("\n".join(lines), output)
