"""CSV/JSON readers and atomic writers used by the command line."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .frame import DesignParams, to_fraction, validate_params
from .simulation import pips_probabilities


class IoError(OSError):
    """Unreadable or unwritable file."""

    def to_dict(self) -> dict:
        return {"error": "IoError", "message": str(self)}


@dataclass(frozen=True)
class PopulationInput:
    labels: tuple  # every unit id, file order
    params: DesignParams | None  # design over the non-certainty units
    sampled: tuple  # ids covered by ``params``, file order
    certainty: tuple  # ids taken with probability 1

    def full_probs(self) -> list:
        one = Fraction(1) if self.params is None or self.params.exact else 1.0
        pi = dict(zip(self.sampled, self.params.probs)) if self.params else {}
        return [pi.get(u, one) for u in self.labels]


def _rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if header is None:
        raise ValidationError(f"{path}: empty file")
    return [h.strip() for h in header], [[c.strip() for c in r] for r in rows]


def read_population(path, mode: str = "float", n: int | None = None) -> PopulationInput:
    """Read ``unit_id,prob`` or ``unit_id,size``.

    Probabilities are kept as their decimal strings in exact mode.  A size
    column needs ``n`` and goes through the pi-ps rule; units reaching
    probability 1 are reported as certainty units.
    """
    header, rows = _rows(path)
    if len(header) < 2 or header[0] != "unit_id" or header[1] not in ("prob", "size"):
        raise ValidationError(f"{path}: header must be 'unit_id,prob' or 'unit_id,size'")
    labels = tuple(r[0] for r in rows)
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{path}: duplicate unit_id")
    values = [r[1] for r in rows]
    if header[1] == "prob":
        return PopulationInput(labels, validate_params(values, mode), labels, ())
    if n is None:
        raise ValidationError("a size column needs --n")
    if mode == "exact":
        raise ValidationError("size input is supported in float mode only")
    try:
        sizes = [float(v) for v in values]
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    pips = pips_probabilities(sizes, n)
    certainty = tuple(labels[k - 1] for k in pips.certainty)
    sampled = tuple(labels[k - 1] for k in pips.sampled)
    return PopulationInput(labels, pips.params, sampled, certainty)


def read_ids(path) -> list[str]:
    header, rows = _rows(path)
    if header[:1] != ["unit_id"]:
        raise ValidationError(f"{path}: header must start with 'unit_id'")
    return [r[0] for r in rows]


def read_values(path, mode: str = "float") -> dict:
    """``unit_id,<value>`` -> ``{id: value}``."""
    header, rows = _rows(path)
    if len(header) < 2 or header[0] != "unit_id":
        raise ValidationError(f"{path}: header must be 'unit_id,<value>'")
    conv = to_fraction if mode == "exact" else float
    try:
        return {r[0]: conv(r[1]) for r in rows}
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def read_matrix(path, mode: str = "float") -> tuple[list[str], np.ndarray]:
    """Square matrix CSV with a header of unit ids and ids in the first column."""
    header, rows = _rows(path)
    labels = header[1:]
    if len(rows) != len(labels):
        raise DimensionMismatch(len(labels), len(rows), "matrix rows")
    conv = to_fraction if mode == "exact" else (lambda s: float(Fraction(s)))
    M = np.empty((len(labels), len(labels)), dtype=object if mode == "exact" else np.float64)
    for i, r in enumerate(rows):
        if r[0] != labels[i] or len(r) != len(labels) + 1:
            raise ValidationError(f"{path}: row {i + 1} does not match the header")
        try:
            M[i] = [conv(c) for c in r[1:]]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{path}: {exc}") from exc
    return labels, M


def fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic(path, write) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> None:
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])

    _atomic(path, write)


def write_json(path, obj) -> None:
    _atomic(path, lambda fh: (json.dump(obj, fh, indent=2, sort_keys=False), fh.write("\n")))


def sidecar_path(path) -> Path:
    return Path(f"{path}.json")
