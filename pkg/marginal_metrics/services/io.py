from __future__ import annotations

import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
from pydantic import ValidationError
from sqlmodel import SQLModel

from marginal_metrics.models import MeasureFile, RectComponent, RectMixtureFile, StepFunctionFile
from marginal_metrics.services.inequalities import MonotoneStep
from marginal_metrics.services.measure import DiscreteMeasure, MeasureError, make_measure
from marginal_metrics.services.transform import RectMixture

logger = logging.getLogger(__name__)


class InputFileError(ValueError):
    """An input file is missing, unparseable, or fails schema validation."""

    def __init__(self, path: Path | str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = Path(path)


def _read_json(path: Path) -> Any:
    if not path.exists():
        raise InputFileError(path, "file not found")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputFileError(path, f"malformed JSON ({e.msg} at line {e.lineno})") from None


def _validate(model: type[SQLModel], payload: Any, path: Path) -> Any:
    try:
        return model.model_validate(payload)  # type: ignore[attr-defined]
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "<root>"
        raise InputFileError(path, f"{where}: {first.get('msg', 'invalid value')}") from None


def measure_from_file(spec: MeasureFile, path: Path | str = "<payload>") -> DiscreteMeasure:
    dims = {len(a) for a in spec.atoms}
    if len(dims) > 1:
        raise InputFileError(path, f"atoms have mixed dimensions {sorted(dims)}")
    if spec.dim is not None and dims and spec.dim not in dims:
        raise InputFileError(path, f"declared dim {spec.dim} but atoms have dimension {dims.pop()}")
    try:
        return make_measure(spec.atoms, spec.weights)
    except MeasureError as e:
        raise InputFileError(path, str(e)) from None


def _load_measure_csv(path: Path) -> DiscreteMeasure:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise InputFileError(path, "CSV needs a header row and at least one atom")
    header = [cell.strip().lower() for cell in rows[0]]
    has_weight = header[-1] in {"weight", "w", "p", "prob", "probability"}
    try:
        table = np.array([[float(cell) for cell in row] for row in rows[1:]], dtype=float)
    except ValueError as e:
        raise InputFileError(path, f"non-numeric cell ({e})") from None
    if table.ndim != 2 or table.shape[1] != len(header):
        raise InputFileError(path, f"every row needs {len(header)} columns")
    if has_weight and table.shape[1] < 2:
        raise InputFileError(path, "a weight column needs at least one coordinate column")
    atoms = table[:, :-1] if has_weight else table
    weights = table[:, -1] if has_weight else None
    return measure_from_file(MeasureFile(atoms=atoms.tolist(), weights=None if weights is None else weights.tolist()), path)


def load_measure(path: Path | str) -> DiscreteMeasure:
    """Read a measure from JSON ({"dim", "atoms", "weights"}) or CSV (header, coordinates, optional weight)."""

    path = Path(path).expanduser()
    if path.suffix.lower() == ".csv":
        if not path.exists():
            raise InputFileError(path, "file not found")
        measure = _load_measure_csv(path)
    else:
        payload = _read_json(path)
        measure = measure_from_file(_validate(MeasureFile, payload, path), path)
    logger.debug("loaded %r from %s", measure, path)
    return measure


def load_step_function(path: Path | str) -> MonotoneStep:
    path = Path(path).expanduser()
    spec: StepFunctionFile = _validate(StepFunctionFile, _read_json(path), path)
    try:
        if spec.identity:
            return MonotoneStep.make_identity()
        return MonotoneStep(breakpoints=np.asarray(spec.breakpoints), values=np.asarray(spec.values))
    except ValueError as e:
        raise InputFileError(path, str(e)) from None


def load_rect_mixture(path: Path | str) -> RectMixture:
    path = Path(path).expanduser()
    spec: RectMixtureFile = _validate(RectMixtureFile, _read_json(path), path)
    try:
        return RectMixture(
            lower=np.array([c.lower for c in spec.components], dtype=float),
            upper=np.array([c.upper for c in spec.components], dtype=float),
            weights=np.array([c.weight for c in spec.components], dtype=float),
        )
    except ValueError as e:
        raise InputFileError(path, str(e)) from None


def measure_payload(p: DiscreteMeasure) -> dict[str, Any]:
    return MeasureFile(dim=p.dim, atoms=p.atoms.tolist(), weights=p.weights.tolist()).model_dump()


def rect_mixture_payload(c: RectMixture) -> dict[str, Any]:
    components = [
        RectComponent(lower=c.lower[i].tolist(), upper=c.upper[i].tolist(), weight=float(c.weights[i]))
        for i in range(c.size)
    ]
    return RectMixtureFile(dim=c.dim, components=components).model_dump()


def dumps_json(payload: Any) -> str:
    # json writes floats with repr, which round-trips every double exactly.
    return json.dumps(payload, indent=2, allow_nan=False)


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def dumps_csv(rows: Iterable[SQLModel], columns: Optional[list[str]] = None) -> str:
    records = [row.model_dump() for row in rows]
    if columns is None:
        columns = list(records[0].keys()) if records else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([_format_cell(record[c]) for c in columns])
    return buffer.getvalue()


def emit(text: str, out: Optional[str | Path] = None) -> None:
    """Write a finished report to `out`, or to standard output when no path is given."""

    if out:
        target = Path(out).expanduser()
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        logger.info("wrote %s", target)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        sys.stdout.flush()
