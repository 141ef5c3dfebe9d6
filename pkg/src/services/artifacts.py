"""
Reading and writing the files exchanged with the command line: model tables
as JSON, sweep tables and conditional log-probabilities as CSV, reports as JSON.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from ..core.exceptions import LlvkitError, SchemaMismatchError
from ..models.reports import Diagnostic
from ..models.tables import CondLogProb, ModelTable

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1

RHO_COLUMNS = ["rho", "d_kl_pq", "d_kl_qp", "d_llv", "m_cca", "max_d_svd"]
BOUND_COLUMNS = ["param", "epsilon", "lhs_emb", "lhs_unemb", "rhs", "holds", "vacuous"]
WIDTH_COLUMNS = ["c", "width", "n_retained", "mean_d_llv", "std_d_llv", "mean_max_d_svd", "std_max_d_svd"]


class ModelTableSchema(BaseModel):
    """On-disk form of a model table."""

    M: int = Field(..., ge=1, description="Representation dimension")
    input_ids: List[str]
    label_ids: List[str]
    embeddings: List[List[float]] = Field(..., description="One row per input id")
    unembeddings: List[List[float]] = Field(..., description="One row per label id")
    weights: Optional[List[float]] = Field(None, description="Empirical input weights; uniform when absent")

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelTableSchema":
        if len(self.embeddings) != len(self.input_ids):
            raise ValueError("embeddings must have one row per input id")
        if len(self.unembeddings) != len(self.label_ids):
            raise ValueError("unembeddings must have one row per label id")
        if any(len(row) != self.M for row in self.embeddings + self.unembeddings):
            raise ValueError(f"every embedding and unembedding row must have length M={self.M}")
        if self.weights is not None and len(self.weights) != len(self.input_ids):
            raise ValueError("weights must have one entry per input id")
        return self

    def to_table(self) -> ModelTable:
        return ModelTable(
            np.asarray(self.embeddings, dtype=float),
            np.asarray(self.unembeddings, dtype=float),
            tuple(self.input_ids),
            tuple(self.label_ids),
            None if self.weights is None else np.asarray(self.weights, dtype=float),
        )

    @classmethod
    def from_table(cls, model: ModelTable) -> "ModelTableSchema":
        return cls(
            M=model.dim,
            input_ids=list(model.input_ids),
            label_ids=list(model.label_ids),
            embeddings=model.embeddings.tolist(),
            unembeddings=model.unembeddings.tolist(),
            weights=None if model.input_weights is None else model.input_weights.tolist(),
        )


def _schema_diagnostics(error: ValidationError) -> List[Diagnostic]:
    return [
        Diagnostic(
            level="error",
            category="schema",
            message=item["msg"],
            field=".".join(str(part) for part in item["loc"]) or None,
        )
        for item in error.errors()
    ]


def load_model_table(path: Path) -> ModelTable:
    """
    Load and validate a model JSON file.

    Raises:
        SchemaMismatchError: unreadable JSON or any schema violation, with one
            diagnostic per offending field
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaMismatchError(
            f"{path} is not valid JSON: {exc}",
            [Diagnostic(level="error", category="schema", message=str(exc))],
        ) from exc
    try:
        schema = ModelTableSchema.model_validate(raw)
    except ValidationError as exc:
        diagnostics = _schema_diagnostics(exc)
        raise SchemaMismatchError(f"{path} does not match the model schema", diagnostics) from exc
    try:
        return schema.to_table()
    except LlvkitError as exc:
        raise SchemaMismatchError(
            f"{path}: {exc}", [Diagnostic(level="error", category="schema", message=str(exc))]
        ) from exc


def save_model_table(model: ModelTable, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(ModelTableSchema.from_table(model).model_dump_json(indent=2))
    logger.info(f"Wrote model table ({model.n} inputs, {model.k} labels) to {path}")
    return path


def format_cell(value: Any) -> str:
    """Deterministic text for a CSV cell; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """CSV with a schema-version comment line, then the header, then the rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(f"# schema_version={CSV_SCHEMA_VERSION}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([format_cell(value) for value in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def write_records(path: Path, columns: Sequence[str], records: Iterable[BaseModel]) -> Path:
    """Write pydantic records, one row each, taking the named fields in column order."""
    return write_csv(path, columns, ([getattr(record, name) for name in columns] for record in records))


def read_csv(path: Path) -> List[dict]:
    """Rows of a file written by write_csv, as dictionaries of strings."""
    with Path(path).open(newline="") as handle:
        first = handle.readline()
        if not first.startswith("# schema_version="):
            raise SchemaMismatchError(
                f"{path} lacks the schema-version header",
                [Diagnostic(level="error", category="schema", message="missing schema_version line")],
            )
        return list(csv.DictReader(handle))


def write_cond_log_probs(path: Path, model: ModelTable, logp: CondLogProb) -> Path:
    """Long-format export with columns input_id, label_id, logp."""
    rows = (
        (input_id, label_id, float(logp.logp[i, j]))
        for i, input_id in enumerate(model.input_ids)
        for j, label_id in enumerate(model.label_ids)
    )
    return write_csv(path, ["input_id", "label_id", "logp"], rows)


def write_json_report(path: Path, report: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2, by_alias=True))
    logger.info(f"Wrote report to {path}")
    return path
