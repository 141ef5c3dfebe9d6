"""
Resolved parameter records for each command-line subcommand.

Each record is dumped into the JSON reports it produces so a run can be
repeated from its output alone.
"""
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

Profile = Literal["ci", "full"]


def _check_output(path: Path) -> Path:
    if path.exists() and path.is_dir():
        raise ValueError(f"output path {path} is a directory")
    return path


def _check_input(path: Path) -> Path:
    if not path.is_file():
        raise ValueError(f"input file {path} does not exist")
    return path


class OutputConfig(BaseModel):
    out: Path = Field(..., description="File written by the command")
    seed: int = Field(0, description="Seed for every random draw of the run")

    @field_validator("out")
    @classmethod
    def _writable(cls, value: Path) -> Path:
        return _check_output(value)


class Table1Config(OutputConfig):
    rho: List[float] = Field(default_factory=lambda: [3.0, 6.0, 9.0, 12.0, 15.0, 18.0])
    points_per_label: int = Field(40, ge=1)
    lam: Optional[float] = Field(None, gt=0.0)
    n_input_sets: Optional[int] = Field(None, ge=1)

    @field_validator("rho")
    @classmethod
    def _non_empty(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("at least one rho value is required")
        return values


class BoundSweepConfig(OutputConfig):
    sigmas: List[float] = Field(default_factory=lambda: [0.02 * i for i in range(10)])
    k: int = Field(6, ge=4, description="Labels of the reference circle model")
    rho: float = Field(4.0, gt=0.0)
    lam: Optional[float] = Field(None, gt=0.0)
    n_column_resamples: int = Field(0, ge=0)

    @field_validator("sigmas")
    @classmethod
    def _non_negative(cls, values: List[float]) -> List[float]:
        if not values or any(s < 0 for s in values):
            raise ValueError("sigmas must be a non-empty list of nonnegative values")
        return values


class WidthSweepConfig(OutputConfig):
    c: int = Field(4, ge=4)
    profile: Profile = "ci"
    widths: Optional[List[int]] = None
    n_seeds: Optional[int] = Field(None, ge=1)
    steps: Optional[int] = Field(None, gt=0)
    lam: Optional[float] = Field(None, gt=0.0)
    norm_constraint: Literal["none", "emb20", "unemb20", "both20"] = "none"
    min_retained: int = Field(5, ge=2)
    report: Optional[Path] = Field(None, description="Optional JSON report with diagnostics and permuted pairs")

    @field_validator("c")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"class count must be even, got {value}")
        return value


class CompareConfig(OutputConfig):
    model_a: Path
    model_b: Path
    lam: Optional[float] = Field(None, gt=0.0)
    n_column_resamples: int = Field(0, ge=0)

    @field_validator("model_a", "model_b")
    @classmethod
    def _readable(cls, value: Path) -> Path:
        return _check_input(value)


class GenDataConfig(OutputConfig):
    c: int = Field(4, ge=2)
    n: int = Field(20000, ge=1)
    sigma: float = Field(3.0, gt=0.0)


class TrainRunConfig(OutputConfig):
    data: Path
    width: int = 64
    steps: int = Field(3000, gt=0)
    lr: float = Field(1e-3, ge=0.0)
    leaky_slope: float = Field(0.01, ge=0.0)
    norm_constraint: Literal["none", "emb20", "unemb20", "both20"] = "none"

    @field_validator("data")
    @classmethod
    def _readable(cls, value: Path) -> Path:
        return _check_input(value)


class ConstructConfig(OutputConfig):
    """Writes <out>_a.json and <out>_b.json."""

    construction: Literal["circle", "table1", "theorem"] = "circle"
    rho: float = Field(18.0, gt=0.0)
    k: Optional[int] = Field(None, ge=3)
    dim: int = Field(2, ge=2)
    permutation: Literal["identity", "circle_swap", "decorrelating"] = "decorrelating"
    points_per_label: int = Field(40, ge=1)

    @model_validator(mode="after")
    def _circle_is_planar(self) -> "ConstructConfig":
        if self.construction != "theorem" and self.dim != 2:
            raise ValueError("the circle construction is two-dimensional")
        return self

    def resolved_k(self) -> int:
        if self.k is not None:
            return self.k
        return self.dim + 2 if self.construction == "theorem" else 5
