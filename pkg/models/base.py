#!/usr/bin/env python3
# models/base.py

"""
Pydantic models for runs, chain steps and verification reports
"""

from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, field_validator, model_validator


class GridSpec(BaseModel):
    start: float
    stop: float
    step: float

    @model_validator(mode="after")
    def check_bounds(self) -> "GridSpec":
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.start >= self.stop:
            raise ValueError(f"grid start {self.start} must be below stop {self.stop}")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """'start:stop:step', e.g. '-10:10:0.05'"""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        return cls(start=start, stop=stop, step=step)

    def points(self) -> np.ndarray:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)

    def label(self) -> str:
        return f"{self.start:g}:{self.stop:g}:{self.step:g}"


class RunConfig(BaseModel):
    command: str
    seed: Optional[str] = None
    chain_spec: Optional[str] = None
    grid: Optional[GridSpec] = None
    output: Optional[str] = None
    tolerance: float = 1e-8
    allow_singular: bool = False
    allow_deep: bool = False
    figure_variant: str = "default"
    example: Optional[str] = None
    params: Dict[str, float] = {}


class ChainStepSpec(BaseModel):
    """One line of a chain file: step i: f=<builder>, g=<builder>, lambda=<v>, mu=<v>"""
    index: int
    f: str
    g: str
    lam: float
    mu: float

    @field_validator("f", "g")
    @classmethod
    def known_builder(cls, value: str) -> str:
        name = value.split("(")[0].strip()
        if name not in SPINOR_BUILDERS:
            raise ValueError(f"unknown spinor builder {value!r}; known: {', '.join(SPINOR_BUILDERS)}")
        return value.strip()

    @model_validator(mode="after")
    def distinct_levels(self) -> "ChainStepSpec":
        if self.lam == self.mu:
            raise ValueError(f"step {self.index}: lambda and mu must differ")
        return self


SPINOR_BUILDERS = ("kernel", "cosh", "sinh", "decay", "grow")


class ResidualReport(BaseModel):
    check: str
    example: str = ""
    grid: str = ""
    max_residual: float
    location: Optional[float] = None
    tolerance: float
    passed: bool
    details: Dict[str, Any] = {}

    @classmethod
    def from_residuals(cls, check: str, xs, residuals, tolerance: float, example: str = "",
                       grid: str = "", **details: Any) -> "ResidualReport":
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        residuals = np.atleast_1d(np.asarray(residuals, dtype=float))
        if residuals.size == 0:
            worst, where = 0.0, None
        elif not np.all(np.isfinite(residuals)):
            worst = float("inf")
            where = float(xs[np.argmax(~np.isfinite(residuals))]) if xs.size == residuals.size else None
        else:
            i = int(np.argmax(residuals))
            worst = float(residuals[i])
            where = float(xs[i]) if xs.size == residuals.size else None
        return cls(check=check, example=example, grid=grid, max_residual=worst, location=where,
                   tolerance=tolerance, passed=worst <= tolerance, details=details)

    def line(self) -> str:
        """Machine-readable line: check,example,max_residual,tolerance,pass"""
        return (f"{self.check},{self.example},{self.max_residual:.12g},{self.tolerance:.12g},"
                f"{'pass' if self.passed else 'fail'}")


class ExampleInfo(BaseModel):
    name: str
    title: str
    representation: str
    interval: List[float]
    levels: List[float] = []
    parameters: Dict[str, float] = {}
