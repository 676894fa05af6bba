#!/usr/bin/env python3
# dirac/table_generator.py
"""
CSV emission for potentials, mapped solutions, Schrodinger pairs and figure data.
"""

import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
import structlog

import config
from dirac.potential import Potential
from dirac.reduction import SchrodingerPair
from dirac.spinor import EigenSpinor

logger = structlog.get_logger(__name__)


def potential_table(V: Potential, xs: np.ndarray) -> pd.DataFrame:
    """x, p, q of a canonical potential"""
    with np.errstate(all="ignore"):
        return pd.DataFrame({"x": xs, "p": V.p(xs), "q": V.q(xs)})


def spinor_table(spinors: Sequence[EigenSpinor], xs: np.ndarray) -> pd.DataFrame:
    """x, then psi1/psi2 columns per spinor"""
    columns: Dict[str, np.ndarray] = {"x": xs}
    for i, psi in enumerate(spinors, start=1):
        with np.errstate(all="ignore"):
            values = psi(xs)
        columns[f"psi{i}_1"] = values[:, 0]
        columns[f"psi{i}_2"] = values[:, 1]
    return pd.DataFrame(columns)


def pair_table(pairs: Dict[str, SchrodingerPair], xs: np.ndarray) -> pd.DataFrame:
    columns: Dict[str, np.ndarray] = {"x": xs}
    for label, pair in pairs.items():
        columns[f"{label}_U_plus"] = pair.U_plus(xs)
        columns[f"{label}_U_minus"] = pair.U_minus(xs)
    return pd.DataFrame(columns)


def csv_text(frame: pd.DataFrame) -> str:
    """Header row, 12 significant digits, LF newlines"""
    return frame.to_csv(index=False, float_format=config.CSV_CONFIG['float_format'],
                        lineterminator=config.CSV_CONFIG['line_terminator'])


def create_csv_table(frame: pd.DataFrame, output_path: Optional[Union[str, Path]] = None) -> None:
    """
    Write the frame to output_path, or to stdout when no path is given.
    """
    if frame.empty:
        logger.warning("No data rows to write to CSV")
    text = csv_text(frame)
    if output_path is None:
        sys.stdout.write(text)
        return
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', newline='', encoding='utf-8') as handle:
        handle.write(text)
    logger.info("✓ CSV table created", path=str(output_path), rows=len(frame))
