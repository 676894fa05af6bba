#!/usr/bin/env python3
"""
Configuration file for the Dirac Darboux toolkit
Centralizes all numerical tolerances, paths and logging settings
"""

import logging
import os
import sys
from pathlib import Path

import structlog
from dotenv import load_dotenv

load_dotenv()

# Base paths
BASE_DIR = Path(__file__).parent
OUTPUT_DIR = BASE_DIR / "output"

# Logging configuration
LOGGING_LEVEL = os.getenv('LOGGING_LEVEL', 'INFO')
LOG_FORMAT = os.getenv('DARBOUX_LOG_FORMAT', 'console')

# Chain and numerics limits (from environment)
MAX_CHAIN_DEPTH = int(os.getenv('DARBOUX_MAX_DEPTH', 4))
SINGULAR_EPS = float(os.getenv('DARBOUX_SINGULAR_EPS', 1e-12))
QUAD_TOL = float(os.getenv('DARBOUX_QUAD_TOL', 1e-10))
QUAD_LIMIT = int(os.getenv('DARBOUX_QUAD_LIMIT', 2 ** 20))
R_MIN = float(os.getenv('DARBOUX_R_MIN', 1e-6))

NUMERICS_CONFIG = {
    'fd_step': 1e-4,
    'node_scan_points': 512,
    'node_xtol': 1e-10,
    'node_touch_ratio': 1e-8,
    'probe_points': 33,
    'probe_halfwidth': 10.0,
    'pivot_ratio_warning': 1e10,
    'max_symbolic_order': 12,
    'cumulative_nodes': 64,
    'constant_tolerance': 1e-12,
    'route_tolerance': 1e-9,
}

VERIFY_CONFIG = {
    'grid_points': 201,
    'guard_band': 1e-6,
    'tail_fraction': 0.2,
    'r_squared_min': 0.99,
    'decay_rate_floor': 1e-3,
    'default_tolerance': 1e-8,
}

CSV_CONFIG = {
    'significant_digits': 12,
    'float_format': '%.12g',
    'line_terminator': '\n',
}

CLI_COMMANDS = {
    'list': 'List the example catalog and seed potentials',
    'transform': 'Run one Darboux step and write the partner potential',
    'chain': 'Run an n-step chain through the determinant formulas',
    'verify': 'Run the residual suites and print report lines',
    'figure': 'Emit the tabulated curves of one figure',
    'reduce': 'Emit the Schrodinger SUSY pair of a step and its diagram report',
}


def configure_logging(level: str = None, fmt: str = None) -> None:
    """Install the structlog pipeline used by the library and the CLI"""
    level_name = (level or LOGGING_LEVEL).upper()
    numeric_level = getattr(logging, level_name, logging.INFO)
    renderer = (
        structlog.processors.JSONRenderer()
        if (fmt or LOG_FORMAT) == 'json'
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt='iso'),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


# Export for easy import
__all__ = [
    'BASE_DIR', 'OUTPUT_DIR',
    'LOGGING_LEVEL', 'LOG_FORMAT',
    'MAX_CHAIN_DEPTH', 'SINGULAR_EPS', 'QUAD_TOL', 'QUAD_LIMIT', 'R_MIN',
    'NUMERICS_CONFIG', 'VERIFY_CONFIG', 'CSV_CONFIG', 'CLI_COMMANDS',
    'configure_logging',
]
