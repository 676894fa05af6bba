#!/usr/bin/env python3
"""
Command-line entry point for the Dirac Darboux toolkit.

    python main.py list
    python main.py transform --seed free_mass:m=1 --eps 0.5 --grid -10:10:0.05 --out v1.csv
    python main.py chain --spec chains/two_soliton.cfg --cross-check
    python main.py verify --all
    python main.py figure --n 4 --out fig4.csv
    python main.py reduce --example ex6
"""

import argparse
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import ValidationError

import config
from dirac.catalog import (
    EXAMPLES,
    FIGURE_VARIANTS,
    example,
    free_spinor,
    figure_data,
    list_examples,
    run_example_suite,
    run_identity_suite,
)
from dirac.chain import ChainSpec, ChainStep, chain_apply, chain_potential, compose_transforms, sequential_apply
from dirac.darboux import LOWER, UPPER, apply_forward, build_transform, pseudoscalar_step
from dirac.exceptions import ChainSpecError, DarbouxError
from dirac.potential import SEEDS, Potential, parse_seed
from dirac.reduction import diagram_potentials, susy_diagram_check
from dirac.spinor import EigenSpinor
from dirac.table_generator import create_csv_table, pair_table, potential_table, spinor_table
from dirac.verify import summarize
from models.base import ChainStepSpec, GridSpec, ResidualReport, RunConfig

logger = structlog.get_logger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

_STEP_LINE = re.compile(r"^step\s+(\d+)\s*:\s*(.+)$", re.IGNORECASE)


class UsageError(Exception):
    """Bad command-line input that argparse itself cannot see"""
    pass


# ===== ARGUMENT HANDLING =====

def _normalize_argv(argv: Sequence[str]) -> List[str]:
    """Glue '--grid -10:10:0.05' into '--grid=-10:10:0.05' so argparse keeps negative bounds"""
    out: List[str] = []
    items = list(argv)
    i = 0
    while i < len(items):
        if items[i] == "--grid" and i + 1 < len(items):
            out.append(f"--grid={items[i + 1]}")
            i += 2
            continue
        out.append(items[i])
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Darboux transformations for the 1D Dirac equation')
    parser.add_argument('--log-level', default=None, help='Logging level (default from LOGGING_LEVEL)')
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('list', help=config.CLI_COMMANDS['list'])

    transform = sub.add_parser('transform', help=config.CLI_COMMANDS['transform'])
    transform.add_argument('--seed', required=True, help="Seed potential, e.g. free_mass:m=1")
    transform.add_argument('--eps', type=float, help='Shortcut: u1 = kernel(m), u2 = cosh(eps)')
    transform.add_argument('--u1', help='Builder for u1, e.g. kernel:1')
    transform.add_argument('--u2', help='Builder for u2, e.g. cosh:0.5')
    transform.add_argument('--map', dest='mapped', action='append', default=[],
                           help='Builder of a seed solution to map, may repeat')
    transform.add_argument('--map-out', help='CSV path for the mapped solutions')
    transform.add_argument('--grid', help='start:stop:step')
    transform.add_argument('--out', help='CSV path for the partner potential (default stdout)')
    transform.add_argument('--allow-singular', action='store_true')

    chain = sub.add_parser('chain', help=config.CLI_COMMANDS['chain'])
    chain.add_argument('--spec', required=True, help='Chain file')
    chain.add_argument('--grid', help='start:stop:step')
    chain.add_argument('--out', help='CSV path (default stdout)')
    chain.add_argument('--cross-check', action='store_true',
                       help='Compare against sequential single steps')
    chain.add_argument('--tolerance', type=float, default=1e-8)
    chain.add_argument('--allow-singular', action='store_true')
    chain.add_argument('--allow-deep', action='store_true')

    verify = sub.add_parser('verify', help=config.CLI_COMMANDS['verify'])
    target = verify.add_mutually_exclusive_group(required=True)
    target.add_argument('--all', action='store_true')
    target.add_argument('--example', choices=sorted(EXAMPLES))
    verify.add_argument('--param', action='append', default=[], help='key=value example parameter')
    verify.add_argument('--tolerance', type=float)

    figure = sub.add_parser('figure', help=config.CLI_COMMANDS['figure'])
    figure.add_argument('--n', type=int, required=True, choices=(2, 3, 4, 5))
    figure.add_argument('--variant', default='default')
    figure.add_argument('--out', help='CSV path (default stdout)')

    reduce = sub.add_parser('reduce', help=config.CLI_COMMANDS['reduce'])
    reduce.add_argument('--example', choices=('ex1', 'ex6', 'ex7', 'ex8'))
    reduce.add_argument('--seed', help='Pseudoscalar seed, e.g. free_mass:m=1')
    reduce.add_argument('--u', help='Builder of the partner spinor, e.g. cosh:0.5')
    reduce.add_argument('--branch', choices=(UPPER, LOWER), default=UPPER)
    reduce.add_argument('--grid', help='start:stop:step')
    reduce.add_argument('--out', help='CSV path for the Schrodinger pairs (default stdout)')
    reduce.add_argument('--tolerance', type=float, default=1e-8)
    return parser


def _grid(text: Optional[str], fallback: Tuple[float, float], points: int = 401) -> np.ndarray:
    if text:
        return GridSpec.parse(text).points()
    return np.linspace(fallback[0], fallback[1], points)


def _params(items: Sequence[str]) -> dict:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise UsageError(f"parameter {item!r} is not numeric") from exc
    return params


def spinor_from_builder(V: Potential, text: str) -> EigenSpinor:
    """'kind:energy' on a constant-mass seed; 'kernel' alone means E = m"""
    kind, _, energy = text.partition(":")
    kind = kind.strip()
    try:
        value = float(energy) if energy else V.mass
    except ValueError as exc:
        raise UsageError(f"spinor builder {text!r} has a non-numeric energy") from exc
    return free_spinor(V, kind, value)


# ===== CHAIN FILES =====

def parse_chain_file(path: Path) -> Tuple[Potential, List[ChainStepSpec]]:
    """
    potential: free_mass:m=1
    step 1: f=kernel, g=cosh, lambda=1, mu=0.5
    step 2: seed=cosh/decay, lambda=-0.5, mu=0.3
    seed=<f>/<g> names both builders, seed=<b> uses b for both.
    Lines starting with # are comments.
    """
    if not path.exists():
        raise UsageError(f"chain file not found: {path}")
    seed: Optional[Potential] = None
    steps: List[ChainStepSpec] = []
    for number, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("potential:"):
            seed = parse_seed(line.split(":", 1)[1])
            continue
        match = _STEP_LINE.match(line)
        if not match:
            raise ChainSpecError(f"{path}:{number}: cannot parse {raw!r}")
        fields = {}
        for item in match.group(2).split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ChainSpecError(f"{path}:{number}: {item.strip()!r} is not key=value")
            fields[key.strip().lower()] = value.strip()
        if "seed" in fields:
            first, _, second = fields.pop("seed").partition("/")
            fields.setdefault("f", first.strip())
            fields.setdefault("g", (second or first).strip())
        try:
            steps.append(ChainStepSpec(index=int(match.group(1)), f=fields.get("f", ""),
                                       g=fields.get("g", ""), lam=float(fields["lambda"]),
                                       mu=float(fields["mu"])))
        except (KeyError, ValueError, ValidationError) as exc:
            raise ChainSpecError(f"{path}:{number}: {exc}") from exc
    if seed is None:
        raise ChainSpecError(f"{path}: missing 'potential:' line")
    if not steps:
        raise ChainSpecError(f"{path}: no steps")
    return seed, sorted(steps, key=lambda s: s.index)


# ===== COMMANDS =====

def cmd_list(run: RunConfig) -> int:
    print("examples:")
    for info in list_examples():
        print(f"  {info.name:<6} {info.title}")
    print("seeds:")
    for name in SEEDS:
        print(f"  {name}")
    return EXIT_OK


def cmd_transform(run: RunConfig, args: argparse.Namespace) -> int:
    V = parse_seed(run.seed)
    if args.eps is not None:
        u1, u2 = free_spinor(V, "kernel", V.mass, "u1"), free_spinor(V, "cosh", args.eps, "u2")
    elif args.u1 and args.u2:
        u1, u2 = spinor_from_builder(V, args.u1), spinor_from_builder(V, args.u2)
    else:
        raise UsageError("transform needs --eps or both --u1 and --u2")
    T = build_transform(u1, u2, allow_singular=run.allow_singular)
    xs = run.grid.points() if run.grid else _grid(None, T.interval)
    create_csv_table(potential_table(T.transformed, xs), run.output)
    if args.mapped:
        images = [apply_forward(T, spinor_from_builder(V, text)) for text in args.mapped]
        create_csv_table(spinor_table(images, xs), args.map_out)
    logger.info("transform done", seed=V.name, lambdas=T.lambdas, points=len(xs))
    return EXIT_OK


def cmd_chain(run: RunConfig, args: argparse.Namespace) -> int:
    V, specs = parse_chain_file(Path(run.chain_spec))
    steps = [ChainStep(spinor_from_builder(V, f"{s.f}:{s.lam}"), spinor_from_builder(V, f"{s.g}:{s.mu}"))
             for s in specs]
    spec = ChainSpec(steps, allow_deep=run.allow_deep, allow_singular=run.allow_singular)
    result = chain_potential(spec)
    xs = run.grid.points() if run.grid else _grid(None, spec.interval)
    create_csv_table(potential_table(result, xs), run.output)
    if not args.cross_check:
        return EXIT_OK
    transforms = compose_transforms(spec)
    sequential = transforms[-1].transformed
    gap = np.maximum(np.abs(result.p(xs) - sequential.p(xs)), np.abs(result.q(xs) - sequential.q(xs)))
    reports = [ResidualReport.from_residuals("chain_vs_sequential", xs, gap, run.tolerance, "chain")]
    probe = steps[0].f
    others = [s for s in (free_spinor(V, "decay", 0.1 * V.mass), free_spinor(V, "grow", -0.15 * V.mass))
              if all(abs(s.energy - e) > 1e-9 for e in spec.eigenvalues)]
    for psi in others or [probe]:
        mapped = sequential_apply(transforms, psi)(xs)
        chained = chain_apply(spec, psi, xs)
        rel = np.linalg.norm(mapped - chained, axis=-1) / (1.0 + np.linalg.norm(mapped, axis=-1))
        reports.append(ResidualReport.from_residuals("chain_apply_vs_sequential", xs, rel,
                                                     run.tolerance, "chain", spinor=psi.label))
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_verify(run: RunConfig, args: argparse.Namespace) -> int:
    reports: List[ResidualReport] = []
    if run.example:
        reports.extend(run_example_suite(run.example, args.tolerance, **run.params))
    else:
        for name in EXAMPLES:
            reports.extend(run_example_suite(name))
        reports.extend(run_identity_suite())
    for report in reports:
        print(report.line())
    counts = summarize(reports)
    log = logger.info if counts['failed'] == 0 else logger.warning
    log("verification summary", **counts)
    return EXIT_OK if counts['failed'] == 0 else EXIT_FAILED


def cmd_figure(run: RunConfig) -> int:
    figure = f"fig{run.params['n']:g}"
    frame = figure_data(figure, run.figure_variant)
    create_csv_table(frame, run.output)
    return EXIT_OK


def cmd_reduce(run: RunConfig, args: argparse.Namespace) -> int:
    if args.example in ('ex6', 'ex7', 'ex8'):
        bundle = example(args.example)
        step, xs_default = bundle.step, bundle.interval
    elif args.example == 'ex1' or (args.seed and args.u):
        if args.example == 'ex1':
            bundle = example('ex1')
            V, u, branch = bundle.seed, bundle.transforms[0].u2, UPPER
        else:
            V = parse_seed(args.seed)
            u, branch = spinor_from_builder(V, args.u), args.branch
        step = pseudoscalar_step(V, u, branch)
        xs_default = step.transform.interval
    else:
        raise UsageError("reduce needs --example or both --seed and --u")
    xs = run.grid.points() if run.grid else _grid(None, xs_default)
    base, moved = diagram_potentials(step)
    create_csv_table(pair_table({"U0": base, "U1_shifted": moved}, xs), run.output)
    reports = susy_diagram_check(step, xs, run.tolerance, args.example or "reduce")
    for report in reports:
        print(report.line(), file=sys.stderr if run.output is None else sys.stdout)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _run_config(args: argparse.Namespace) -> RunConfig:
    grid = GridSpec.parse(args.grid) if getattr(args, 'grid', None) else None
    params = {}
    if args.command == 'verify':
        params = _params(args.param)
    elif args.command == 'figure':
        params = {'n': float(args.n)}
        allowed = FIGURE_VARIANTS.get(f"fig{args.n}", ('default',))
        if args.variant not in allowed:
            raise UsageError(f"figure {args.n} variants: {', '.join(allowed)}")
    tolerance = getattr(args, 'tolerance', None)
    return RunConfig(
        command=args.command,
        seed=getattr(args, 'seed', None),
        chain_spec=getattr(args, 'spec', None),
        grid=grid,
        output=getattr(args, 'out', None),
        tolerance=tolerance if tolerance is not None else config.VERIFY_CONFIG['default_tolerance'],
        allow_singular=getattr(args, 'allow_singular', False),
        allow_deep=getattr(args, 'allow_deep', False),
        figure_variant=getattr(args, 'variant', 'default'),
        example=getattr(args, 'example', None),
        params=params,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    config.configure_logging(args.log_level)

    try:
        run = _run_config(args)
        if args.command == 'list':
            return cmd_list(run)
        if args.command == 'transform':
            return cmd_transform(run, args)
        if args.command == 'chain':
            return cmd_chain(run, args)
        if args.command == 'verify':
            return cmd_verify(run, args)
        if args.command == 'figure':
            return cmd_figure(run)
        return cmd_reduce(run, args)
    except (UsageError, ValidationError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DarbouxError as exc:
        logger.error("❌ command failed", command=args.command, error=str(exc),
                     error_type=type(exc).__name__)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
