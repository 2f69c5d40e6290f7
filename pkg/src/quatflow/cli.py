"""Batch command-line front end.

Subcommands:

* ``run <config.json>`` - integrate one configured trajectory, write a CSV
  trajectory, a flat JSON diagnostics report, and optionally a gnuplot
  phase-portrait script.  ``--batch <dir>`` runs every ``*.json`` config in
  a directory concurrently instead.
* ``verify --n <int>`` - print the quaternion-relation and
  metric-compatibility residual table for all six structures.
* ``dump --what structure|omega --label F|G|H --n <int>`` - print the
  requested matrix as integer CSV.

Exit codes: 0 on success with passing diagnostics, 1 on operational
failure (including usage errors), 2 when a diagnostic exceeds its
threshold.  No other codes are ever returned.  Output files carry no
timestamps, so identical configs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, SimulationConfig, load_config
from .diagnostics import (
    algebra_residuals,
    default_thresholds,
    energy_drift,
    eom_residual,
    symplecticity_residual,
)
from .dynamics import HamiltonianSystem, IntegrationError, PhasePoint, Trajectory, integrate
from .expressions import ExpressionError, ScalarField, evaluate, parse
from .forms import symplectic_form
from .structures import (
    LABELS,
    BlockDim,
    EuclideanMetric,
    SPACES,
    StructureKind,
    StructureTensor,
    build_structure,
    structure_triple,
    verify_metric_compatibility,
    verify_quaternion_relations,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _format_float(value: float) -> str:
    # 17 significant digits round-trip any IEEE double exactly
    return format(float(value), ".17g")


def trajectory_csv(trajectory: Trajectory, hamiltonian: ScalarField) -> str:
    """Render a trajectory as CSV with full double precision."""
    size = trajectory.points[0].coordinates.size
    header = "t," + ",".join(f"x{a}" for a in range(1, size + 1)) + ",energy"
    lines = [header]
    for point in trajectory.points:
        energy = evaluate(hamiltonian, point.coordinates)
        cells = [_format_float(point.time)]
        cells.extend(_format_float(v) for v in point.coordinates)
        cells.append(_format_float(energy))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def gnuplot_script(csv_name: str, n: int) -> str:
    return "\n".join(
        [
            f"# phase portrait of {csv_name}: x1 against x{n + 1}",
            'set datafile separator ","',
            "set key off",
            'set xlabel "x1"',
            f'set ylabel "x{n + 1}"',
            f'plot "{csv_name}" using 2:{n + 2} with lines',
        ]
    ) + "\n"


def _write_error_log(prefix: Path, message: str) -> None:
    try:
        Path(f"{prefix}.error.log").write_text(message + "\n", encoding="utf-8")
    except OSError:
        pass  # best effort; the message already went to stderr


def run_config(config: SimulationConfig, tolerance_scale: float = 1.0) -> int:
    """Execute one simulation run and write its artifacts."""
    prefix = Path(config.output_prefix)
    try:
        if str(prefix.parent) not in ("", "."):
            prefix.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory for {prefix}: {exc}", file=sys.stderr)
        return 1

    dim = BlockDim(config.n)
    field = parse(config.hamiltonian, dim)
    system = HamiltonianSystem.build(config.structure, field)
    initial = PhasePoint(np.array(config.initial), 0.0)

    try:
        trajectory = integrate(system, initial, config.dt, config.steps, config.method)
    except IntegrationError as exc:
        message = f"integration aborted: {exc}"
        print(f"error: {message}", file=sys.stderr)
        if exc.partial is not None:
            try:
                Path(f"{prefix}.trajectory.csv.partial").write_text(
                    trajectory_csv(exc.partial, field), encoding="utf-8"
                )
            except (OSError, ExpressionError):
                pass
        _write_error_log(prefix, message)
        return 1

    try:
        outputs = _render_outputs(config, trajectory, system, tolerance_scale)
    except (ExpressionError, ValueError) as exc:
        message = f"diagnostics failed: {exc}"
        print(f"error: {message}", file=sys.stderr)
        _write_error_log(prefix, message)
        return 1
    contents, passed = outputs

    written: list[Path] = []
    try:
        for path, text in contents.items():
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        message = f"cannot write outputs for {prefix}: {exc}"
        print(f"error: {message}", file=sys.stderr)
        _write_error_log(prefix, message)
        return 1
    return 0 if passed else 2


def _render_outputs(
    config: SimulationConfig,
    trajectory: Trajectory,
    system: HamiltonianSystem,
    tolerance_scale: float,
) -> tuple[dict[Path, str], bool]:
    prefix = Path(config.output_prefix)
    csv_text = trajectory_csv(trajectory, system.hamiltonian)

    series, drift_max = energy_drift(trajectory, system.hamiltonian)
    symplectic = symplecticity_residual(system, trajectory.points[0], config.dt, config.method)
    algebra = algebra_residuals(system)
    thresholds = default_thresholds(config.method, config.dt, tolerance_scale)

    document: dict = {
        "n": config.n,
        "structure": config.structure,
        "method": config.method,
        "dt": config.dt,
        "steps": config.steps,
        "tolerance_scale": tolerance_scale,
        "energy_drift_max": drift_max,
        "energy_drift_series": [float(v) for v in series],
        "symplecticity_residual": symplectic,
        "threshold_energy_drift_max": thresholds["energy_drift_max"],
        "threshold_eom_residual_max": thresholds["eom_residual_max"],
        "threshold_symplecticity_residual": thresholds["symplecticity_residual"],
    }
    for key, value in algebra.items():
        document[f"algebra_residual_{key}"] = value

    passed = (
        drift_max <= thresholds["energy_drift_max"]
        and symplectic <= thresholds["symplecticity_residual"]
        and all(value == 0 for value in algebra.values())
    )
    # the central-difference residual needs an interior point
    if len(trajectory.points) >= 3:
        eom = eom_residual(trajectory, system)
        document["eom_residual_max"] = eom
        passed = passed and eom <= thresholds["eom_residual_max"]
    document["passed"] = passed

    contents = {
        Path(f"{prefix}.trajectory.csv"): csv_text,
        Path(f"{prefix}.diagnostics.json"): json.dumps(document, sort_keys=True, indent=2) + "\n",
    }
    if config.emit_plot:
        csv_name = f"{prefix.name}.trajectory.csv"
        contents[Path(f"{prefix}.phase.gnuplot")] = gnuplot_script(csv_name, config.n)
    return contents, passed


def run_config_file(path: str | Path, tolerance_scale: float = 1.0) -> int:
    try:
        config = load_config(path)
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: invalid config {path}: {exc}", file=sys.stderr)
        return 1
    return run_config(config, tolerance_scale)


def run_batch(directory: str | Path, tolerance_scale: float = 1.0) -> int:
    """Run every *.json config in a directory, one trajectory per worker."""
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        print(f"error: no *.json configs in {directory}", file=sys.stderr)
        return 1
    with ThreadPoolExecutor() as pool:
        codes = list(pool.map(lambda p: run_config_file(p, tolerance_scale), paths))
    if 1 in codes:
        return 1
    if 2 in codes:
        return 2
    return 0


def _corrupted_tangent_triple(dim: BlockDim):
    f, g, _ = structure_triple("tangent", dim)
    fake_h = StructureTensor(kind=StructureKind("H", "tangent"), dim=dim, matrix=f.matrix)
    return f, g, fake_h


def verify_command(n: int, inject_corrupt_h: bool = False) -> int:
    """Print the residual table for all six structures at block size n."""
    dim = BlockDim(n)
    metric = EuclideanMetric(dim)
    if inject_corrupt_h:
        tangent = _corrupted_tangent_triple(dim)
    else:
        tangent = structure_triple("tangent", dim)
    cotangent = structure_triple("cotangent", dim)

    tangent_report = verify_quaternion_relations(*tangent)
    cotangent_report = verify_quaternion_relations(*cotangent)

    print(f"quaternion relations, n = {n} (residual = max abs row sum)")
    print(f"  {'relation':<12}{'tangent':>10}{'cotangent':>12}")
    rows = (
        ("F^2 + I", tangent_report.f_squared, cotangent_report.f_squared),
        ("G^2 + I", tangent_report.g_squared, cotangent_report.g_squared),
        ("H^2 + I", tangent_report.h_squared, cotangent_report.h_squared),
        ("FGH + I", tangent_report.triple_product, cotangent_report.triple_product),
    )
    for name, t_val, c_val in rows:
        print(f"  {name:<12}{t_val:>10}{c_val:>12}")

    print("metric compatibility (max |g(Tu,v) + g(u,Tv)| over basis pairs)")
    worst_metric = 0
    for tensor in tangent + cotangent:
        residual = verify_metric_compatibility(tensor, metric)
        worst_metric = max(worst_metric, residual)
        print(f"  {tensor.kind.label:<2}{tensor.kind.space:<10}{residual:>10}")

    clean = tangent_report.all_zero and cotangent_report.all_zero and worst_metric == 0
    return 0 if clean else 2


def dump_command(what: str, label: str, n: int, space: str = "tangent") -> int:
    """Print the requested 4n x 4n matrix as integer CSV on stdout."""
    dim = BlockDim(n)
    if what == "structure":
        matrix = build_structure(StructureKind(label, space), dim).matrix
    else:
        matrix = symplectic_form(label, dim).matrix
    for row in matrix:
        print(",".join(str(int(v)) for v in row))
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="quatflow", description="quaternionic Hamiltonian flow simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="integrate a configured trajectory")
    run_parser.add_argument("config", nargs="?", help="path to a simulation config JSON")
    run_parser.add_argument("--batch", metavar="DIR", help="run every *.json config in DIR")
    run_parser.add_argument(
        "--tolerance-scale",
        type=float,
        default=1.0,
        help="multiplier applied to every diagnostic threshold (default 1.0)",
    )

    verify_parser = sub.add_parser("verify", help="check the quaternion algebra")
    verify_parser.add_argument("--n", type=int, required=True, help="block size")
    verify_parser.add_argument(
        "--inject-corrupt-h",
        action="store_true",
        help="testing aid: replace the tangent H tensor with a wrong one",
    )

    dump_parser = sub.add_parser("dump", help="print a matrix as integer CSV")
    dump_parser.add_argument("--what", choices=("structure", "omega"), required=True)
    dump_parser.add_argument("--label", choices=LABELS, required=True)
    dump_parser.add_argument("--n", type=int, required=True)
    dump_parser.add_argument("--space", choices=SPACES, default="tangent")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and friends
        return 0 if exc.code in (0, None) else 1

    try:
        if args.command == "run":
            if (args.config is None) == (args.batch is None):
                print("usage error: provide exactly one of <config.json> or --batch DIR", file=sys.stderr)
                return 1
            if args.tolerance_scale <= 0:
                print("usage error: --tolerance-scale must be positive", file=sys.stderr)
                return 1
            if args.batch is not None:
                return run_batch(args.batch, args.tolerance_scale)
            return run_config_file(args.config, args.tolerance_scale)
        if args.command == "verify":
            if args.n < 1:
                print("usage error: --n must be >= 1", file=sys.stderr)
                return 1
            return verify_command(args.n, args.inject_corrupt_h)
        if args.n < 1:
            print("usage error: --n must be >= 1", file=sys.stderr)
            return 1
        return dump_command(args.what, args.label, args.n, args.space)
    except (ConfigError, ExpressionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
