"""Batch command line: ingest, synth, cluster, sweep, elbow.

Every command is a pure file-in, file-out transformation plus at most one
line on stdout; identical flags always produce byte-identical artifacts.
Invalid flag combinations are rejected with a one-line diagnostic before
any file is read or any distance is computed.

Commands
--------
ingest   readings CSV -> curves CSV (+ manifest)
synth    archetype spec + seed -> synthetic curves CSV (+ manifest with labels)
cluster  curves CSV -> clustering JSON; prints the WCBCR score
sweep    curves CSV -> k,wcbcr CSV (+ metadata sidecar with the elbow k)
elbow    sweep CSV -> prints the selected k

The defaults reproduce the package's headline configuration: hierarchical
clustering, DTW with window 4, average linkage, per-curve normalization,
Euclidean WCBCR scoring.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass

from .curves import PER_CURVE, PER_HOUR, RAW, SyntheticSpec, generate_synthetic, \
    normalize_dataset, reshape_readings
from .distance import METRIC_KINDS, MetricConfig, load_matrix, pairwise_matrix, \
    save_matrix
from .evaluation import (MATRIX_METHODS, METHODS, DegenerateClusteringError,
                         DegenerateElbowWarning, MethodSpec, elbow, fit,
                         load_sweep, save_sweep, sweep, wcbcr)
from .io import read_curves, read_readings, write_curves
from .partitional import FitError
from .results import save_result

COMMANDS = ("ingest", "synth", "cluster", "sweep", "elbow")

#: Methods that work on the raw 24-dimensional vectors; they take no
#: --distance (Euclidean by construction) and no matrix cache flags.
_VECTOR_METHODS = ("kmeans", "kmeanspp", "gmm")


class ConfigError(ValueError):
    """An invalid flag combination, caught before any computation."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options for one command invocation."""

    command: str
    input: str | None = None
    output: str | None = None
    method: str = "ahc"
    distance: str | None = None
    window: int | None = None
    linkage: str | None = None
    size_weighted: bool = False
    k: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    seed: int = 0
    normalization: str = PER_CURVE
    save_matrix: str | None = None
    load_matrix: str | None = None
    restarts: int = 10
    max_iterations: int = 300
    tolerance: float = 1e-6
    covariance: str = "diagonal"
    k_true: int = 3
    per_archetype: int = 10
    noise: float = 0.0
    shift: int = 0

    def metric(self) -> MetricConfig | None:
        if self.method in MATRIX_METHODS:
            return MetricConfig(self.distance, self.window)
        return None

    def method_spec(self) -> MethodSpec:
        return MethodSpec(
            method=self.method,
            metric=self.metric(),
            linkage=self.linkage if self.method == "ahc" else None,
            size_weighted=self.size_weighted,
            seed=self.seed,
            restarts=self.restarts,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            covariance_kind=self.covariance,
        )


def _resolve(args: argparse.Namespace) -> RunConfig:
    """Validate flag combinations and fill in the defaults they gate.

    The combination rules, enforced before anything is computed:
    --linkage and --size-weighted only with ahc; --window only with the dtw
    distance; --distance only for the matrix methods (ahc, kmedoids);
    --covariance only for gmm; the matrix cache flags only for the matrix
    methods.
    """
    command = args.command
    method = getattr(args, "method", "ahc")

    distance = getattr(args, "distance", None)
    window = getattr(args, "window", None)
    linkage = getattr(args, "linkage", None)
    size_weighted = getattr(args, "size_weighted", False)
    covariance = getattr(args, "covariance", None)

    if method in _VECTOR_METHODS:
        if distance is not None:
            raise ConfigError(
                f"--distance only applies to matrix methods "
                f"({', '.join(MATRIX_METHODS)}); {method} is Euclidean by construction"
            )
        if getattr(args, "save_matrix", None) or getattr(args, "load_matrix", None):
            raise ConfigError(
                f"--save-matrix/--load-matrix only apply to matrix methods "
                f"({', '.join(MATRIX_METHODS)}), not {method}"
            )
    if linkage is not None and method != "ahc":
        raise ConfigError(f"--linkage only applies to ahc, not {method}")
    if size_weighted and method != "ahc":
        raise ConfigError(f"--size-weighted only applies to ahc, not {method}")
    if covariance is not None and method != "gmm":
        raise ConfigError(f"--covariance only applies to gmm, not {method}")

    resolved_distance = distance
    if method in MATRIX_METHODS and resolved_distance is None:
        resolved_distance = "dtw"
    if window is not None and resolved_distance != "dtw":
        raise ConfigError(
            f"--window only applies to the dtw distance, not "
            f"{resolved_distance or 'vector methods'}"
        )
    resolved_window = window if window is not None else 4

    if command in ("cluster", "sweep"):
        k = getattr(args, "k", None)
        k_min = getattr(args, "k_min", None)
        k_max = getattr(args, "k_max", None)
        if command == "cluster" and k < 2:
            raise ConfigError(f"--k must be >= 2, got {k}")
        if command == "sweep" and not (2 <= k_min <= k_max):
            raise ConfigError(
                f"need 2 <= k-min <= k-max, got [{k_min}, {k_max}]"
            )

    return RunConfig(
        command=command,
        input=getattr(args, "input", None),
        output=getattr(args, "output", None),
        method=method,
        distance=resolved_distance,
        window=resolved_window,
        linkage=linkage or ("average" if method == "ahc" else None),
        size_weighted=size_weighted,
        k=getattr(args, "k", None),
        k_min=getattr(args, "k_min", None),
        k_max=getattr(args, "k_max", None),
        seed=getattr(args, "seed", 0),
        normalization=getattr(args, "normalization", PER_CURVE),
        save_matrix=getattr(args, "save_matrix", None),
        load_matrix=getattr(args, "load_matrix", None),
        restarts=getattr(args, "restarts", 10),
        max_iterations=getattr(args, "max_iterations", 300),
        tolerance=getattr(args, "tolerance", 1e-6),
        covariance=covariance or "diagonal",
        k_true=getattr(args, "k_true", 3),
        per_archetype=getattr(args, "per_archetype", 10),
        noise=getattr(args, "noise", 0.0),
        shift=getattr(args, "shift", 0),
    )


def _add_clustering_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="ahc")
    p.add_argument("--distance", choices=METRIC_KINDS, default=None,
                   help="distance for matrix methods (default: dtw)")
    p.add_argument("--window", type=int, default=None,
                   help="Sakoe-Chiba band width for dtw (default: 4)")
    p.add_argument("--linkage", choices=("single", "complete", "average"),
                   default=None, help="ahc linkage (default: average)")
    p.add_argument("--size-weighted", action="store_true", dest="size_weighted",
                   help="size-weighted average linkage instead of the two-term mean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalization", choices=(PER_CURVE, PER_HOUR),
                   default=PER_CURVE)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iterations", type=int, default=300, dest="max_iterations")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--covariance", choices=("diagonal", "full"), default=None,
                   help="gmm covariance structure (default: diagonal)")
    p.add_argument("--save-matrix", default=None, dest="save_matrix",
                   help="write the pairwise distance matrix here")
    p.add_argument("--load-matrix", default=None, dest="load_matrix",
                   help="reuse a previously saved distance matrix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadclust",
        description="shape-based clustering of daily load curves",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="readings CSV -> curves CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic curves CSV")
    p.add_argument("--output", required=True)
    p.add_argument("--k-true", type=int, default=3, dest="k_true")
    p.add_argument("--per-archetype", type=int, default=10, dest="per_archetype")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("cluster", help="cluster a curves CSV at one k")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_clustering_flags(p)

    p = sub.add_parser("sweep", help="score a k-range and write k,wcbcr rows")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k-min", type=int, required=True, dest="k_min")
    p.add_argument("--k-max", type=int, required=True, dest="k_max")
    _add_clustering_flags(p)

    p = sub.add_parser("elbow", help="pick k from a sweep CSV")
    p.add_argument("--input", required=True)

    return parser


def _normalized_dataset(config: RunConfig):
    dataset, _ = read_curves(config.input)
    if dataset.normalization == RAW:
        return normalize_dataset(dataset, config.normalization)
    if dataset.normalization != config.normalization:
        raise ConfigError(
            f"input is already normalized {dataset.normalization}, "
            f"which conflicts with --normalization {config.normalization}"
        )
    return dataset


def _prepare_matrix(config: RunConfig, dataset):
    """Build, load, and/or persist the pairwise matrix per the cache flags."""
    metric = config.metric()
    if config.load_matrix:
        matrix = load_matrix(config.load_matrix)
        if matrix.n != len(dataset):
            raise ConfigError(
                f"cached matrix is for {matrix.n} curves, dataset has {len(dataset)}"
            )
        if matrix.metric != metric:
            raise ConfigError(
                f"cached matrix was built with {matrix.metric.label()}, "
                f"run asks for {metric.label()}"
            )
    else:
        matrix = pairwise_matrix(dataset, metric)
    if config.save_matrix:
        save_matrix(matrix, config.save_matrix)
    return matrix


def _run_ingest(config: RunConfig) -> int:
    readings = read_readings(config.input)
    dataset, dropped = reshape_readings(readings)
    write_curves(dataset, config.output,
                 extra={"source": config.input, "dropped_days": dropped})
    print(f"curves={len(dataset)} dropped_days={dropped}")
    return 0


def _run_synth(config: RunConfig) -> int:
    spec = SyntheticSpec.default(config.k_true, config.per_archetype,
                                 config.noise, config.shift)
    dataset, labels = generate_synthetic(spec, config.seed)
    write_curves(dataset, config.output, extra={
        "labels": [int(a) for a in labels],
        "seed": config.seed,
        "synthetic": {
            "k_true": config.k_true,
            "curves_per_archetype": config.per_archetype,
            "noise_std": config.noise,
            "shift_range": config.shift,
        },
    })
    print(f"curves={len(dataset)} archetypes={config.k_true}")
    return 0


def _run_cluster(config: RunConfig) -> int:
    dataset = _normalized_dataset(config)
    spec = config.method_spec()
    matrix = None
    if config.method in MATRIX_METHODS:
        matrix = _prepare_matrix(config, dataset)
    result = fit(dataset, spec, config.k, matrix=matrix)
    save_result(result, config.output,
                extra_method_fields={"normalization": dataset.normalization,
                                     "restarts": config.restarts})
    score = wcbcr(result, dataset)
    print(f"wcbcr={score!r}")
    return 0


def _run_sweep(config: RunConfig) -> int:
    dataset = _normalized_dataset(config)
    spec = config.method_spec()
    matrix = None
    if config.method in MATRIX_METHODS:
        matrix = _prepare_matrix(config, dataset)
    report = sweep(dataset, spec, config.k_min, config.k_max, matrix=matrix)
    save_sweep(report, config.output)
    for line in report.diagnostics:
        print(f"warning: {line}", file=sys.stderr)
    print(f"rows={len(report.rows)}")
    return 0


def _run_elbow(config: RunConfig) -> int:
    report = load_sweep(config.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateElbowWarning)
        k = elbow(report)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(k)
    return 0


_RUNNERS = {
    "ingest": _run_ingest,
    "synth": _run_synth,
    "cluster": _run_cluster,
    "sweep": _run_sweep,
    "elbow": _run_elbow,
}


def run(config: RunConfig) -> int:
    """Execute one resolved command; returns the process exit status."""
    try:
        return _RUNNERS[config.command](config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, FitError, DegenerateClusteringError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
