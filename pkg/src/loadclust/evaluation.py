"""Cluster quality scoring (WCBCR), k-sweeps, and elbow selection.

The quality figure is the within-cluster to between-cluster ratio: summed
distance of every curve to its cluster prototype, divided by the summed
distance between prototype pairs. Lower is better: tight clusters that sit
far apart. The evaluation distance is always Euclidean, whatever metric the
clustering itself used, so scores are comparable across methods; this is
asserted by tests, not just intended.

The denominator counts each unordered prototype pair once. A literal sum
over ordered pairs would double it, but the ratio is only ever used for
comparison and elbow location, both invariant under that constant factor;
the convention is recorded in every report header so the numbers stay
interpretable.

Choosing k: sweep a k-range, then find the elbow of the score-vs-k curve.
The elbow rule is deterministic (no eyeballing): normalize the (k, score)
points to the unit square, measure each interior point's perpendicular
distance to the chord joining the first and last points, and take the k
with the largest deviation.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

from .ahc import LINKAGES, build_dendrogram, cut
from .distance import (MetricConfig, UnnormalizedDataWarning,
                       pairwise_matrix, pointwise_distance)
from .partitional import FitError, gmm_em, kmeans, kmedoids
from .results import MEDOID_INDEX, ClusteringResult, FitOptions

METHODS = ("ahc", "kmeans", "kmeanspp", "kmedoids", "gmm")

#: Methods that cluster through a pairwise distance matrix.
MATRIX_METHODS = ("ahc", "kmedoids")

EVALUATION_METRIC = "euclidean"


class DegenerateClusteringError(ValueError):
    """All prototypes coincide, so the between-cluster distance is zero."""


class DegenerateElbowWarning(UserWarning):
    """The score-vs-k curve has no elbow (flat or perfectly linear)."""


def prototypes(result: ClusteringResult, dataset) -> tuple:
    """The k prototype curves of a result, as 24-value tuples.

    Medoid-index results dereference into the dataset; vector results
    already carry their prototypes explicitly.
    """
    if len(dataset) != len(result.assignments):
        raise ValueError(
            f"result is for {len(result.assignments)} curves, "
            f"dataset has {len(dataset)}"
        )
    if result.prototype_kind == MEDOID_INDEX:
        return tuple(dataset[p].values for p in result.prototypes)
    return result.prototypes


def wcbcr(result: ClusteringResult, dataset) -> float:
    """Within-cluster to between-cluster distance ratio; lower is better.

    numerator   = sum over curves X of d(X, prototype of X's cluster)
    denominator = sum over unordered prototype pairs (i < j) of d(mu_i, mu_j)

    with d the Euclidean distance, always. Raises
    DegenerateClusteringError when every prototype coincides.
    """
    if result.k < 2:
        raise ValueError("wcbcr needs k >= 2 (between-cluster sum is empty)")
    if getattr(dataset, "normalization", None) == "raw":
        warnings.warn(
            "scoring a clustering of unnormalized curves; magnitude will "
            "dominate the ratio",
            UnnormalizedDataWarning,
            stacklevel=2,
        )
    protos = prototypes(result, dataset)

    numerator = 0.0
    for i, a in enumerate(result.assignments):
        numerator += pointwise_distance(dataset[i].values, protos[a],
                                        EVALUATION_METRIC)
    denominator = 0.0
    for a in range(result.k - 1):
        for b in range(a + 1, result.k):
            denominator += pointwise_distance(protos[a], protos[b],
                                              EVALUATION_METRIC)
    if denominator == 0.0:
        raise DegenerateClusteringError(
            "all cluster prototypes are identical; the clustering is degenerate"
        )
    return numerator / denominator


@dataclass(frozen=True)
class MethodSpec:
    """One clustering configuration: which method, under which knobs.

    ``metric`` and ``linkage`` apply only where they mean something: the
    matrix methods take a metric (default dtw, window 4), ahc alone takes a
    linkage (default average). Vector methods (kmeans, kmeanspp, gmm) are
    Euclidean by construction and reject an explicit metric.
    """

    method: str
    metric: MetricConfig | None = None
    linkage: str | None = None
    size_weighted: bool = False
    seed: int = 0
    restarts: int = 10
    max_iterations: int = 300
    tolerance: float = 1e-6
    covariance_regularizer: float = 1e-6
    covariance_kind: str = "diagonal"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.method in MATRIX_METHODS:
            if self.metric is None:
                object.__setattr__(self, "metric", MetricConfig())
        elif self.metric is not None:
            raise ValueError(f"{self.method} does not take a metric (it is Euclidean)")
        if self.method == "ahc":
            if self.linkage is None:
                object.__setattr__(self, "linkage", "average")
            elif self.linkage not in LINKAGES:
                raise ValueError(f"unknown linkage {self.linkage!r}")
        elif self.linkage is not None:
            raise ValueError("linkage only applies to ahc")

    def name(self) -> str:
        """Column label in reports, e.g. 'ahc-dtw-average' or 'kmedoids-dtw'."""
        if self.method == "ahc":
            base = f"ahc-{self.metric.kind}-{self.linkage}"
            return base + "-sizeweighted" if self.size_weighted else base
        if self.method == "kmedoids":
            return f"kmedoids-{self.metric.kind}"
        return self.method

    def options(self, k: int) -> FitOptions:
        return FitOptions(
            k=k,
            seed=self.seed,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            covariance_regularizer=self.covariance_regularizer,
            covariance_kind=self.covariance_kind,
            restarts=self.restarts,
        )


def fit(dataset, spec: MethodSpec, k: int,
        matrix=None, dendrogram=None) -> ClusteringResult:
    """Run one clustering at one k under a MethodSpec.

    For the matrix methods, a precomputed ``matrix`` (and for ahc a
    prebuilt ``dendrogram``) short-circuits the expensive steps; sweep
    exploits this to build each at most once.
    """
    if spec.method == "ahc":
        if matrix is None:
            matrix = pairwise_matrix(dataset, spec.metric)
        if dendrogram is None:
            dendrogram = build_dendrogram(matrix, spec.linkage,
                                          spec.size_weighted)
        return cut(dendrogram, k, matrix)
    if spec.method == "kmeans":
        return kmeans(dataset, spec.options(k), init="random")
    if spec.method == "kmeanspp":
        return kmeans(dataset, spec.options(k), init="plusplus")
    if spec.method == "kmedoids":
        return kmedoids(dataset, spec.options(k), metric=spec.metric,
                        matrix=matrix)
    return gmm_em(dataset, spec.options(k))


@dataclass(frozen=True)
class SweepReport:
    """WCBCR scores over a k-range for one method.

    ``rows`` are (k, wcbcr) pairs with strictly increasing k. A k whose fit
    failed is absent from rows and explained in ``diagnostics`` instead.
    """

    spec: MethodSpec
    rows: tuple
    evaluation_metric: str = EVALUATION_METRIC
    diagnostics: tuple = ()

    def __post_init__(self):
        rows = tuple((int(k), float(w)) for k, w in self.rows)
        for (ka, _), (kb, _) in zip(rows, rows[1:]):
            if kb <= ka:
                raise ValueError("rows must have strictly increasing k")
        for k, w in rows:
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"wcbcr at k={k} must be finite and >= 0, got {w}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "diagnostics", tuple(self.diagnostics))

    def ks(self) -> tuple:
        return tuple(k for k, _ in self.rows)

    def scores(self) -> tuple:
        return tuple(w for _, w in self.rows)


def sweep(dataset, spec: MethodSpec, k_min: int, k_max: int,
          matrix=None) -> SweepReport:
    """Fit a method at every k in [k_min, k_max] and score each clustering.

    The distance matrix (matrix methods) and the dendrogram (ahc) are built
    exactly once and shared across all cuts/fits; a precomputed ``matrix``
    skips even that. A fit that fails at some k becomes a diagnostic line,
    not an abort; deterministic throughout.
    """
    n = len(dataset)
    if not (2 <= k_min <= k_max <= n):
        raise ValueError(
            f"need 2 <= k_min <= k_max <= {n}, got [{k_min}, {k_max}]"
        )
    if matrix is not None and spec.method not in MATRIX_METHODS:
        raise ValueError(f"{spec.method} does not use a distance matrix")
    dendrogram = None
    if spec.method in MATRIX_METHODS and matrix is None:
        matrix = pairwise_matrix(dataset, spec.metric)
    if spec.method == "ahc":
        dendrogram = build_dendrogram(matrix, spec.linkage, spec.size_weighted)

    rows = []
    diagnostics = []
    for k in range(k_min, k_max + 1):
        try:
            result = fit(dataset, spec, k, matrix=matrix, dendrogram=dendrogram)
            rows.append((k, wcbcr(result, dataset)))
        except (ValueError, FitError) as e:
            diagnostics.append(f"k={k}: {e}")
    return SweepReport(spec, tuple(rows), EVALUATION_METRIC, tuple(diagnostics))


def elbow(report: SweepReport) -> int:
    """The k at the elbow of the wcbcr-vs-k curve.

    Points are min-max normalized to the unit square; each interior point's
    perpendicular distance to the chord through the first and last points
    is measured; the k with the largest deviation wins, ties to the
    smallest k. A flat or perfectly linear curve has no elbow: that returns
    k_min under a DegenerateElbowWarning.

    Min-max normalization makes the answer invariant under any affine
    rescaling of the score column.
    """
    if len(report.rows) < 3:
        raise ValueError(f"elbow needs at least 3 rows, got {len(report.rows)}")
    ks = report.ks()
    ws = report.scores()
    k_lo, k_hi = ks[0], ks[-1]
    w_lo, w_hi = min(ws), max(ws)
    xs = [(k - k_lo) / (k_hi - k_lo) for k in ks]
    span = w_hi - w_lo
    ys = [0.0 if span == 0 else (w - w_lo) / span for w in ws]

    x1, y1 = xs[0], ys[0]
    x2, y2 = xs[-1], ys[-1]
    dx, dy = x2 - x1, y2 - y1
    chord = math.hypot(dx, dy)

    best_k = ks[0]
    best_d = -math.inf
    for i in range(1, len(ks) - 1):
        d = abs(dy * xs[i] - dx * ys[i] + x2 * y1 - y2 * x1) / chord
        if d > best_d:
            best_d = d
            best_k = ks[i]
    if best_d < 1e-12:
        warnings.warn(
            "wcbcr-vs-k curve is flat or linear; no elbow, returning k_min",
            DegenerateElbowWarning,
            stacklevel=2,
        )
        return ks[0]
    return best_k


# --- report files -----------------------------------------------------------

def _sidecar(path) -> str:
    return str(path) + ".json"


def save_sweep(report: SweepReport, path) -> None:
    """Write the report as CSV rows `k,wcbcr` plus a JSON metadata sidecar.

    The sidecar (at ``<path>.json``) records the method configuration, the
    evaluation metric, the unordered-pair denominator convention, and the
    selected elbow k (null when the report is too short to have one).
    """
    spec = report.spec
    with open(path, "w") as f:
        f.write("k,wcbcr\n")
        for k, w in report.rows:
            f.write(f"{k},{repr(w)}\n")
    elbow_k = None
    if len(report.rows) >= 3:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateElbowWarning)
            elbow_k = elbow(report)
    meta = {
        "kind": "sweep-report",
        "method": spec.method,
        "name": spec.name(),
        "metric": spec.metric.kind if spec.metric else EVALUATION_METRIC,
        "window": spec.metric.window if spec.metric else None,
        "linkage": spec.linkage,
        "seed": spec.seed,
        "evaluation_metric": report.evaluation_metric,
        "denominator_pairs": "unordered",
        "elbow_k": elbow_k,
        "diagnostics": list(report.diagnostics),
    }
    with open(_sidecar(path), "w") as f:
        f.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_sweep(path) -> SweepReport:
    """Rebuild a report from its CSV (and sidecar, when present).

    Without a sidecar the rows still load, under a default ahc spec; the
    elbow command needs nothing more than the rows.
    """
    rows = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "k,wcbcr":
            raise ValueError(f"{path}:1: expected header 'k,wcbcr', got {header!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                k_s, w_s = line.split(",")
                rows.append((int(k_s), float(w_s)))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: bad row {line!r}") from e

    spec = MethodSpec("ahc")
    diagnostics = ()
    try:
        with open(_sidecar(path)) as f:
            meta = json.load(f)
        metric = None
        if meta["method"] in MATRIX_METHODS:
            metric = MetricConfig(meta["metric"], meta["window"])
        spec = MethodSpec(meta["method"], metric=metric,
                          linkage=meta["linkage"], seed=meta["seed"])
        diagnostics = tuple(meta.get("diagnostics", ()))
    except FileNotFoundError:
        pass
    return SweepReport(spec, tuple(rows), EVALUATION_METRIC, diagnostics)


def sweep_table(dataset, specs, k_min: int, k_max: int):
    """Run one sweep per spec and tabulate them side by side.

    Returns (names, rows, reports): column names from each spec, then one
    row per k of [k, score_1, ..., score_m] with None where a fit failed.
    """
    specs = tuple(specs)
    names = [s.name() for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"method names must be unique, got {names}")
    reports = [sweep(dataset, s, k_min, k_max) for s in specs]
    by_k = [dict(r.rows) for r in reports]
    rows = []
    for k in range(k_min, k_max + 1):
        rows.append([k] + [d.get(k) for d in by_k])
    return names, rows, reports


def save_table(names, rows, path) -> None:
    """One CSV, k in the first column and one method's wcbcr per column."""
    with open(path, "w") as f:
        f.write("k," + ",".join(names) + "\n")
        for row in rows:
            cells = [str(row[0])]
            cells += ["" if v is None else repr(v) for v in row[1:]]
            f.write(",".join(cells) + "\n")
