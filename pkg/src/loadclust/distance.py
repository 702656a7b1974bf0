"""Distances between load curves: banded DTW and pointwise metrics.

The workhorse is dynamic time warping constrained to a Sakoe-Chiba band.
For hourly load curves a small band (default: 4) lets a morning peak at 7am
match one at 9am without letting breakfast align with dinner, and cuts the
quadratic DP cost to O(n * window).

With ``window=1`` the band pins the alignment to the diagonal and DTW
*equals* the Euclidean distance, bitwise: both run the identical
left-to-right sum of squared differences. That identity is why the
pointwise kernels below are plain Python loops instead of numpy
vectorization; numpy's pairwise summation would produce a different
rounding, breaking the equality that guards the band logic.

DTW is not a metric: it violates the triangle inequality, so nothing
downstream may index or prune by it. It is symmetric and non-negative,
which is all the clustering here relies on.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import HOURS_PER_DAY

logger = logging.getLogger(__name__)

METRIC_KINDS = ("dtw", "euclidean", "manhattan", "cosine")


class UnnormalizedDataWarning(UserWarning):
    """Shape distances were requested on data that is not z-normalized."""


@dataclass(frozen=True)
class MetricConfig:
    """Which distance to compute, with its parameters.

    ``window`` only matters for dtw; it is kept in the config regardless so
    a matrix built under one config can reproduce itself from its header
    alone. The window is capped at 24, the curve length, beyond which the
    band no longer constrains anything.
    """

    kind: str = "dtw"
    window: int = 4

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(
                f"unknown metric {self.kind!r}, expected one of {METRIC_KINDS}"
            )
        if int(self.window) != self.window or not (1 <= self.window <= HOURS_PER_DAY):
            raise ValueError(
                f"window must be an integer in [1, {HOURS_PER_DAY}], "
                f"got {self.window!r}"
            )
        object.__setattr__(self, "window", int(self.window))

    def distance(self, x, y) -> float:
        if self.kind == "dtw":
            return dtw(x, y, self.window)
        return pointwise_distance(x, y, self.kind)

    def label(self) -> str:
        """Short human-readable form used in report headers."""
        if self.kind == "dtw":
            return f"dtw(w={self.window})"
        return self.kind


def _validate_series(x, name: str) -> list:
    xs = [float(v) for v in x]
    if not xs:
        raise ValueError(f"{name} must be non-empty")
    for v in xs:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value in {name}")
    return xs


def dtw(x, y, window: int = 4) -> float:
    """Banded dynamic time warping distance between two series.

    The cost of aligning x_i with y_j is the squared difference; the return
    value is the square root of the cheapest monotone alignment's total
    cost, with alignment pairs restricted to the band |i - j| <= window - 1.
    window=1 admits only the diagonal path (Euclidean distance); any window
    reaching max(len(x), len(y)) is unconstrained DTW.

    For unequal lengths with |len(x) - len(y)| > window - 1 no admissible
    path reaches the final cell and the distance is ``inf``.

    Runs in O(len(x) * window) time and O(len(y)) memory: only two DP rows
    are ever alive, never the full table.
    """
    xs = _validate_series(x, "x")
    ys = _validate_series(y, "y")
    if int(window) != window or window < 1:
        raise ValueError(f"window must be an integer >= 1, got {window!r}")
    w = int(window)
    n, m = len(xs), len(ys)
    if abs(n - m) > w - 1:
        return math.inf

    inf = math.inf
    prev = [inf] * (m + 1)
    curr = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        lo = max(1, i - w + 1)
        hi = min(m, i + w - 1)
        # The cell left of the band start acts as this row's boundary; cells
        # right of the band end still hold inf from an earlier row, which is
        # exactly the out-of-band cost, so no further clearing is needed.
        curr[lo - 1] = inf
        for j in range(lo, hi + 1):
            d = xs[i - 1] - ys[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = d * d + best
        prev, curr = curr, prev
    return math.sqrt(prev[m])


def pointwise_distance(x, y, kind: str = "euclidean") -> float:
    """Positionwise distance between two equal-length series.

    Euclidean and manhattan accumulate strictly left to right (see the
    module docstring for why). Cosine distance is 1 - cosine similarity,
    clamped to [0, 2]; if either vector's norm is below 1e-12 the distance
    is defined as 1.0, the same value as for orthogonal vectors, so
    degenerate all-zero curves cannot poison downstream linkage updates
    with NaN.
    """
    xs = _validate_series(x, "x")
    ys = _validate_series(y, "y")
    if len(xs) != len(ys):
        raise ValueError(
            f"pointwise metrics need equal lengths, got {len(xs)} and {len(ys)}"
        )
    if kind == "euclidean":
        acc = 0.0
        for a, b in zip(xs, ys):
            d = a - b
            acc += d * d
        return math.sqrt(acc)
    if kind == "manhattan":
        acc = 0.0
        for a, b in zip(xs, ys):
            acc += abs(a - b)
        return acc
    if kind == "cosine":
        dot = 0.0
        nx = 0.0
        ny = 0.0
        for a, b in zip(xs, ys):
            dot += a * b
            nx += a * a
            ny += b * b
        nx = math.sqrt(nx)
        ny = math.sqrt(ny)
        if nx < 1e-12 or ny < 1e-12:
            logger.debug("cosine distance of a near-zero vector defined as 1.0")
            return 1.0
        return min(2.0, max(0.0, 1.0 - dot / (nx * ny)))
    raise ValueError(f"unknown pointwise metric {kind!r}")


def condensed_index(n: int, i: int, j: int) -> int:
    """Position of pair (i, j), i < j, in a condensed distance vector.

    Row-major upper-triangle order, the same layout scipy's ``pdist`` uses:
    (0,1), (0,2), ..., (0,n-1), (1,2), ...
    """
    if not (0 <= i < j < n):
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    return n * i - (i * (i + 1)) // 2 + (j - i - 1)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances in condensed (upper-triangle) storage.

    One value per unordered pair, diagonal implicitly zero. ``metric``
    records how the entries were computed so downstream artifacts can state
    their provenance.
    """

    n: int
    condensed: np.ndarray
    metric: MetricConfig = field(default_factory=MetricConfig)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        vec = np.asarray(self.condensed, dtype=float)
        expect = self.n * (self.n - 1) // 2
        if vec.shape != (expect,):
            raise ValueError(
                f"condensed vector for n={self.n} must have length {expect}, "
                f"got shape {vec.shape}"
            )
        if np.any(np.isnan(vec)) or np.any(vec < 0):
            raise ValueError("distances must be non-negative and not NaN")
        vec.setflags(write=False)
        object.__setattr__(self, "condensed", vec)

    def get(self, i: int, j: int) -> float:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"index out of range for n={self.n}")
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        return float(self.condensed[condensed_index(self.n, i, j)])

    def to_square(self) -> np.ndarray:
        sq = np.zeros((self.n, self.n), dtype=float)
        pos = 0
        for i in range(self.n - 1):
            row = self.condensed[pos:pos + self.n - 1 - i]
            sq[i, i + 1:] = row
            sq[i + 1:, i] = row
            pos += self.n - 1 - i
        return sq

    def medoid(self, members=None) -> int:
        """Index minimizing the summed distance to the given members.

        ``members`` defaults to everything. Ties go to the lowest index.
        """
        idx = list(range(self.n)) if members is None else sorted(set(int(m) for m in members))
        if not idx:
            raise ValueError("members must be non-empty")
        best_i = idx[0]
        best_sum = math.inf
        for i in idx:
            s = 0.0
            for j in idx:
                if i != j:
                    s += self.get(i, j)
            if s < best_sum:
                best_sum = s
                best_i = i
        return best_i


def pairwise_matrix(dataset, metric: MetricConfig | None = None) -> DistanceMatrix:
    """All pairwise distances for a dataset under one metric config.

    Pairs are computed serially in condensed order, so the result is
    byte-reproducible; a parallel fill would be admissible only if it wrote
    each entry exactly once and matched the serial result bit for bit.

    Shape metrics on a raw dataset almost always mean a missing
    normalization step; that raises ``UnnormalizedDataWarning`` but still
    computes, because magnitude-based comparison is occasionally wanted on
    purpose. Cosine is scale-invariant per curve, so raw data does not
    warrant the warning there.
    """
    cfg = metric or MetricConfig()
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 curves for a distance matrix")
    if getattr(dataset, "normalization", None) == "raw" and cfg.kind != "cosine":
        warnings.warn(
            f"computing {cfg.kind} distances on unnormalized curves; "
            "shape comparison normally requires z-normalization first",
            UnnormalizedDataWarning,
            stacklevel=2,
        )
    rows = [c.values for c in dataset]
    out = np.empty(n * (n - 1) // 2, dtype=float)
    pos = 0
    for i in range(n - 1):
        xi = rows[i]
        for j in range(i + 1, n):
            try:
                out[pos] = cfg.distance(xi, rows[j])
            except ValueError as e:
                raise ValueError(f"distance failed for pair ({i}, {j}): {e}") from e
            pos += 1
    return DistanceMatrix(n, out, cfg)


def save_matrix(matrix: DistanceMatrix, path) -> None:
    """Write a matrix as a one-line JSON header plus one value per line.

    Floats are serialized with ``repr`` (shortest round-trip form), so the
    file is byte-identical across runs for identical inputs.
    """
    header = {
        "kind": "distance-matrix",
        "n": matrix.n,
        "metric": matrix.metric.kind,
        "window": matrix.metric.window,
    }
    with open(path, "w") as f:
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for v in matrix.condensed:
            f.write(repr(float(v)) + "\n")


def load_matrix(path) -> DistanceMatrix:
    with open(path) as f:
        header = json.loads(f.readline())
        if header.get("kind") != "distance-matrix":
            raise ValueError(f"{path} is not a distance matrix dump")
        n = int(header["n"])
        vec = np.array([float(line) for line in f if line.strip()], dtype=float)
    cfg = MetricConfig(header["metric"], int(header["window"]))
    return DistanceMatrix(n, vec, cfg)
