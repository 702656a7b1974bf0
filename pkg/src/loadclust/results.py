"""Flat clustering results and fit hyperparameters, shared by all methods.

Every clustering path in the package (hierarchy cuts and the partitional
fits) funnels into one ClusteringResult type so evaluation and the CLI can
treat methods uniformly. The only method-dependent part is what a prototype
is: medoid methods point at an actual member curve by index, centroid
methods carry an explicit 24-point mean vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .curves import HOURS_PER_DAY
from .distance import MetricConfig

#: What ``ClusteringResult.prototypes`` holds.
MEDOID_INDEX = "medoid-index"
VECTOR = "vector"


@dataclass(frozen=True)
class ClusteringResult:
    """One flat k-clustering of a dataset.

    ``assignments[i]`` is the cluster label of curve i; labels cover 0..k-1
    with no empty cluster. ``prototypes`` are medoid indices into the
    dataset when ``prototype_kind`` is "medoid-index" (hierarchy cuts,
    k-medoids) and 24-point vectors when it is "vector" (k-means, mixture
    means).

    ``objective`` is the method's own figure of merit: total within-cluster
    cost for k-means and k-medoids (lower is better), final average
    log-likelihood for the mixture model (higher is better), and total
    member-to-medoid distance for hierarchy cuts. ``trace`` records the
    per-iteration objective of the selected run, for convergence checks.
    ``seed`` is None for deterministic methods that draw nothing.
    """

    method: str
    k: int
    assignments: tuple
    prototypes: tuple
    prototype_kind: str
    objective: float
    iterations: int
    converged: bool
    seed: int | None = None
    metric: MetricConfig | None = None
    linkage: str | None = None
    init: str | None = None
    trace: tuple = ()

    def __post_init__(self):
        labels = tuple(int(a) for a in self.assignments)
        if not labels:
            raise ValueError("assignments must be non-empty")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        seen = set()
        for i, a in enumerate(labels):
            if not (0 <= a < self.k):
                raise ValueError(f"assignment {a} at index {i} outside [0, {self.k})")
            seen.add(a)
        if len(seen) != self.k:
            missing = sorted(set(range(self.k)) - seen)
            raise ValueError(f"empty cluster(s): {missing}")

        if self.prototype_kind not in (MEDOID_INDEX, VECTOR):
            raise ValueError(f"unknown prototype kind {self.prototype_kind!r}")
        protos = tuple(self.prototypes)
        if len(protos) != self.k:
            raise ValueError(f"need {self.k} prototypes, got {len(protos)}")
        if self.prototype_kind == MEDOID_INDEX:
            protos = tuple(int(p) for p in protos)
            for p in protos:
                if not (0 <= p < len(labels)):
                    raise ValueError(f"medoid index {p} out of range")
        else:
            protos = tuple(tuple(float(v) for v in p) for p in protos)
            for p in protos:
                if len(p) != HOURS_PER_DAY:
                    raise ValueError("prototype vectors must have 24 points")
                if not all(math.isfinite(v) for v in p):
                    raise ValueError("non-finite prototype vector")
        if not math.isfinite(self.objective):
            raise ValueError("objective must be finite")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        object.__setattr__(self, "assignments", labels)
        object.__setattr__(self, "prototypes", protos)
        object.__setattr__(self, "trace", tuple(float(t) for t in self.trace))

    def descriptor(self) -> dict:
        """Method descriptor embedded in exports: algorithm plus the knobs
        that determine the result."""
        d = {"algorithm": self.method, "prototype_kind": self.prototype_kind}
        if self.metric is not None:
            d["metric"] = self.metric.kind
            d["window"] = self.metric.window
        if self.linkage is not None:
            d["linkage"] = self.linkage
        if self.init is not None:
            d["init"] = self.init
        return d


@dataclass(frozen=True)
class FitOptions:
    """Hyperparameters shared by the partitional fits.

    ``covariance_regularizer`` and ``covariance_kind`` only matter for the
    Gaussian mixture; the rest apply to every method. Restart r of a fit
    seeds its generator with ``seed + r``.
    """

    k: int
    seed: int = 0
    max_iterations: int = 300
    tolerance: float = 1e-6
    covariance_regularizer: float = 1e-6
    covariance_kind: str = "diagonal"
    restarts: int = 10

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.tolerance > 0):
            raise ValueError("tolerance must be > 0")
        if not (self.covariance_regularizer > 0):
            raise ValueError("covariance_regularizer must be > 0")
        if self.covariance_kind not in ("diagonal", "full"):
            raise ValueError(
                f"covariance_kind must be 'diagonal' or 'full', "
                f"got {self.covariance_kind!r}"
            )
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def result_to_json(result: ClusteringResult,
                   extra_method_fields: dict | None = None) -> str:
    """Serialize a result to its canonical JSON form.

    Keys are sorted and floats use their shortest round-trip repr (the json
    module's default), so equal results always serialize to equal bytes.
    ``extra_method_fields`` lets a caller enrich the method descriptor with
    provenance it alone knows (e.g. which normalization mode produced the
    dataset).
    """
    protos: list
    if result.prototype_kind == MEDOID_INDEX:
        protos = list(result.prototypes)
    else:
        protos = [list(p) for p in result.prototypes]
    desc = result.descriptor()
    for key, value in (extra_method_fields or {}).items():
        if key in desc:
            raise ValueError(f"extra method field {key!r} shadows a descriptor key")
        desc[key] = value
    doc = {
        "method": desc,
        "k": result.k,
        "seed": result.seed,
        "converged": result.converged,
        "iterations": result.iterations,
        "assignments": list(result.assignments),
        "prototypes": protos,
        "objective": result.objective,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_result(result: ClusteringResult, path,
                extra_method_fields: dict | None = None) -> None:
    with open(path, "w") as f:
        f.write(result_to_json(result, extra_method_fields))


def load_result(path) -> ClusteringResult:
    """Rebuild a result from its JSON export.

    The trace is not serialized, so round-tripped results compare equal on
    everything except ``trace``.
    """
    with open(path) as f:
        doc = json.load(f)
    desc = doc["method"]
    metric = None
    if "metric" in desc:
        metric = MetricConfig(desc["metric"], desc.get("window", 4))
    kind = desc["prototype_kind"]
    if kind == MEDOID_INDEX:
        protos = tuple(int(p) for p in doc["prototypes"])
    else:
        protos = tuple(tuple(p) for p in doc["prototypes"])
    return ClusteringResult(
        method=desc["algorithm"],
        k=int(doc["k"]),
        assignments=tuple(doc["assignments"]),
        prototypes=protos,
        prototype_kind=kind,
        objective=float(doc["objective"]),
        iterations=int(doc["iterations"]),
        converged=bool(doc["converged"]),
        seed=doc["seed"],
        metric=metric,
        linkage=desc.get("linkage"),
        init=desc.get("init"),
    )
