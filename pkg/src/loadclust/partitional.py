"""Partitional baselines: K-means, K-means++, K-medoids over DTW, and a
Gaussian mixture fit by EM.

These are the methods the hierarchy is compared against. All of them are
restarted local searches: ``restarts`` independent runs are fitted with
generator seeds ``seed, seed+1, ...`` and the run with the best objective
wins (ties to the earliest restart). Every fit is deterministic for a fixed
(dataset, options), down to the bytes of the exported JSON.

The random source everywhere is ``numpy.random.default_rng``, i.e. the PCG64
generator; the seed contract is only meaningful because that algorithm is
pinned by name.

K-means and the mixture operate on the raw 24-dimensional vectors with
Euclidean geometry; K-medoids works purely from a precomputed pairwise
matrix and is the partitional method that can cluster under DTW.
"""

from __future__ import annotations

import math

import numpy as np

from .distance import DistanceMatrix, MetricConfig, pairwise_matrix
from .results import MEDOID_INDEX, VECTOR, ClusteringResult, FitOptions

INITS = ("random", "plusplus")

_COLLAPSE_WEIGHT = 1e-8


class FitError(RuntimeError):
    """A fit could not produce a usable model on any restart."""


def _checked_matrix(dataset) -> np.ndarray:
    if getattr(dataset, "normalization", None) == "raw":
        raise ValueError(
            "partitional methods require a normalized dataset; "
            "call normalize_dataset first"
        )
    return dataset.to_matrix()


def _repair_empty(labels: np.ndarray, k: int, point_cost: np.ndarray) -> np.ndarray:
    """Give every empty cluster one member.

    For each empty label (ascending) the point with the largest current
    cost (distance to its own center, ties to the lowest index) is
    reassigned to it. Each point moves at most once per repair pass, so two
    empty clusters cannot fight over the same point.
    """
    present = np.bincount(labels, minlength=k)
    if np.all(present > 0):
        return labels
    labels = labels.copy()
    cost = point_cost.astype(float).copy()
    for c in range(k):
        if present[c] > 0:
            continue
        donor = int(np.argmax(cost))
        labels[donor] = c
        present[c] = 1
        cost[donor] = -np.inf
    return labels


# --- K-means ----------------------------------------------------------------

def _plusplus_indices(X: np.ndarray, k: int, rng: np.random.Generator) -> list:
    """D²-weighted seeding: each next center is drawn with probability
    proportional to its squared distance to the nearest chosen center.

    Already-chosen positions have weight exactly 0 and can never be drawn
    again. If every remaining point coincides with a chosen center the
    weights all vanish; the lowest unchosen index is then taken, with no
    draw, so the fallback is deterministic.
    """
    n = len(X)
    chosen = [int(rng.integers(n))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            remaining = [i for i in range(n) if i not in set(chosen)]
            chosen.append(remaining[0])
        else:
            chosen.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, np.sum((X - X[chosen[-1]]) ** 2, axis=1))
    return chosen


def _kmeans_single(X: np.ndarray, k: int, seed: int, init: str,
                   max_iterations: int, tolerance: float):
    """One Lloyd run. Returns (labels, centroids, trace, iterations, converged)."""
    n = len(X)
    rng = np.random.default_rng(seed)
    if init == "random":
        idx = rng.choice(n, size=k, replace=False)
        centroids = X[np.sort(idx)].copy()
    else:
        centroids = X[_plusplus_indices(X, k, rng)].copy()

    labels = None
    trace = []
    converged = False
    iterations = 0
    for _ in range(max_iterations):
        iterations += 1
        # assignment: nearest centroid, ties to the lowest centroid index
        d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        new_labels = _repair_empty(new_labels, k,
                                   d2[np.arange(n), new_labels])
        # update: coordinate-wise means
        for c in range(k):
            centroids[c] = X[new_labels == c].mean(axis=0)
        objective = float(np.sum((X - centroids[new_labels]) ** 2))
        trace.append(objective)

        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            labels = new_labels
            break
        if len(trace) >= 2 and trace[-2] - trace[-1] < tolerance:
            converged = True
            labels = new_labels
            break
        labels = new_labels
    return labels, centroids, trace, iterations, converged


def kmeans(dataset, options: FitOptions, init: str = "random") -> ClusteringResult:
    """Lloyd's K-means under Euclidean distance, best of ``restarts`` runs.

    ``init`` is either "random" (k distinct curve indices as the starting
    centroids) or "plusplus" (D²-weighted seeding). Empty clusters are
    repaired each iteration by donating the point currently farthest from
    its centroid, which keeps the per-iteration objective non-increasing:
    the donated point's cost can only drop once its new cluster's centroid
    is recomputed onto it.
    """
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}, got {init!r}")
    X = _checked_matrix(dataset)
    n = len(X)
    if options.k > n:
        raise ValueError(f"k={options.k} exceeds dataset size {n}")

    best = None
    for r in range(options.restarts):
        run = _kmeans_single(X, options.k, options.seed + r, init,
                             options.max_iterations, options.tolerance)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    labels, centroids, trace, iterations, converged = best
    return ClusteringResult(
        method="kmeans",
        k=options.k,
        assignments=tuple(int(a) for a in labels),
        prototypes=tuple(tuple(float(v) for v in c) for c in centroids),
        prototype_kind=VECTOR,
        objective=trace[-1],
        iterations=iterations,
        converged=converged,
        seed=options.seed,
        metric=MetricConfig("euclidean"),
        init=init,
        trace=tuple(trace),
    )


# --- K-medoids --------------------------------------------------------------

def _kmedoids_single(S: np.ndarray, k: int, seed: int,
                     max_iterations: int):
    """One Voronoi-iteration run over a square distance matrix ``S``."""
    n = len(S)
    rng = np.random.default_rng(seed)
    medoids = np.sort(rng.choice(n, size=k, replace=False))

    trace = []
    converged = False
    iterations = 0
    labels = None
    for _ in range(max_iterations):
        iterations += 1
        # assignment: nearest medoid; medoids are kept sorted ascending so
        # argmin's first-occurrence rule is the lowest-medoid-index tie rule
        d = S[:, medoids]
        labels = np.argmin(d, axis=1)
        labels = _repair_empty(labels, k, d[np.arange(n), labels])
        # update: each cluster's medoid is the member with the smallest
        # summed in-cluster distance, ties to the lowest index
        by_cluster = np.empty(k, dtype=int)
        cost = 0.0
        for c in range(k):
            members = np.flatnonzero(labels == c)
            within = S[np.ix_(members, members)].sum(axis=1)
            best_pos = int(np.argmin(within))
            by_cluster[c] = members[best_pos]
            cost += float(within[best_pos])
        trace.append(cost)
        # re-sorted for the next assignment round, so the argmin tie rule
        # stays "lowest medoid index"
        new_medoids = np.sort(by_cluster)
        if np.array_equal(new_medoids, medoids):
            converged = True
            break
        medoids = new_medoids

    if not converged:
        # align labels with the final medoid set
        medoids = new_medoids
        d = S[:, medoids]
        labels = np.argmin(d, axis=1)
        labels = _repair_empty(labels, k, d[np.arange(n), labels])
        trace.append(float(d[np.arange(n), labels].sum()))
    return labels, medoids, trace, iterations, converged


def kmedoids(dataset, options: FitOptions,
             metric: MetricConfig | None = None,
             matrix: DistanceMatrix | None = None) -> ClusteringResult:
    """Voronoi-iteration K-medoids over a precomputed distance matrix.

    The matrix is computed from ``metric`` (default: dtw, window 4) unless
    one is supplied directly; either way clustering never touches the raw
    vectors again, which is what makes a non-Euclidean metric affordable
    here. Prototypes are medoid indices into the dataset.
    """
    X = _checked_matrix(dataset)
    n = len(X)
    if options.k > n:
        raise ValueError(f"k={options.k} exceeds dataset size {n}")
    if matrix is None:
        matrix = pairwise_matrix(dataset, metric or MetricConfig())
    elif matrix.n != n:
        raise ValueError(f"matrix is for {matrix.n} curves, dataset has {n}")
    S = matrix.to_square()

    best = None
    for r in range(options.restarts):
        run = _kmedoids_single(S, options.k, options.seed + r,
                               options.max_iterations)
        if best is None or run[2][-1] < best[2][-1]:
            best = run
    labels, medoids, trace, iterations, converged = best

    # label c is the cluster of medoids[c]: labels are argmin positions into
    # the sorted medoid array, so no relabeling is needed
    return ClusteringResult(
        method="kmedoids",
        k=options.k,
        assignments=tuple(int(a) for a in labels),
        prototypes=tuple(int(m) for m in medoids),
        prototype_kind=MEDOID_INDEX,
        objective=trace[-1],
        iterations=iterations,
        converged=converged,
        seed=options.seed,
        metric=matrix.metric,
        trace=tuple(trace),
    )


# --- Gaussian mixture -------------------------------------------------------

def _log_densities(X, weights, means, covs, kind):
    """Per-point, per-component log(weight * N(x | mean, cov)).

    Diagonal covariances are (k, d) variance rows; full covariances are
    (k, d, d) and evaluated through their Cholesky factors.
    """
    n, d = X.shape
    k = len(weights)
    out = np.empty((n, k))
    log2pi = math.log(2.0 * math.pi)
    for c in range(k):
        diff = X - means[c]
        if kind == "diagonal":
            var = covs[c]
            quad = np.sum(diff * diff / var, axis=1)
            logdet = float(np.sum(np.log(var)))
        else:
            L = np.linalg.cholesky(covs[c])
            y = np.linalg.solve(L, diff.T)
            quad = np.sum(y * y, axis=0)
            logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        out[:, c] = math.log(weights[c]) - 0.5 * (d * log2pi + logdet + quad)
    return out


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    m = a.max(axis=1)
    return m + np.log(np.sum(np.exp(a - m[:, None]), axis=1))


def _gmm_init(X, k, seed, options):
    """Moment-match initial parameters from one seeded K-means++ run."""
    labels, centroids, _, _, _ = _kmeans_single(
        X, k, seed, "plusplus", options.max_iterations, options.tolerance)
    n, d = X.shape
    reg = options.covariance_regularizer
    weights = np.bincount(labels, minlength=k).astype(float) / n
    means = centroids.copy()
    if options.covariance_kind == "diagonal":
        covs = np.empty((k, d))
        for c in range(k):
            covs[c] = X[labels == c].var(axis=0) + reg
    else:
        covs = np.empty((k, d, d))
        for c in range(k):
            diff = X[labels == c] - means[c]
            covs[c] = (diff.T @ diff) / len(diff) + reg * np.eye(d)
    return weights, means, covs


def _reinit_collapsed(X, weights, means, covs, kind, reg, collapsed, lse):
    """Respawn collapsed components on the lowest-density points."""
    order = np.argsort(lse, kind="stable")
    global_var = X.var(axis=0) + reg
    for pos, c in enumerate(sorted(collapsed)):
        point = X[int(order[pos % len(order)])]
        means[c] = point
        if kind == "diagonal":
            covs[c] = global_var.copy()
        else:
            covs[c] = np.diag(global_var)
        weights[c] = 1.0 / len(weights)
    weights /= weights.sum()
    return weights, means, covs


def _gmm_single(X, k, seed, options):
    """One EM run. Returns None on numerical failure."""
    n, d = X.shape
    kind = options.covariance_kind
    reg = options.covariance_regularizer
    try:
        weights, means, covs = _gmm_init(X, k, seed, options)
    except np.linalg.LinAlgError:
        return None

    trace = []
    prev_ll = -math.inf
    converged = False
    reinits = 0
    iterations = 0
    final = None
    for _ in range(options.max_iterations):
        iterations += 1
        try:
            logp = _log_densities(X, weights, means, covs, kind)
        except (np.linalg.LinAlgError, ValueError):
            return None
        lse = _logsumexp_rows(logp)
        avg_ll = float(lse.mean())
        if not math.isfinite(avg_ll):
            return None
        resp = np.exp(logp - lse[:, None])
        assignments = np.argmax(logp, axis=1)  # first occurrence: lowest index wins ties
        trace.append(avg_ll)
        final = (weights.copy(), means.copy(), covs.copy(), assignments, avg_ll)

        empty = set(range(k)) - set(int(a) for a in assignments)
        collapsed = set(np.flatnonzero(weights < _COLLAPSE_WEIGHT)) | empty
        if collapsed:
            weights, means, covs = _reinit_collapsed(
                X, weights, means, covs, kind, reg, collapsed, lse)
            reinits += 1
            if reinits > 1:
                # a second collapse means this model will not settle
                converged = False
                try:
                    logp = _log_densities(X, weights, means, covs, kind)
                except (np.linalg.LinAlgError, ValueError):
                    return None
                lse = _logsumexp_rows(logp)
                avg_ll = float(lse.mean())
                if not math.isfinite(avg_ll):
                    return None
                assignments = np.argmax(logp, axis=1)
                if set(int(a) for a in assignments) != set(range(k)):
                    return None
                trace.append(avg_ll)
                final = (weights, means, covs, assignments, avg_ll)
                break
            prev_ll = -math.inf
            continue

        if avg_ll - prev_ll < options.tolerance and prev_ll > -math.inf:
            converged = True
            break
        prev_ll = avg_ll

        # M-step
        nk = resp.sum(axis=0)
        weights = nk / n
        means = (resp.T @ X) / nk[:, None]
        if kind == "diagonal":
            covs = np.empty((k, d))
            for c in range(k):
                diff = X - means[c]
                covs[c] = (resp[:, c] @ (diff * diff)) / nk[c] + reg
        else:
            covs = np.empty((k, d, d))
            for c in range(k):
                diff = X - means[c]
                covs[c] = (diff.T * resp[:, c]) @ diff / nk[c] + reg * np.eye(d)

    weights, means, covs, assignments, avg_ll = final
    if set(int(a) for a in assignments) != set(range(k)):
        # the iteration budget ran out mid-collapse; no usable model
        return None
    return assignments, means, trace, iterations, converged, avg_ll


def gmm_em(dataset, options: FitOptions) -> ClusteringResult:
    """Gaussian mixture over the 24-dimensional curves, fit by EM.

    Initialization is moment-matched from one seeded K-means++ run per
    restart. The E-step works in log space with log-sum-exp stabilization;
    every M-step adds ``covariance_regularizer`` to the variances (or the
    covariance diagonal), so the likelihood ascent holds only up to that
    perturbation. A component whose weight falls below 1e-8 or that owns no
    argmax point is respawned once on the lowest-density point; if collapse
    recurs the run is kept but marked non-converged. A restart whose
    log-likelihood turns non-finite is discarded in favor of the next one;
    if every restart fails, FitError is raised.

    Assignments are the argmax responsibilities; prototypes are the
    component means; the objective is the final average log-likelihood
    (higher is better, unlike the other methods).
    """
    X = _checked_matrix(dataset)
    n = len(X)
    if options.k > n:
        raise ValueError(f"k={options.k} exceeds dataset size {n}")

    best = None
    for r in range(options.restarts):
        run = _gmm_single(X, options.k, options.seed + r, options)
        if run is None:
            continue
        if best is None or run[5] > best[5]:
            best = run
    if best is None:
        raise FitError(
            f"gaussian mixture failed on all {options.restarts} restarts "
            "(non-finite log-likelihood)"
        )
    assignments, means, trace, iterations, converged, avg_ll = best
    return ClusteringResult(
        method="gmm",
        k=options.k,
        assignments=tuple(int(a) for a in assignments),
        prototypes=tuple(tuple(float(v) for v in m) for m in means),
        prototype_kind=VECTOR,
        objective=avg_ll,
        iterations=iterations,
        converged=converged,
        seed=options.seed,
        metric=MetricConfig("euclidean"),
        init="plusplus",
        trace=tuple(trace),
    )
