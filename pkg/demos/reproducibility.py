"""Everything this library writes is byte-identical across runs.

Fits the same model twice from scratch, serializes both, and compares bytes;
then round-trips a distance matrix through disk and shows the reloaded copy
feeds a sweep with zero recomputation drift. Determinism here is not
"close enough after rounding", it is the same file, byte for byte.

Run:  python demos/reproducibility.py
"""

import tempfile
from pathlib import Path

from loadclust import (MethodSpec, MetricConfig, SyntheticSpec, fit,
                       generate_synthetic, load_matrix, normalize_dataset,
                       pairwise_matrix, result_to_json, save_matrix,
                       save_sweep, sweep)

workdir = Path(tempfile.mkdtemp(prefix="repro-demo-"))


def fresh_dataset():
    raw, _ = generate_synthetic(
        SyntheticSpec.default(3, 10, noise_std=0.1, shift_range=2), seed=0)
    return normalize_dataset(raw, "per-curve")


# --- two independent fits, one byte stream ---------------------------------------

spec = MethodSpec("kmedoids")
a = result_to_json(fit(fresh_dataset(), spec, 3))
b = result_to_json(fit(fresh_dataset(), spec, 3))
print(f"two from-scratch kmedoids fits serialize identically: {a == b}")

# seeds are honest: a different seed is a genuinely different run, and the
# comparison below is on bytes, so even a 1-ulp drift would show up
c = result_to_json(fit(fresh_dataset(), MethodSpec("kmeans", seed=1), 3))
d = result_to_json(fit(fresh_dataset(), MethodSpec("kmeans", seed=2), 3))
print(f"kmeans seed=1 vs seed=2 serialize identically: {c == d}")
print()

# --- the matrix cache is exact, not approximate -----------------------------------

dataset = fresh_dataset()
matrix = pairwise_matrix(dataset, MetricConfig("dtw", window=4))
cache = workdir / "matrix.json"
save_matrix(matrix, cache)
reloaded = load_matrix(cache)
same = all(x == y for x, y in zip(matrix.condensed, reloaded.condensed))
print(f"matrix -> disk -> matrix reproduces every distance exactly: {same}")

# a sweep fed the cached matrix gives the same bytes as one that computes it
cold = workdir / "cold.csv"
warm = workdir / "warm.csv"
save_sweep(sweep(dataset, MethodSpec("ahc"), 2, 8), cold)
save_sweep(sweep(dataset, MethodSpec("ahc"), 2, 8, matrix=reloaded), warm)
print(f"cold sweep == cached-matrix sweep, byte for byte: "
      f"{cold.read_bytes() == warm.read_bytes()}")
print()

# --- why this holds ----------------------------------------------------------------

print("three rules buy this: every random draw flows from an explicit seed,")
print("every reduction runs in a fixed serial order, and floats are written")
print("with repr (shortest round-trip form), so nothing depends on thread")
print("timing, dict order, or printf rounding")
