"""Growing and cutting a dendrogram over synthetic household days.

Generates three archetypes' worth of noisy, time-shifted curves, builds the
DTW distance matrix once, merges bottom-up under average linkage, and then
reads cluster structure straight off the tree: the merge trace, the big gap
in merge heights, and cuts at several k against the known labels.

Run:  python demos/hierarchy_tour.py
"""

from collections import Counter

from loadclust import (MetricConfig, SyntheticSpec, build_dendrogram, cut,
                       generate_synthetic, normalize_dataset, pairwise_matrix)

# --- data: 3 archetypes x 8 curves, jittered and shifted ------------------------

spec = SyntheticSpec.default(3, 8, noise_std=0.1, shift_range=2)
raw, truth = generate_synthetic(spec, seed=0)
dataset = normalize_dataset(raw, "per-curve")
n = len(dataset)
print(f"{n} curves from {len(spec.archetypes)} archetypes")

# --- one matrix, reused for everything below ------------------------------------

metric = MetricConfig("dtw", window=4)
matrix = pairwise_matrix(dataset, metric)
print(f"pairwise {metric.label()} matrix: {len(matrix.condensed)} entries")
print()

# --- the merge trace -------------------------------------------------------------

tree = build_dendrogram(matrix, linkage="average")
print("last 6 merges (cluster ids >= n are earlier merges):")
print(f"{'step':>4} {'left':>5} {'right':>5} {'height':>9} {'size':>5}")
for i, step in enumerate(tree.merges[-6:], start=len(tree.merges) - 6):
    print(f"{i:>4} {step.left:>5} {step.right:>5} "
          f"{step.height:>9.4f} {step.new_size:>5}")

# heights never decrease, so gaps between consecutive merge heights hint at
# where real structure stops and forced gluing begins
heights = [s.height for s in tree.merges]
gaps = sorted(((heights[i + 1] - heights[i], i)
               for i in range(len(heights) - 1)), reverse=True)
print()
for gap, at in gaps[:2]:
    print(f"height gap {gap:.4f} after merge {at} "
          f"(cutting there leaves {n - at - 1} clusters)")
print("the raw-gap heuristic is ambiguous here, 2 vs 3; method_faceoff.py")
print("settles it properly with a validity-index sweep")
print()

# --- cutting at several k ---------------------------------------------------------


def purity(labels, archetype_of):
    """Fraction of curves whose cluster's majority archetype matches theirs."""
    hit = 0
    for c in set(labels):
        members = [int(archetype_of[i]) for i in range(len(labels))
                   if labels[i] == c]
        hit += Counter(members).most_common(1)[0][1]
    return hit / len(labels)


for k in (2, 3, 4, 6):
    result = cut(tree, k, matrix)
    sizes = sorted(Counter(result.assignments).values(), reverse=True)
    print(f"k={k}: sizes {sizes}, "
          f"purity {purity(result.assignments, truth):.2f}, "
          f"medoid cost {result.objective:.3f}")
print("\nk=3 is pure, and larger k only splits real groups into fragments")
print()

# --- linkages agree on easy data and split on hard data ----------------------------

# at this noise level all three linkages find the same clean partition; crank
# the noise until the archetypes nearly touch and they come apart
hard_raw, hard_truth = generate_synthetic(
    SyntheticSpec.default(3, 8, noise_std=0.35, shift_range=3), seed=0)
hard = pairwise_matrix(normalize_dataset(hard_raw, "per-curve"), metric)

print("k=3 cuts on a much noisier draw of the same archetypes:")
for linkage in ("single", "complete", "average"):
    t = build_dendrogram(hard, linkage=linkage)
    r = cut(t, 3, hard)
    sizes = sorted(Counter(r.assignments).values(), reverse=True)
    print(f"{linkage:>9}: sizes {sizes}, "
          f"purity {purity(r.assignments, hard_truth):.2f}")
print("\nsingle linkage chains through shift-blurred neighbors until almost")
print("everything is one blob plus outlier singletons; average is the default")
print("because it resists both chaining and single-outlier vetoes")
