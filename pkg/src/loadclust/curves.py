"""Daily load curves: types, normalization, ingestion, and synthesis.

A daily load curve (DLC) is the vector of 24 hourly consumption readings for
one household on one calendar day. Clustering compares curve *shapes*, so
curves are z-normalized (zero mean, unit variance) before any distance is
computed; magnitude differences between households would otherwise dominate
every shape comparison.

All functions here are pure: inputs are never mutated and every result is a
deterministic function of its arguments (plus the seed, for the synthetic
generator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date
from datetime import timedelta

import numpy as np

HOURS_PER_DAY = 24

#: Normalization regimes a Dataset can be tagged with.
RAW = "raw"
PER_CURVE = "per-curve"
PER_HOUR = "per-hour"

_NORMALIZATIONS = (RAW, PER_CURVE, PER_HOUR)


@dataclass(frozen=True)
class LoadCurve:
    """One day of hourly consumption for one household.

    ``values`` are kWh when raw and dimensionless z-units once normalized.
    ``degenerate`` marks a zero-variance curve that was force-normalized to
    all zeros instead of being rejected (flat consumption days are real
    data; dropping them silently would bias every clustering downstream).
    """

    values: tuple
    household_id: str
    date: Date
    normalized: bool = False
    degenerate: bool = False

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != HOURS_PER_DAY:
            raise ValueError(
                f"load curve needs exactly {HOURS_PER_DAY} values, got {len(vals)}"
            )
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(
                f"non-finite value in curve {self.household_id}/{self.date}"
            )
        if self.degenerate:
            if not self.normalized:
                raise ValueError("degenerate flag only applies to normalized curves")
            if any(v != 0.0 for v in vals):
                raise ValueError("degenerate curve must be all zeros")
        object.__setattr__(self, "values", vals)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of load curves sharing one normalization regime.

    Curve order is load-bearing: index ``i`` refers to the same curve in
    every artifact derived from the dataset (distance matrices, cluster
    assignments, prototype indices).
    """

    curves: tuple
    normalization: str = RAW

    def __post_init__(self):
        curves = tuple(self.curves)
        if self.normalization not in _NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        expect = self.normalization != RAW
        for i, c in enumerate(curves):
            if c.normalized != expect:
                raise ValueError(
                    f"curve {i} normalization state does not match dataset tag "
                    f"{self.normalization!r}"
                )
        object.__setattr__(self, "curves", curves)

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def __getitem__(self, i):
        return self.curves[i]

    def to_matrix(self) -> np.ndarray:
        """Stack curve values into an (n, 24) float array."""
        return np.asarray([c.values for c in self.curves], dtype=float)


@dataclass(frozen=True)
class RawReading:
    """One hourly meter reading, the unit of CSV ingestion."""

    household_id: str
    date: Date
    hour: int
    kwh: float

    def __post_init__(self):
        if not (0 <= int(self.hour) <= 23):
            raise ValueError(f"hour must be in [0, 23], got {self.hour}")
        kwh = float(self.kwh)
        if not math.isfinite(kwh) or kwh < 0:
            raise ValueError(f"kwh must be finite and >= 0, got {self.kwh}")
        object.__setattr__(self, "hour", int(self.hour))
        object.__setattr__(self, "kwh", kwh)


def z_normalize(curve: LoadCurve, epsilon: float = 1e-12) -> LoadCurve:
    """Z-normalize one curve: subtract the mean, divide by the std.

    Uses the *population* standard deviation (divide by 24, not 23); a fixed
    length-24 signal is treated as the whole population, not a sample. When
    the std falls below ``epsilon`` the curve is flat: it is mapped to all
    zeros and flagged degenerate rather than rejected.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if curve.normalized:
        raise ValueError("curve is already normalized")
    vals = np.asarray(curve.values, dtype=float)
    mean = float(vals.mean())
    std = float(vals.std())  # ddof=0, population std
    if std < epsilon:
        zeros = (0.0,) * HOURS_PER_DAY
        return LoadCurve(zeros, curve.household_id, curve.date,
                         normalized=True, degenerate=True)
    z = (vals - mean) / std
    return LoadCurve(tuple(float(v) for v in z), curve.household_id, curve.date,
                     normalized=True, degenerate=False)


def normalize_dataset(dataset: Dataset, mode: str = PER_CURVE,
                      epsilon: float = 1e-12) -> Dataset:
    """Normalize a raw dataset, either per curve or per hour column.

    ``per-curve`` z-scores each curve independently (the right precondition
    for shape-based distances). ``per-hour`` z-scores each hour index across
    all curves, which preserves within-day magnitude structure; a
    zero-variance hour column maps to zeros without flagging any curve
    degenerate.
    """
    if mode not in (PER_CURVE, PER_HOUR):
        raise ValueError(f"unknown normalization mode {mode!r}")
    if dataset.normalization != RAW:
        raise ValueError("dataset is already normalized")
    if len(dataset) == 0:
        raise ValueError("cannot normalize an empty dataset")

    if mode == PER_CURVE:
        curves = tuple(z_normalize(c, epsilon) for c in dataset)
        return Dataset(curves, PER_CURVE)

    m = dataset.to_matrix()
    mean = m.mean(axis=0)
    std = m.std(axis=0)  # population std per hour column
    flat = std < epsilon
    safe = np.where(flat, 1.0, std)
    z = (m - mean) / safe
    z[:, flat] = 0.0
    curves = tuple(
        LoadCurve(tuple(float(v) for v in row), c.household_id, c.date,
                  normalized=True, degenerate=False)
        for row, c in zip(z, dataset)
    )
    return Dataset(curves, PER_HOUR)


def reshape_readings(readings) -> tuple[Dataset, int]:
    """Group hourly readings into daily load curves.

    A (household, date) group becomes a curve only when it holds exactly one
    reading for every hour 0-23. Duplicate (household, date, hour) entries
    keep the last occurrence in input order; incomplete days (including
    23-hour DST days) are dropped and counted, never imputed.

    Returns the raw dataset, sorted by (household_id, date), plus the number
    of dropped incomplete days.
    """
    groups: dict = {}
    for r in readings:
        groups.setdefault((r.household_id, r.date), {})[r.hour] = r.kwh

    curves = []
    dropped = 0
    for (hid, day), hours in sorted(groups.items()):
        if len(hours) == HOURS_PER_DAY:
            vals = tuple(hours[h] for h in range(HOURS_PER_DAY))
            curves.append(LoadCurve(vals, hid, day))
        else:
            dropped += 1
    return Dataset(tuple(curves), RAW), dropped


# --- synthetic data ---------------------------------------------------------

def _bump(center: float, width: float, amplitude: float = 1.5,
          base: float = 0.3) -> np.ndarray:
    """Smooth consumption peak centered at an hour, circular in time."""
    h = np.arange(HOURS_PER_DAY, dtype=float)
    d = np.abs(h - center)
    d = np.minimum(d, HOURS_PER_DAY - d)
    return base + amplitude * np.exp(-0.5 * (d / width) ** 2)


def _double_peak() -> np.ndarray:
    morning = _bump(8.0, 1.6, amplitude=1.1, base=0.0)
    evening = _bump(19.0, 1.6, amplitude=1.3, base=0.0)
    return 0.3 + morning + evening


#: Named archetype templates, ordered; ``default_archetypes(k)`` takes the
#: first k. "flat" z-normalizes to a degenerate all-zero curve by design.
ARCHETYPE_ORDER = (
    "morning-peak", "evening-peak", "double-peak",
    "midday-peak", "night-owl", "flat",
)

ARCHETYPE_SHAPES = {
    "morning-peak": _bump(8.0, 2.0),
    "evening-peak": _bump(19.0, 2.0),
    "double-peak": _double_peak(),
    "midday-peak": _bump(13.0, 3.0),
    "night-owl": _bump(1.0, 2.5),
    "flat": np.full(HOURS_PER_DAY, 0.8),
}


def default_archetypes(k: int) -> tuple:
    """First ``k`` built-in archetype templates as value tuples."""
    if not (1 <= k <= len(ARCHETYPE_ORDER)):
        raise ValueError(
            f"k must be in [1, {len(ARCHETYPE_ORDER)}] for built-in archetypes"
        )
    return tuple(
        tuple(float(v) for v in ARCHETYPE_SHAPES[name])
        for name in ARCHETYPE_ORDER[:k]
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a labeled synthetic dataset.

    Each generated curve is its archetype, circularly shifted by a uniform
    integer offset in [-shift_range, shift_range], plus elementwise Gaussian
    noise of the given std.
    """

    archetypes: tuple
    curves_per_archetype: int
    noise_std: float = 0.0
    shift_range: int = 0

    def __post_init__(self):
        arch = tuple(tuple(float(v) for v in a) for a in self.archetypes)
        if len(arch) < 1:
            raise ValueError("need at least one archetype")
        for a in arch:
            if len(a) != HOURS_PER_DAY:
                raise ValueError("archetype templates must have 24 points")
        if self.curves_per_archetype < 1:
            raise ValueError("curves_per_archetype must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.shift_range < 0:
            raise ValueError("shift_range must be >= 0")
        object.__setattr__(self, "archetypes", arch)

    @classmethod
    def default(cls, k_true: int, curves_per_archetype: int,
                noise_std: float = 0.0, shift_range: int = 0) -> "SyntheticSpec":
        return cls(default_archetypes(k_true), curves_per_archetype,
                   noise_std, shift_range)


def generate_synthetic(spec: SyntheticSpec, seed: int) -> tuple[Dataset, np.ndarray]:
    """Generate a raw synthetic dataset plus its ground-truth labels.

    Deterministic for a fixed (spec, seed); the generator is NumPy's PCG64
    (``numpy.random.default_rng``). Shift offsets are drawn before noise for
    each curve, and draws are skipped entirely when the corresponding spec
    field is zero, so datasets differing only in an inactive field share the
    rest of the stream.
    """
    rng = np.random.default_rng(seed)
    base_date = Date(2024, 1, 1)
    curves = []
    labels = []
    for a, template in enumerate(spec.archetypes):
        t = np.asarray(template, dtype=float)
        for c in range(spec.curves_per_archetype):
            vals = t
            if spec.shift_range > 0:
                offset = int(rng.integers(-spec.shift_range, spec.shift_range + 1))
                vals = np.roll(vals, offset)
            if spec.noise_std > 0:
                vals = vals + rng.normal(0.0, spec.noise_std, HOURS_PER_DAY)
            curves.append(LoadCurve(
                tuple(float(v) for v in vals),
                household_id=f"arch{a:02d}",
                date=base_date + timedelta(days=c),
            ))
            labels.append(a)
    return Dataset(tuple(curves), RAW), np.asarray(labels, dtype=int)
