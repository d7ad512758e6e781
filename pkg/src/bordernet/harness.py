"""Benchmark harness: repeated paired trainings and bootstrap statistics.

The experiment protocol: per cycle, train one baseline model and one
filter-bank model on the clean training split (shared batch order,
independent weight draws), then evaluate both on the test split occluded
by every requested (kind, w, s) pattern.  Training never sees occluded
images, so a single training per model per cycle serves all cells.

Per-cell improvement is summarized as the sample median of per-cycle
accuracy ratios 100 * acc_bordernet / acc_lenet5, with a percentile
bootstrap confidence interval over paired resamples.  The alternative
ratio-of-means statistic is available via ``statistic``.

Cycles are independent given their seeds and could run concurrently;
this implementation runs them sequentially and aggregates in cycle
order so floating-point reductions are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import nn
from .datasets import RAW, LabeledSet, load_dataset, normalize
from .vision import GRID, STRIPES, OcclusionSpec, occlude

MEDIAN_OF_RATIOS = "median_of_ratios"
RATIO_OF_MEANS = "ratio_of_means"
STATISTICS = (MEDIAN_OF_RATIOS, RATIO_OF_MEANS)

BOTH = "both"
KINDS = (STRIPES, GRID)

GRID_RANGE = range(1, 11)  # benchmark cells live in [1,10] x [1,10]

# Enumeration cap for the exhaustive bootstrap (n**n grows fast).
EXHAUSTIVE_LIMIT = 2_000_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run."""

    dataset: str = "mnist"
    kind: str = STRIPES
    cells: tuple[tuple[int, int], ...] = ((1, 1),)
    full_grid: bool = False
    cycles: int = 100
    base_seed: int = 42
    epochs: int = 10
    batch_size: int = 64
    train_limit: int | None = None
    resamples: int | None = 100_000
    statistic: str = MEDIAN_OF_RATIOS
    bordernet_mode: str = nn.BANK
    data_dir: str | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS + (BOTH,):
            raise ValueError(f"kind must be one of {KINDS + (BOTH,)}, got {self.kind!r}")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be >= 1")
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}")
        if self.train_limit is not None and self.train_limit < 1:
            raise ValueError("train_limit must be >= 1 when set")
        if not self.full_grid:
            for w, s in self.cells:
                if w not in GRID_RANGE or s not in GRID_RANGE:
                    raise ValueError(f"cell ({w}, {s}) outside [1,10]x[1,10]")

    def expanded_cells(self) -> tuple[tuple[str, int, int], ...]:
        """The (kind, w, s) triples this run covers, in evaluation order."""
        kinds = KINDS if self.kind == BOTH else (self.kind,)
        if self.full_grid:
            ws = tuple((w, s) for w in GRID_RANGE for s in GRID_RANGE)
        else:
            ws = tuple(self.cells)
        return tuple((k, w, s) for k in kinds for (w, s) in ws)


@dataclass(frozen=True)
class CellResult:
    """Aggregated outcome of one occlusion cell across all cycles."""

    dataset: str
    kind: str
    w: int
    s: int
    pairs: np.ndarray  # (cycles, 2): column 0 lenet5, column 1 bordernet
    imp_median_pct: float
    ci_low_pct: float
    ci_high_pct: float

    def __post_init__(self):
        if self.pairs.ndim != 2 or self.pairs.shape[1] != 2 or not len(self.pairs):
            raise ValueError(f"pairs must be (cycles, 2), got {self.pairs.shape}")

    @property
    def cycles(self) -> int:
        return len(self.pairs)

    @property
    def mean_lenet5(self) -> float:
        return float(self.pairs[:, 0].mean())

    @property
    def std_lenet5(self) -> float:
        return float(self.pairs[:, 0].std())

    @property
    def mean_bordernet(self) -> float:
        return float(self.pairs[:, 1].mean())

    @property
    def std_bordernet(self) -> float:
        return float(self.pairs[:, 1].std())


# ---------------------------------------------------------------------------
# Seeding scheme: cycle i derives three streams from base_seed + i, so the
# two models share their batch order but draw weights independently.

def cycle_seed(base_seed: int, cycle: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed + cycle, stream])


SHUFFLE_STREAM = 0
LENET_STREAM = 1
BORDERNET_STREAM = 2


def _resolve_data(config: ExperimentConfig, data) -> tuple[LabeledSet, LabeledSet]:
    if data is not None:
        train_set, test_set = data
    else:
        if config.data_dir is None:
            raise ValueError("config.data_dir is unset and no data was passed in")
        train_set = load_dataset(config.dataset, config.data_dir, "train")
        test_set = load_dataset(config.dataset, config.data_dir, "test")
    if train_set.range_tag != RAW or test_set.range_tag != RAW:
        raise ValueError("harness expects raw byte datasets (occlusion precedes scaling)")
    return train_set.take(config.train_limit), test_set


def train_cycle_models(config: ExperimentConfig, cycle_index: int,
                       train_set: LabeledSet, verbose: bool = False):
    """Train the (lenet5, bordernet) pair for one cycle on clean data."""
    clean = normalize(train_set)
    common = dict(epochs=config.epochs, batch_size=config.batch_size,
                  verbose=verbose)
    net_l = nn.train(nn.lenet5_spec(), clean,
                     seed=cycle_seed(config.base_seed, cycle_index, LENET_STREAM),
                     shuffle_seed=cycle_seed(config.base_seed, cycle_index, SHUFFLE_STREAM),
                     **common)
    net_b = nn.train(nn.bordernet_spec(config.bordernet_mode), clean,
                     seed=cycle_seed(config.base_seed, cycle_index, BORDERNET_STREAM),
                     shuffle_seed=cycle_seed(config.base_seed, cycle_index, SHUFFLE_STREAM),
                     **common)
    return net_l, net_b


def run_cycle(config: ExperimentConfig, cycle_index: int, data=None,
              verbose: bool = False) -> dict[tuple[str, int, int], tuple[float, float]]:
    """One full cycle: train both models once, score every occlusion cell.

    Returns {(kind, w, s): (acc_lenet5, acc_bordernet)}.  Deterministic
    for a fixed (config, cycle_index, data).
    """
    train_set, test_set = _resolve_data(config, data)
    try:
        net_l, net_b = train_cycle_models(config, cycle_index, train_set, verbose)
        out = {}
        for kind, w, s in config.expanded_cells():
            spec = OcclusionSpec(kind, w, s)
            occluded = LabeledSet(occlude(test_set.images, spec),
                                  test_set.labels, RAW)
            scored = normalize(occluded)
            out[(kind, w, s)] = (nn.evaluate(net_l, scored),
                                 nn.evaluate(net_b, scored))
        return out
    except (ValueError, FloatingPointError, OSError) as exc:
        raise RuntimeError(f"cycle {cycle_index} failed: {exc}") from exc


# ---------------------------------------------------------------------------
# Bootstrap statistics

def _ratios(pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or not len(pairs):
        raise ValueError(f"pairs must be a nonempty (n, 2) array, got {pairs.shape}")
    if np.any(pairs[:, 0] <= 0):
        raise ValueError("zero lenet5 accuracy makes the improvement ratio undefined")
    return 100.0 * pairs[:, 1] / pairs[:, 0]


def _resample_stat(pairs, ratios, idx, statistic):
    if statistic == MEDIAN_OF_RATIOS:
        return np.median(ratios[idx], axis=1)
    return 100.0 * pairs[idx, 1].mean(axis=1) / pairs[idx, 0].mean(axis=1)


def bootstrap_median_improvement(pairs, resamples: int | None = 100_000, seed=0,
                                 statistic: str = MEDIAN_OF_RATIOS,
                                 ci: float = 0.95) -> tuple[float, float, float]:
    """Point estimate and percentile CI for the paired improvement.

    ``pairs`` holds per-cycle (acc_lenet5, acc_bordernet) rows.  With
    the default statistic the point estimate is the sample median of the
    per-cycle ratios 100*b/a, and the CI spans the 2.5/97.5 percentiles
    of that median over paired resamples with replacement.  Passing
    ``resamples=None`` enumerates all n**n resamples exactly instead of
    sampling (practical only for small n).
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    ratios = _ratios(pairs)
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be one of {STATISTICS}")
    if not 0.0 < ci < 1.0:
        raise ValueError("ci must lie in (0, 1)")
    n = len(ratios)
    if statistic == MEDIAN_OF_RATIOS:
        point = float(np.median(ratios))
    else:
        point = float(100.0 * pairs[:, 1].mean() / pairs[:, 0].mean())

    if resamples is None:
        if n ** n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive bootstrap needs {n}**{n} resamples; "
                             f"limit is {EXHAUSTIVE_LIMIT}")
        idx = np.array(list(itertools.product(range(n), repeat=n)), dtype=np.intp)
        stats = _resample_stat(pairs, ratios, idx, statistic)
    else:
        if resamples < 1:
            raise ValueError("resamples must be >= 1 (or None for exhaustive)")
        rng = np.random.default_rng(seed)
        stats = np.empty(resamples)
        chunk = max(1, 5_000_000 // n)
        done = 0
        while done < resamples:
            take = min(chunk, resamples - done)
            idx = rng.integers(0, n, size=(take, n))
            stats[done:done + take] = _resample_stat(pairs, ratios, idx, statistic)
            done += take
    tail = 100.0 * (1.0 - ci) / 2.0
    low, high = np.percentile(stats, [tail, 100.0 - tail])
    return point, float(low), float(high)


# ---------------------------------------------------------------------------
# Full experiment

def run_experiment(config: ExperimentConfig, data=None,
                   verbose: bool = False) -> list[CellResult]:
    """Run every cycle, then aggregate each cell into a CellResult."""
    train_set, test_set = _resolve_data(config, data)
    cells = config.expanded_cells()
    if not cells:
        return []
    per_cell: dict[tuple[str, int, int], list[tuple[float, float]]] = \
        {cell: [] for cell in cells}
    for cycle in range(config.cycles):
        if verbose:
            print(f"cycle {cycle + 1}/{config.cycles}")
        scores = run_cycle(config, cycle, data=(train_set, test_set), verbose=verbose)
        for cell in cells:
            per_cell[cell].append(scores[cell])
        if verbose:
            worst = min(scores.values(), key=lambda ab: ab[0])
            print(f"  lowest lenet5 accuracy this cycle: {worst[0]:.4f}")
    results = []
    for kind, w, s in cells:
        pairs = np.array(per_cell[(kind, w, s)], dtype=np.float64)
        point, lo, hi = bootstrap_median_improvement(
            pairs, resamples=config.resamples,
            seed=np.random.SeedSequence([config.base_seed, KINDS.index(kind), w, s]),
            statistic=config.statistic)
        results.append(CellResult(config.dataset, kind, w, s, pairs, point, lo, hi))
    return results
