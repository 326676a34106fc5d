"""Tabular survey datasets: loading, validation, per-feature statistics, splits.

A dataset is a CSV file (RFC 4180, UTF-8, header row) plus a JSON metadata
sidecar describing each question/feature::

    {
      "target": "kwh",
      "features": [
        {"name": "bedrooms", "kind": "discrete", "cost_tier": "free"},
        {"name": "heated_sqft", "kind": "continuous", "cost_tier": "low"},
        {"name": "window_glass", "kind": "discrete", "cost_tier": "high",
         "cost": 5.0, "levels": [1, 2, 3],
         "prompt": "What type of glass do the windows have?"}
      ]
    }

Per-feature fields: ``name`` (CSV column), ``kind`` ("continuous" or
"discrete"), ``cost_tier`` ("free", "low", "high"), optional ``cost``
(defaults per tier: free=0, low=1, high=5), optional ``levels`` (allowed
integer codes for discrete columns), optional ``prompt`` (question text for
the survey UI). The free set is the set of features with cost_tier "free";
free features always cost 0. Extra CSV columns are ignored; feature ids are
1-based positions in metadata order.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

KIND_CONTINUOUS = "continuous"
KIND_DISCRETE = "discrete"
COST_TIERS = ("free", "low", "high")
DEFAULT_TIER_COSTS = {"free": 0.0, "low": 1.0, "high": 5.0}

_PROPORTION_TOL = 1e-9


class DatasetError(ValueError):
    """Structured dataset/load failure, carrying row/column context.

    ``row`` is the 1-based data row (header excluded); ``column`` is the
    offending column name. Either may be None when not applicable.
    """

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class FeatureSpec:
    """Per-question metadata: kind, acquisition cost, value range, proportions.

    ``id`` is the 1-based feature index; ``range`` and ``proportions`` are
    empty until filled by :func:`compute_feature_stats`.
    """

    id: int
    name: str
    kind: str
    cost: float
    cost_tier: str
    range: tuple[float, ...] = ()
    proportions: tuple[float, ...] = ()
    prompt: str | None = None

    def __post_init__(self) -> None:
        if self.id < 1:
            raise DatasetError(f"feature id must be >= 1, got {self.id}", column=self.name)
        if self.kind not in (KIND_CONTINUOUS, KIND_DISCRETE):
            raise DatasetError(f"unknown kind {self.kind!r}", column=self.name)
        if self.cost_tier not in COST_TIERS:
            raise DatasetError(f"unknown cost_tier {self.cost_tier!r}", column=self.name)
        if self.cost < 0:
            raise DatasetError(f"cost must be non-negative, got {self.cost}", column=self.name)
        if self.cost_tier == "free" and self.cost != 0:
            raise DatasetError(
                f"free features must cost 0, got {self.cost}", column=self.name
            )
        if len(self.range) != len(self.proportions):
            raise DatasetError(
                f"range has {len(self.range)} values but proportions has "
                f"{len(self.proportions)}",
                column=self.name,
            )
        if self.proportions:
            total = math.fsum(self.proportions)
            if abs(total - 1.0) > _PROPORTION_TOL:
                raise DatasetError(
                    f"proportions sum to {total!r}, expected 1", column=self.name
                )
            if any(p < 0 for p in self.proportions):
                raise DatasetError("proportions must be non-negative", column=self.name)
        if self.range:
            if self.kind == KIND_DISCRETE:
                if len(set(self.range)) != len(self.range):
                    raise DatasetError("discrete range values must be distinct", column=self.name)
            else:
                if any(b <= a for a, b in zip(self.range, self.range[1:])):
                    raise DatasetError(
                        "continuous range values must be strictly increasing",
                        column=self.name,
                    )

    @property
    def is_discrete(self) -> bool:
        return self.kind == KIND_DISCRETE

    @property
    def is_free(self) -> bool:
        return self.cost_tier == "free"


@dataclass(frozen=True)
class DatasetTable:
    """Validated feature matrix ``x`` (n rows, d features) with targets ``y``.

    All cells are present and finite; discrete columns hold integer codes that
    lie in their FeatureSpec range when one is declared. ``meta`` records
    generator parameters for synthetic tables.
    """

    x: np.ndarray
    y: np.ndarray
    features: tuple[FeatureSpec, ...]
    target_name: str = "y"
    meta: Mapping[str, object] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2:
            raise DatasetError(f"x must be 2-dimensional, got shape {x.shape}")
        n, d = x.shape
        if y.shape != (n,):
            raise DatasetError(f"y has shape {y.shape}, expected ({n},)")
        if d != len(self.features):
            raise DatasetError(f"{d} columns but {len(self.features)} feature specs")
        if n == 0:
            raise DatasetError("dataset has no rows")
        for j, spec in enumerate(self.features):
            if spec.id != j + 1:
                raise DatasetError(
                    f"feature ids must be 1..d in column order; "
                    f"column {j} has id {spec.id}",
                    column=spec.name,
                )
        if not np.all(np.isfinite(x)):
            i, j = np.argwhere(~np.isfinite(x))[0]
            raise DatasetError(
                "missing or non-finite cell",
                row=int(i) + 1,
                column=self.features[int(j)].name,
            )
        if not np.all(np.isfinite(y)):
            i = int(np.argwhere(~np.isfinite(y))[0][0])
            raise DatasetError("missing or non-finite target", row=i + 1, column=self.target_name)
        for j, spec in enumerate(self.features):
            if spec.is_discrete and spec.range:
                allowed = set(spec.range)
                bad = [i for i, v in enumerate(x[:, j]) if v not in allowed]
                if bad:
                    raise DatasetError(
                        f"value {x[bad[0], j]!r} outside declared discrete range",
                        row=bad[0] + 1,
                        column=spec.name,
                    )

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    @property
    def free_set(self) -> frozenset[int]:
        """Ids of features answered for free (extractable from listings)."""
        return frozenset(s.id for s in self.features if s.is_free)

    def column(self, feature_id: int) -> np.ndarray:
        return self.x[:, feature_id - 1]

    def costs(self) -> dict[int, float]:
        return {s.id: s.cost for s in self.features}


def _parse_meta(meta_path: Path) -> tuple[str, list[dict]]:
    try:
        raw = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"metadata is not valid JSON: {exc}") from exc
    if "target" not in raw or "features" not in raw:
        raise DatasetError("metadata must declare 'target' and 'features'")
    feats = raw["features"]
    if not isinstance(feats, list) or not feats:
        raise DatasetError("metadata 'features' must be a non-empty list")
    return str(raw["target"]), feats


def _spec_from_meta(idx: int, entry: Mapping[str, object]) -> FeatureSpec:
    name = str(entry.get("name", ""))
    if not name:
        raise DatasetError(f"feature {idx} missing 'name' in metadata")
    kind = str(entry.get("kind", ""))
    tier = str(entry.get("cost_tier", ""))
    if tier not in COST_TIERS:
        raise DatasetError(f"unknown cost_tier {tier!r}", column=name)
    cost = float(entry.get("cost", DEFAULT_TIER_COSTS[tier]))
    levels = entry.get("levels")
    rng: tuple[float, ...] = ()
    props: tuple[float, ...] = ()
    if levels is not None:
        if kind != KIND_DISCRETE:
            raise DatasetError("'levels' only applies to discrete features", column=name)
        rng = tuple(sorted(float(v) for v in levels))  # type: ignore[union-attr]
        props = tuple([1.0 / len(rng)] * len(rng))
    prompt = entry.get("prompt")
    return FeatureSpec(
        id=idx,
        name=name,
        kind=kind,
        cost=cost,
        cost_tier=tier,
        range=rng,
        proportions=props,
        prompt=str(prompt) if prompt is not None else None,
    )


def _read_rows(
    csv_path: Path, specs: Sequence[FeatureSpec], target_name: str
) -> tuple[np.ndarray, np.ndarray]:
    """Parse and cell-validate a CSV against known specs; no size constraint."""
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("CSV file is empty") from None
        col_of = {name: i for i, name in enumerate(header)}
        for spec in specs:
            if spec.name not in col_of:
                raise DatasetError("missing column", column=spec.name)
        if target_name not in col_of:
            raise DatasetError("missing column", column=target_name)

        rows: list[list[float]] = []
        targets: list[float] = []
        for r, record in enumerate(reader, start=1):
            row_vals: list[float] = []
            for spec in specs:
                cell = record[col_of[spec.name]] if col_of[spec.name] < len(record) else ""
                try:
                    value = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"non-numeric value {cell!r}", row=r, column=spec.name
                    ) from None
                if spec.is_discrete:
                    code = round(value)
                    if abs(value - code) > 1e-9:
                        raise DatasetError(
                            f"discrete value {cell!r} is not an integer code",
                            row=r,
                            column=spec.name,
                        )
                    value = float(code)
                    if spec.range and value not in spec.range:
                        raise DatasetError(
                            f"value {cell!r} outside declared discrete range "
                            f"{list(spec.range)}",
                            row=r,
                            column=spec.name,
                        )
                row_vals.append(value)
            cell = record[col_of[target_name]] if col_of[target_name] < len(record) else ""
            try:
                targets.append(float(cell))
            except ValueError:
                raise DatasetError(
                    f"non-numeric value {cell!r}", row=r, column=target_name
                ) from None
            rows.append(row_vals)

    if not rows:
        raise DatasetError("CSV has no data rows")
    return np.array(rows, dtype=float), np.array(targets, dtype=float)


def load_dataset(csv_path: str | Path, meta_path: str | Path) -> DatasetTable:
    """Load and validate a CSV + metadata pair into a DatasetTable.

    Raises DatasetError naming the offending row/column for: missing columns,
    non-numeric cells, non-integral or out-of-range discrete codes, and too
    few rows (need n > d).
    """
    target_name, meta_feats = _parse_meta(Path(meta_path))
    specs = [_spec_from_meta(i + 1, entry) for i, entry in enumerate(meta_feats)]
    x, y = _read_rows(Path(csv_path), specs, target_name)
    n, d = x.shape
    if n <= d:
        raise DatasetError(f"dataset has {n} rows for {d} features; need more rows than features")
    return DatasetTable(x=x, y=y, features=tuple(specs), target_name=target_name)


def save_dataset(table: DatasetTable, csv_path: str | Path, meta_path: str | Path) -> None:
    """Write a table back to CSV + metadata; numeric cells round-trip exactly."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([s.name for s in table.features] + [table.target_name])
        for i in range(table.n_rows):
            cells = []
            for j, spec in enumerate(table.features):
                v = table.x[i, j]
                cells.append(str(int(v)) if spec.is_discrete else repr(float(v)))
            cells.append(repr(float(table.y[i])))
            writer.writerow(cells)

    feats = []
    for spec in table.features:
        entry: dict[str, object] = {
            "name": spec.name,
            "kind": spec.kind,
            "cost_tier": spec.cost_tier,
            "cost": spec.cost,
        }
        if spec.is_discrete and spec.range:
            entry["levels"] = [int(v) for v in spec.range]
        if spec.prompt is not None:
            entry["prompt"] = spec.prompt
        feats.append(entry)
    Path(meta_path).write_text(
        json.dumps({"target": table.target_name, "features": feats}, indent=2),
        encoding="utf-8",
    )


def compute_feature_stats(table: DatasetTable, max_levels: int = 10) -> list[FeatureSpec]:
    """Fill each FeatureSpec's empirical range and proportions from training rows.

    Discrete features get their sorted unique values with relative
    frequencies. Continuous features get ``max_levels`` equal-probability
    quantile midpoints (the (j+0.5)/max_levels sample quantiles), each with
    proportion 1/max_levels; coincident midpoints collapse, summing their
    probability mass. A constant column yields a single value with p=[1.0]
    and a warning.
    """
    if max_levels < 1:
        raise DatasetError(f"max_levels must be positive, got {max_levels}")
    out: list[FeatureSpec] = []
    for spec in table.features:
        col = table.column(spec.id)
        if spec.is_discrete:
            values, counts = np.unique(col, return_counts=True)
            props = counts / counts.sum()
        else:
            probs = (np.arange(max_levels) + 0.5) / max_levels
            values = np.quantile(col, probs)
            props = np.full(max_levels, 1.0 / max_levels)
        # Collapse duplicates so the continuous range stays strictly increasing.
        uniq, inverse = np.unique(values, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inverse, props)
        if len(uniq) == 1:
            warnings.warn(
                f"feature {spec.name!r} is constant in the training data",
                stacklevel=2,
            )
        out.append(
            replace(spec, range=tuple(float(v) for v in uniq), proportions=tuple(merged))
        )
    return out


def split_train_test(
    table: DatasetTable, test_fraction: float, seed: int
) -> tuple[DatasetTable, DatasetTable]:
    """Seeded exact partition into train/test; floor(n*test_fraction) test rows.

    Row order within each part preserves the original order. Raises if either
    side would be empty.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = table.n_rows
    n_test = int(n * test_fraction)
    if n_test == 0 or n_test == n:
        raise DatasetError(
            f"test_fraction {test_fraction} yields an empty split for n={n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    make = lambda idx: DatasetTable(
        x=table.x[idx],
        y=table.y[idx],
        features=table.features,
        target_name=table.target_name,
        meta=table.meta,
    )
    return make(train_idx), make(test_idx)


def generate_synthetic(
    n: int,
    d: int,
    beta: Sequence[float],
    noise_sd: float,
    discrete_levels: Sequence[int],
    seed: int,
    *,
    latent_rho: float = 0.6,
    free_features: int = 2,
    cost_tiers: Sequence[str] | None = None,
    target_name: str = "kwh",
) -> DatasetTable:
    """Generate a correlated synthetic benchmark table with a known linear target.

    ``discrete_levels[f] == 0`` makes feature f continuous (standard normal
    marginal); ``L >= 2`` makes it discrete with codes 0..L-1 in roughly equal
    proportions. All features share a latent factor (correlation
    ``latent_rho``) so kNN imputation from partial answers is informative.
    The target is ``beta[0] + beta[1:] . x + Normal(0, noise_sd^2)``; the
    generative parameters are recorded in ``table.meta`` for oracle checks.

    The first ``free_features`` features are tier "free"; the rest alternate
    "low"/"high" unless ``cost_tiers`` overrides the full assignment.
    """
    if n <= d + 1:
        raise DatasetError(f"need n > d+1, got n={n}, d={d}")
    if len(beta) != d + 1:
        raise DatasetError(f"beta must have d+1={d + 1} entries, got {len(beta)}")
    if len(discrete_levels) != d:
        raise DatasetError(
            f"discrete_levels must have d={d} entries, got {len(discrete_levels)}"
        )
    if not 0.0 <= latent_rho < 1.0:
        raise DatasetError(f"latent_rho must be in [0, 1), got {latent_rho}")
    if noise_sd < 0:
        raise DatasetError(f"noise_sd must be non-negative, got {noise_sd}")
    if cost_tiers is not None and len(cost_tiers) != d:
        raise DatasetError(f"cost_tiers must have d={d} entries, got {len(cost_tiers)}")

    rng = np.random.default_rng(seed)
    latent = rng.standard_normal(n)
    mix = math.sqrt(1.0 - latent_rho**2)
    x = np.empty((n, d))
    from scipy.special import ndtri  # inverse normal CDF for level thresholds

    for j, levels in enumerate(discrete_levels):
        raw = latent_rho * latent + mix * rng.standard_normal(n)
        if levels == 0:
            x[:, j] = raw
        else:
            if levels < 0:
                raise DatasetError(f"discrete_levels[{j}] must be >= 0, got {levels}")
            if levels == 1:
                x[:, j] = 0.0
            else:
                cuts = ndtri(np.arange(1, levels) / levels)
                x[:, j] = np.searchsorted(cuts, raw)

    beta_arr = np.asarray(beta, dtype=float)
    y = beta_arr[0] + x @ beta_arr[1:]
    if noise_sd > 0:
        y = y + rng.normal(0.0, noise_sd, size=n)

    specs = []
    for j in range(d):
        if cost_tiers is not None:
            tier = cost_tiers[j]
        elif j < free_features:
            tier = "free"
        else:
            tier = "low" if (j - free_features) % 2 == 0 else "high"
        specs.append(
            FeatureSpec(
                id=j + 1,
                name=f"q{j + 1:02d}",
                kind=KIND_DISCRETE if discrete_levels[j] else KIND_CONTINUOUS,
                cost=DEFAULT_TIER_COSTS[tier],
                cost_tier=tier,
            )
        )
    return DatasetTable(
        x=x,
        y=y,
        features=tuple(specs),
        target_name=target_name,
        meta={
            "beta": [float(b) for b in beta_arr],
            "noise_sd": float(noise_sd),
            "seed": int(seed),
            "latent_rho": float(latent_rho),
        },
    )


_BENCH_BETA_MAGNITUDES = (3.0, 0.5, 2.0, 1.0, 2.5, 0.8, 1.5)


def benchmark_levels(d: int) -> list[int]:
    """Default benchmark level counts: discrete (3..6 levels) and continuous mixed."""
    return [3 + (j // 2) % 4 if j % 2 == 0 else 0 for j in range(d)]


def benchmark_beta(d: int) -> list[float]:
    """Default benchmark coefficients: heterogeneous, alternating-sign magnitudes."""
    return [10.0] + [
        (-1.0) ** j * _BENCH_BETA_MAGNITUDES[j % len(_BENCH_BETA_MAGNITUDES)]
        for j in range(d)
    ]


def synthetic_benchmark(
    n_train: int = 2000,
    n_test: int = 100,
    d: int = 15,
    seed: int = 0,
    noise_sd: float = 1.0,
    free_features: int = 2,
) -> tuple[DatasetTable, DatasetTable]:
    """Standard synthetic benchmark: one generative process, fresh test draws.

    Free features load on a global latent factor; the costly features form
    anti-correlated pairs whose pair factors also load on the global latent.
    The pairing matters: imputing both members of a pair inflates the
    interval's error term well beyond independent features (their inverse-Gram
    cross terms are positive), so answering the right questions genuinely
    shrinks uncertainty and orderings differ in quality. Which pair member
    helps more varies by respondent, so no fixed order is optimal.

    Generates ``n_train + n_test`` rows in one stream and splits them
    contiguously; the test rows are fresh draws with identical marginals.
    The target is linear with Gaussian noise; generative parameters are
    recorded in ``meta``.
    """
    if d < free_features + 2:
        raise DatasetError(f"need at least {free_features + 2} features, got d={d}")
    from scipy.special import ndtri

    rng = np.random.default_rng(seed)
    n = n_train + n_test
    latent = rng.standard_normal(n)
    levels_per_feature = benchmark_levels(d)

    # Loadings: free features and pair factors share the global latent so
    # early answers inform the imputation of everything else. The stronger
    # pair member (the more informative question) is also the expensive one,
    # so cost-blind and cost-aware orderings genuinely diverge.
    free_load, pair_load = 0.8, 0.6
    member_loads = (0.95, 0.85)
    n_pairs = (d - free_features) // 2
    pair_factors = [
        pair_load * latent + math.sqrt(1.0 - pair_load**2) * rng.standard_normal(n)
        for _ in range(n_pairs)
    ]

    x = np.empty((n, d))
    for j in range(d):
        noise = rng.standard_normal(n)
        if j < free_features:
            raw = free_load * latent + math.sqrt(1.0 - free_load**2) * noise
        else:
            pair_idx, member = divmod(j - free_features, 2)
            if pair_idx < n_pairs:
                sign = 1.0 if member == 0 else -1.0
                load = member_loads[member]
                raw = sign * load * pair_factors[pair_idx]
                raw = raw + math.sqrt(1.0 - load**2) * noise
            else:  # odd feature out: plain latent loading
                raw = pair_load * latent + math.sqrt(1.0 - pair_load**2) * noise
        levels = levels_per_feature[j]
        if levels == 0:
            x[:, j] = raw
        else:
            cuts = ndtri(np.arange(1, levels) / levels)
            x[:, j] = np.searchsorted(cuts, raw)

    beta = np.asarray(benchmark_beta(d))
    y = beta[0] + x @ beta[1:]
    if noise_sd > 0:
        y = y + rng.normal(0.0, noise_sd, size=n)

    specs = []
    for j in range(d):
        if j < free_features:
            tier = "free"
        else:  # strong pair members (even offsets) are the expensive ones
            tier = "high" if (j - free_features) % 2 == 0 else "low"
        specs.append(
            FeatureSpec(
                id=j + 1,
                name=f"q{j + 1:02d}",
                kind=KIND_DISCRETE if levels_per_feature[j] else KIND_CONTINUOUS,
                cost=DEFAULT_TIER_COSTS[tier],
                cost_tier=tier,
            )
        )
    meta = {
        "beta": [float(b) for b in beta],
        "noise_sd": float(noise_sd),
        "seed": int(seed),
        "loadings": {"free": free_load, "pair": pair_load, "members": list(member_loads)},
    }
    make = lambda sl: DatasetTable(
        x=x[sl],
        y=y[sl],
        features=tuple(specs),
        target_name="kwh",
        meta=meta,
    )
    return make(slice(0, n_train)), make(slice(n_train, n))


def with_specs(table: DatasetTable, specs: Iterable[FeatureSpec]) -> DatasetTable:
    """Return a copy of the table carrying updated feature specs."""
    return DatasetTable(
        x=table.x,
        y=table.y,
        features=tuple(specs),
        target_name=table.target_name,
        meta=table.meta,
    )


def restrict_to(table: DatasetTable, feature_ids: Sequence[int]) -> DatasetTable:
    """Project the table onto the given features, renumbering ids to 1..d'."""
    ids = list(feature_ids)
    if len(set(ids)) != len(ids):
        raise DatasetError(f"duplicate feature ids in restriction: {ids}")
    cols = [fid - 1 for fid in ids]
    specs = [
        replace(table.features[fid - 1], id=new_id)
        for new_id, fid in enumerate(ids, start=1)
    ]
    return DatasetTable(
        x=table.x[:, cols],
        y=table.y,
        features=tuple(specs),
        target_name=table.target_name,
        meta=table.meta,
    )
