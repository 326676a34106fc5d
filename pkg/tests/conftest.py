from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from dqo import DatasetTable, FeatureSpec, synthetic_benchmark, train_bundle


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_meta(path: Path, features: list[dict], target: str = "kwh") -> Path:
    path.write_text(json.dumps({"target": target, "features": features}), encoding="utf-8")
    return path


def orthogonal_design_table() -> DatasetTable:
    """8-row table whose augmented design has mutually orthogonal columns.

    Columns are +-1 patterns orthogonal to each other and to the intercept,
    so (XbarT Xbar) and its inverse are diagonal: cross-terms between
    different features' measurement errors vanish exactly.
    """
    x1 = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float)
    x2 = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=float)
    x = np.column_stack([x1, x2])
    y = np.array([2.0, 1.5, 0.5, 1.0, -0.5, -1.5, -0.25, -1.0])
    half = (0.5, 0.5)
    specs = (
        FeatureSpec(1, "a", "discrete", 0.0, "free", (-1.0, 1.0), half),
        FeatureSpec(2, "b", "discrete", 1.0, "low", (-1.0, 1.0), half),
    )
    return DatasetTable(x=x, y=y, features=specs, target_name="y")


@pytest.fixture(scope="session")
def bench():
    """Standard synthetic benchmark: 2000 train rows, 100 fresh test rows."""
    return synthetic_benchmark(n_train=2000, n_test=100, d=15, seed=0)


@pytest.fixture(scope="session")
def bench_bundle(bench):
    train, _ = bench
    return train_bundle(train, k=100, name="bench")
