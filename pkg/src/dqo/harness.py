"""Simulation benchmarking of question orderings over a held-out test set.

For every (test row, orderer, lambda) combination the harness replays the
question-asking loop, answering each chosen question from the row's hidden
true values, and records the per-step trajectory of interval width, absolute
error, and cumulative cost. Trajectories summarize to areas under the curve
(unit-step left Riemann sum over steps 0..Q-1, excluding the final
post-all-answers point); lower AUC means less time spent uncertain, wrong,
or expensive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bundle import ModelBundle
from .data import DatasetTable
from .engine import ROOT_OF_MEAN, make_orderer, run_dqo_all


@dataclass(frozen=True)
class TrajectoryStep:
    step: int
    asked_feature: int | None
    width: float
    abs_error: float
    cum_cost: float


@dataclass(frozen=True)
class Trajectory:
    """Per-step records for one (test row, orderer, lambda) run."""

    row_id: int
    orderer: str
    lam: float
    steps: tuple[TrajectoryStep, ...]

    def __post_init__(self) -> None:
        if not self.steps or self.steps[0].step != 0:
            raise ValueError("trajectory must start at step 0 (pre-question prediction)")
        if [s.step for s in self.steps] != list(range(len(self.steps))):
            raise ValueError("trajectory steps must be consecutive from 0")
        if any(s.width <= 0 for s in self.steps):
            raise ValueError("trajectory widths must be positive")

    @property
    def n_questions(self) -> int:
        return len(self.steps) - 1


@dataclass(frozen=True)
class AucSummary:
    """Mean AUCs over the test rows for one (orderer, lambda) combination."""

    orderer: str
    lam: float
    n_rows: int
    width_auc: float
    error_auc: float
    cost_auc: float

    def __post_init__(self) -> None:
        if min(self.width_auc, self.error_auc, self.cost_auc) < 0:
            raise ValueError("AUCs must be non-negative")


def align_test_matrix(test: DatasetTable, bundle: ModelBundle) -> np.ndarray:
    """Project a test table onto the bundle's feature columns, matched by name."""
    col_of = {s.name: s.id - 1 for s in test.features}
    cols = []
    for spec in bundle.specs:
        if spec.name not in col_of:
            raise ValueError(f"test table is missing model feature {spec.name!r}")
        cols.append(col_of[spec.name])
    return test.x[:, cols]


def simulate(
    test: DatasetTable,
    bundle: ModelBundle,
    orderers: Sequence[str],
    lambda_values: Sequence[float],
    alpha: float | None = None,
    seed: int = 0,
    width_form: str = ROOT_OF_MEAN,
    initial_known: frozenset[int] | None = None,
) -> list[Trajectory]:
    """Replay question-asking for every (test row, orderer, lambda) combination.

    Answers come from the rows' hidden true values; the free features are
    known upfront unless ``initial_known`` overrides. Deterministic given
    ``seed`` (which drives only the random orderer).
    """
    alpha = bundle.alpha if alpha is None else alpha
    known = bundle.free_set if initial_known is None else initial_known
    x_test = align_test_matrix(test, bundle)
    trajectories: list[Trajectory] = []
    for kind in orderers:
        for lam in lambda_values:
            orderer = make_orderer(
                kind,
                lam,
                seed=seed,
                delta=bundle.delta,
                selection_order=bundle.selection_order,
                form=width_form,
            )
            for i in range(x_test.shape[0]):
                _, _, steps = run_dqo_all(
                    bundle.model,
                    x_test[i],
                    known,
                    bundle.imputer,
                    bundle.specs,
                    bundle.delta,
                    lam=lam,
                    alpha=alpha,
                    orderer=orderer,
                    row_key=i,
                )
                y_true = float(test.y[i])
                trajectories.append(
                    Trajectory(
                        row_id=i,
                        orderer=kind,
                        lam=lam,
                        steps=tuple(
                            TrajectoryStep(
                                step=s.step,
                                asked_feature=s.asked_feature,
                                width=s.width,
                                abs_error=abs(y_true - s.point),
                                cum_cost=s.cum_cost,
                            )
                            for s in steps
                        ),
                    )
                )
    return trajectories


def compute_auc(traj: Trajectory) -> tuple[float, float, float]:
    """Unit-step left Riemann sums of width, error, and cost over steps 0..Q-1."""
    head = traj.steps[: traj.n_questions]
    width = float(sum(s.width for s in head))
    error = float(sum(s.abs_error for s in head))
    cost = float(sum(s.cum_cost for s in head))
    return width, error, cost


def summarize(trajectories: Iterable[Trajectory]) -> list[AucSummary]:
    """Mean AUCs per (orderer, lambda), ordered by first appearance."""
    groups: dict[tuple[str, float], list[tuple[float, float, float]]] = {}
    for traj in trajectories:
        groups.setdefault((traj.orderer, traj.lam), []).append(compute_auc(traj))
    out = []
    for (orderer, lam), aucs in groups.items():
        arr = np.array(aucs)
        out.append(
            AucSummary(
                orderer=orderer,
                lam=lam,
                n_rows=len(aucs),
                width_auc=float(arr[:, 0].mean()),
                error_auc=float(arr[:, 1].mean()),
                cost_auc=float(arr[:, 2].mean()),
            )
        )
    return out


def oracle_position_frequencies(
    trajectories: Iterable[Trajectory],
) -> tuple[np.ndarray, list[int]]:
    """Count how often each feature was asked at each ordering position.

    Returns (counts, feature_ids) where counts[i, p] is the number of
    trajectories that asked feature_ids[i] at position p. Each feature's row
    sums to the number of trajectories when all runs ask every feature.
    """
    trajs = list(trajectories)
    if not trajs:
        raise ValueError("no trajectories given")
    feature_ids = sorted({s.asked_feature for t in trajs for s in t.steps[1:]})
    max_q = max(t.n_questions for t in trajs)
    index = {fid: i for i, fid in enumerate(feature_ids)}
    counts = np.zeros((len(feature_ids), max_q), dtype=int)
    for traj in trajs:
        for pos, step in enumerate(traj.steps[1:]):
            counts[index[step.asked_feature], pos] += 1
    return counts, feature_ids


TRAJECTORY_COLUMNS = (
    "row_id",
    "orderer",
    "lambda",
    "step",
    "asked_feature",
    "width",
    "abs_error",
    "cum_cost",
)


def write_trajectories(trajectories: Iterable[Trajectory], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for traj in trajectories:
            for s in traj.steps:
                writer.writerow(
                    [
                        traj.row_id,
                        traj.orderer,
                        repr(traj.lam),
                        s.step,
                        "" if s.asked_feature is None else s.asked_feature,
                        repr(s.width),
                        repr(s.abs_error),
                        repr(s.cum_cost),
                    ]
                )


def read_trajectories(path: str | Path) -> list[Trajectory]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRAJECTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected trajectory columns {reader.fieldnames}")
        grouped: dict[tuple[int, str, float], list[TrajectoryStep]] = {}
        for row in reader:
            key = (int(row["row_id"]), row["orderer"], float(row["lambda"]))
            grouped.setdefault(key, []).append(
                TrajectoryStep(
                    step=int(row["step"]),
                    asked_feature=int(row["asked_feature"]) if row["asked_feature"] else None,
                    width=float(row["width"]),
                    abs_error=float(row["abs_error"]),
                    cum_cost=float(row["cum_cost"]),
                )
            )
    return [
        Trajectory(row_id=rid, orderer=orderer, lam=lam, steps=tuple(steps))
        for (rid, orderer, lam), steps in grouped.items()
    ]


def write_summary(summaries: Iterable[AucSummary], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["orderer", "lambda", "n_rows", "width_auc", "error_auc", "cost_auc"])
        for s in summaries:
            writer.writerow(
                [
                    s.orderer,
                    repr(s.lam),
                    s.n_rows,
                    repr(s.width_auc),
                    repr(s.error_auc),
                    repr(s.cost_auc),
                ]
            )


def write_position_frequencies(
    counts: np.ndarray, feature_ids: Sequence[int], path: str | Path
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_id"] + [f"position_{p}" for p in range(counts.shape[1])])
        for i, fid in enumerate(feature_ids):
            writer.writerow([fid] + [int(c) for c in counts[i]])
