"""Training-time forward selection of costly features on top of the free set.

Classic greedy forward selection, except the starting set is the free
(extractable) features rather than the empty set. Each round adds the costly
candidate that minimizes leave-one-out CV error of the augmented linear
model; feature cost plays no role at training time (cost is penalized only
when ordering questions at test time).
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import DatasetTable
from .regression import SingularModelError, loocv_error


@dataclass(frozen=True)
class SelectionTrace:
    """Selection order with the LOOCV error after each addition."""

    ordered_features: tuple[int, ...]
    cv_errors: tuple[float, ...]
    initial_error: float

    def __post_init__(self) -> None:
        if len(self.ordered_features) != len(self.cv_errors):
            raise ValueError(
                f"{len(self.ordered_features)} features but {len(self.cv_errors)} errors"
            )
        if len(set(self.ordered_features)) != len(self.ordered_features):
            raise ValueError("ordered_features contains duplicates")

    def to_dict(self) -> dict:
        return {
            "ordered_features": list(self.ordered_features),
            "cv_errors": [float(e) for e in self.cv_errors],
            "initial_error": float(self.initial_error),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionTrace":
        return cls(
            ordered_features=tuple(int(f) for f in data["ordered_features"]),
            cv_errors=tuple(float(e) for e in data["cv_errors"]),
            initial_error=float(data["initial_error"]),
        )


def forward_select(
    train: DatasetTable, max_features: int = 30, min_improvement: float = 0.0
) -> SelectionTrace:
    """Greedily add costly features by LOOCV improvement over the free set.

    Stops at ``max_features`` additions or when the round's best improvement
    falls below ``min_improvement``. Candidates whose design is singular are
    skipped for that round; ties break toward the lowest feature id.
    """
    free = sorted(train.free_set)
    current = list(free)
    candidates = [s.id for s in train.features if s.id not in train.free_set]

    cols = [f - 1 for f in current]
    initial_error = loocv_error(train.x[:, cols], train.y)

    ordered: list[int] = []
    errors: list[float] = []
    best_so_far = initial_error
    while candidates and len(ordered) < max_features:
        round_best: tuple[float, int] | None = None
        for fid in candidates:  # ascending id: first strict win takes ties
            cols = [f - 1 for f in current + [fid]]
            try:
                err = loocv_error(train.x[:, cols], train.y)
            except SingularModelError:
                continue
            if round_best is None or err < round_best[0]:
                round_best = (err, fid)
        if round_best is None:
            break
        err, fid = round_best
        if best_so_far - err < min_improvement:
            break
        ordered.append(fid)
        errors.append(err)
        current.append(fid)
        candidates.remove(fid)
        best_so_far = err

    return SelectionTrace(
        ordered_features=tuple(ordered),
        cv_errors=tuple(errors),
        initial_error=initial_error,
    )
