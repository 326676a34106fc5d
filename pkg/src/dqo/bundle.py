"""Trained model bundles: everything a session or simulation needs, in one file.

A bundle packages the fitted regression model, the model features' stats
(ranges, proportions, costs, prompts), the training matrix and scaling the
kNN imputer needs, the per-feature measurement errors, and the training-time
selection order. Serialized as JSON; floats survive the round trip exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DatasetTable, FeatureSpec, compute_feature_stats, restrict_to, with_specs
from .imputation import ImputerConfig, KnnImputer, estimate_measurement_error
from .regression import TrainedModel, fit_ols
from .selection import SelectionTrace, forward_select

BUNDLE_FORMAT = "dqo-bundle-v1"


@dataclass(frozen=True)
class ModelBundle:
    name: str
    model: TrainedModel
    specs: tuple[FeatureSpec, ...]
    x_train: np.ndarray
    config: ImputerConfig
    delta: np.ndarray
    selection: SelectionTrace | None
    alpha: float
    target_name: str = "y"

    @property
    def imputer(self) -> KnnImputer:
        return KnnImputer(
            x_train=self.x_train,
            config=self.config,
            discrete_mask=np.array([s.is_discrete for s in self.specs]),
        )

    @property
    def free_set(self) -> frozenset[int]:
        return frozenset(s.id for s in self.specs if s.is_free)

    @property
    def selection_order(self) -> tuple[int, ...]:
        return self.selection.ordered_features if self.selection else ()

    def costs(self) -> dict[int, float]:
        return {s.id: s.cost for s in self.specs}

    def to_dict(self) -> dict:
        return {
            "format": BUNDLE_FORMAT,
            "name": self.name,
            "alpha": float(self.alpha),
            "target": self.target_name,
            "model": self.model.to_dict(),
            "features": [
                {
                    "id": s.id,
                    "name": s.name,
                    "kind": s.kind,
                    "cost": float(s.cost),
                    "cost_tier": s.cost_tier,
                    "range": [float(v) for v in s.range],
                    "proportions": [float(p) for p in s.proportions],
                    "prompt": s.prompt,
                }
                for s in self.specs
            ],
            "imputer": {
                "k": int(self.config.k),
                "means": [float(v) for v in self.config.means],
                "sds": [float(v) for v in self.config.sds],
            },
            "delta": [float(v) for v in self.delta],
            "selection": self.selection.to_dict() if self.selection else None,
            "x_train": [[float(v) for v in row] for row in self.x_train],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelBundle":
        if data.get("format") != BUNDLE_FORMAT:
            raise ValueError(f"not a model bundle (format {data.get('format')!r})")
        specs = tuple(
            FeatureSpec(
                id=int(f["id"]),
                name=f["name"],
                kind=f["kind"],
                cost=float(f["cost"]),
                cost_tier=f["cost_tier"],
                range=tuple(float(v) for v in f["range"]),
                proportions=tuple(float(p) for p in f["proportions"]),
                prompt=f.get("prompt"),
            )
            for f in data["features"]
        )
        imp = data["imputer"]
        return cls(
            name=data["name"],
            model=TrainedModel.from_dict(data["model"]),
            specs=specs,
            x_train=np.array(data["x_train"], dtype=float),
            config=ImputerConfig(
                k=int(imp["k"]),
                means=np.array(imp["means"], dtype=float),
                sds=np.array(imp["sds"], dtype=float),
            ),
            delta=np.array(data["delta"], dtype=float),
            selection=(
                SelectionTrace.from_dict(data["selection"]) if data["selection"] else None
            ),
            alpha=float(data["alpha"]),
            target_name=data.get("target", "y"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_bundle(
    table: DatasetTable,
    *,
    alpha: float = 0.1,
    k: int = 100,
    max_levels: int = 10,
    max_features: int = 30,
    min_improvement: float = 0.0,
    name: str = "model",
) -> ModelBundle:
    """Full training pipeline: select features, fit, and package a bundle.

    Forward selection picks up to ``max_features`` costly features on top of
    the free set; the bundle's model covers free + selected features,
    renumbered 1..d in (free ids ascending, then selection order). Feature
    stats come from the training rows, and measurement errors use the free
    set as the known profile.
    """
    trace = forward_select(table, max_features=max_features, min_improvement=min_improvement)
    model_ids = sorted(table.free_set) + list(trace.ordered_features)
    if not model_ids:
        raise ValueError("no features survived selection and the free set is empty")
    mtable = restrict_to(table, model_ids)
    specs = compute_feature_stats(mtable, max_levels=max_levels)
    mtable = with_specs(mtable, specs)

    model = fit_ols(mtable.x, mtable.y, alpha=alpha)
    config = ImputerConfig.from_table(mtable, k)
    delta = estimate_measurement_error(mtable, config, mtable.free_set)

    renumber = {orig: new for new, orig in enumerate(model_ids, start=1)}
    selection = SelectionTrace(
        ordered_features=tuple(renumber[f] for f in trace.ordered_features),
        cv_errors=trace.cv_errors,
        initial_error=trace.initial_error,
    )
    return ModelBundle(
        name=name,
        model=model,
        specs=mtable.features,
        x_train=mtable.x,
        config=config,
        delta=delta,
        selection=selection,
        alpha=alpha,
        target_name=table.target_name,
    )
