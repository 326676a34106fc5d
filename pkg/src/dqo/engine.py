"""The sequential question-ordering loop.

Each step scores every still-unanswered, still-available feature by the
expected width of the next prediction interval if that feature were answered
(marginalizing over the feature's empirical value distribution), then asks
the feature minimizing ``expected_width + lambda * cost``. Answering a
feature zeroes its measurement error, re-imputes the remaining unknowns
conditioned on it, and appends a fresh prediction, so a session accumulates
|ordering| + 1 predictions including the initial one.

Two aggregation forms are supported for the expected width. The default
``root_of_mean`` applies one square root to the probability-weighted sum of
quadratic forms; ``mean_of_roots`` weights per-value square roots instead.
They differ whenever the candidate's quadratic form varies across its values
(root_of_mean >= mean_of_roots by Jensen's inequality).

A "don't know" response parks the feature: it leaves the candidate pool, its
measurement error stays in force, and no cost is charged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .data import FeatureSpec
from .imputation import KnnImputer
from .regression import PredictionInterval, TrainedModel, predict_interval, t_quantile

ROOT_OF_MEAN = "root_of_mean"
MEAN_OF_ROOTS = "mean_of_roots"
WIDTH_FORMS = (ROOT_OF_MEAN, MEAN_OF_ROOTS)

DONT_KNOW = "dont_know"


class SessionComplete(Exception):
    """No askable features remain."""


class AnswerError(ValueError):
    """Answer submitted for the wrong feature or with an invalid value."""


@dataclass(frozen=True)
class SessionState:
    """Immutable snapshot of one respondent's session.

    ``known``/``answers`` hold answered features, ``unavailable`` the
    "don't know" ones, ``z`` the current imputed feature vector, ``delta``
    the active per-feature measurement errors (zero on answered features),
    ``ordering`` every feature asked so far, and ``predictions`` the interval
    after each step (initial prediction included). ``pending`` is the feature
    the session is currently waiting on.
    """

    known: frozenset[int]
    answers: Mapping[int, float]
    unavailable: frozenset[int]
    z: np.ndarray
    delta: np.ndarray
    ordering: tuple[int, ...]
    predictions: tuple[PredictionInterval, ...]
    cumulative_cost: float
    lam: float
    alpha: float
    initial_known: frozenset[int]
    pending: int | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.known & self.unavailable:
            raise ValueError("known and unavailable sets overlap")
        if len(set(self.ordering)) != len(self.ordering):
            raise ValueError("ordering contains repeats")
        if not set(self.ordering) <= (self.known | self.unavailable):
            raise ValueError("ordering mentions features that were never resolved")
        if len(self.predictions) != len(self.ordering) + 1:
            raise ValueError(
                f"{len(self.predictions)} predictions for {len(self.ordering)} asked features"
            )
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        for f in self.known:
            if self.delta[f - 1] != 0.0:
                raise ValueError(f"answered feature {f} still carries measurement error")

    @property
    def n_features(self) -> int:
        return self.z.shape[0]

    def candidates(self) -> list[int]:
        """Unanswered, still-available feature ids in ascending order."""
        blocked = self.known | self.unavailable
        return [f for f in range(1, self.n_features + 1) if f not in blocked]

    @property
    def complete(self) -> bool:
        return not self.candidates()

    @property
    def questions_total(self) -> int:
        """Questions this session could ask: features unknown at the start."""
        return self.n_features - len(self.initial_known)


@dataclass(frozen=True)
class ExpectedWidths:
    """Candidate feature id -> expected next prediction-interval width."""

    values: dict[int, float]

    def __post_init__(self) -> None:
        for fid, width in self.values.items():
            if width <= 0:
                raise ValueError(f"expected width for feature {fid} must be > 0, got {width}")


@dataclass(frozen=True)
class StepRecord:
    """One row of a session trajectory: state after ``step`` answers."""

    step: int
    asked_feature: int | None
    width: float
    point: float
    cum_cost: float


def _validate_answer(spec: FeatureSpec, value: float) -> tuple[float, str | None]:
    """Check an answer against its spec; returns (value, out-of-range flag or None)."""
    value = float(value)
    if not math.isfinite(value):
        raise AnswerError(f"answer for {spec.name!r} must be finite, got {value}")
    if spec.is_discrete:
        if spec.range and value not in spec.range:
            raise AnswerError(
                f"answer {value!r} for {spec.name!r} is outside its range "
                f"{list(spec.range)}"
            )
        return value, None
    if len(spec.range) >= 2:
        # Continuous answers beyond the stats grid (extended by half an end bin)
        # are kept, just flagged as unusual.
        lo = spec.range[0] - 0.5 * (spec.range[1] - spec.range[0])
        hi = spec.range[-1] + 0.5 * (spec.range[-1] - spec.range[-2])
        if not lo <= value <= hi:
            return value, (
                f"answer {value!r} for {spec.name!r} lies outside the training "
                f"spread [{lo:.6g}, {hi:.6g}]"
            )
    return value, None


def _partial_vector(answers: Mapping[int, float], d: int) -> np.ndarray:
    x = np.zeros(d)
    for fid, value in answers.items():
        x[fid - 1] = value
    return x


def start_session(
    model: TrainedModel,
    specs: Sequence[FeatureSpec],
    imputer: KnnImputer,
    base_delta: np.ndarray,
    prefilled: Mapping[int, float] | None = None,
    lam: float = 0.0,
    alpha: float = 0.1,
) -> SessionState:
    """Open a session with the given prefilled answers and make the initial prediction.

    Prefilled features charge no cost; their measurement errors are zeroed.
    With nothing prefilled the initial prediction comes from the training
    marginals (cold start).
    """
    d = model.n_features
    prefilled = dict(prefilled or {})
    answers: dict[int, float] = {}
    flags: list[str] = []
    for fid, value in prefilled.items():
        if not 1 <= fid <= d:
            raise AnswerError(f"prefilled feature id {fid} outside 1..{d}")
        answers[fid], flag = _validate_answer(specs[fid - 1], value)
        if flag:
            flags.append(flag)
    known = frozenset(answers)
    delta = np.asarray(base_delta, dtype=float).copy()
    for fid in known:
        delta[fid - 1] = 0.0
    z = imputer.estimate(_partial_vector(answers, d), known)
    first = predict_interval(model, z, delta, alpha)
    return SessionState(
        known=known,
        answers=answers,
        unavailable=frozenset(),
        z=z,
        delta=delta,
        ordering=(),
        predictions=(first,),
        cumulative_cost=0.0,
        lam=lam,
        alpha=alpha,
        initial_known=known,
        flags=tuple(flags),
    )


def expected_interval_widths(
    model: TrainedModel,
    state: SessionState,
    specs: Sequence[FeatureSpec],
    alpha: float,
    form: str = ROOT_OF_MEAN,
) -> ExpectedWidths:
    """Expected next-interval width for each candidate feature.

    For candidate f the width marginalizes over f's empirical values r with
    proportions p: each evaluation plugs r into the imputed vector, zeroes
    f's measurement error, and accumulates the two quadratic forms of the
    interval formula. Raises SessionComplete when no candidates remain.
    """
    if form not in WIDTH_FORMS:
        raise ValueError(f"unknown width form {form!r}; expected one of {WIDTH_FORMS}")
    candidates = state.candidates()
    if not candidates:
        raise SessionComplete("all features are answered or unavailable")

    g = model.gram_inverse
    s2 = model.sigma2_hat
    t_val = t_quantile(model.dof, 1.0 - alpha / 2.0)
    zbar = np.concatenate([[1.0], state.z])
    dbar = np.concatenate([[0.0], state.delta])

    values: dict[int, float] = {}
    for f in candidates:
        spec = specs[f - 1]
        if not spec.range:
            raise ValueError(
                f"feature {spec.name!r} has no computed range/proportions; "
                "run compute_feature_stats first"
            )
        r_values = np.asarray(spec.range)
        props = np.asarray(spec.proportions)

        d_f = dbar.copy()
        d_f[f] = 0.0  # answering f removes its estimation error
        qd = float(d_f @ g @ d_f)

        z_f = np.tile(zbar, (len(r_values), 1))
        z_f[:, f] = r_values
        qz = np.einsum("ij,jk,ik->i", z_f, g, z_f)

        if form == ROOT_OF_MEAN:
            v = float(props @ (qz + qd))
            width = 2.0 * t_val * math.sqrt(s2 * (1.0 + v))
        else:
            width = 2.0 * t_val * float(props @ np.sqrt(s2 * (1.0 + qz + qd)))
        values[f] = width
    return ExpectedWidths(values=values)


def choose_next(
    widths: ExpectedWidths, costs: Mapping[int, float], lam: float
) -> int:
    """argmin over candidates of expected width + lambda * cost.

    Ties break toward the smaller expected width, then the lower feature id.
    """
    if not widths.values:
        raise SessionComplete("no candidate features to choose from")
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    return min(
        widths.values,
        key=lambda f: (widths.values[f] + lam * costs[f], widths.values[f], f),
    )


def apply_answer(
    state: SessionState,
    f: int,
    value: float | str,
    imputer: KnnImputer,
    model: TrainedModel,
    specs: Sequence[FeatureSpec],
) -> SessionState:
    """Fold one response into the session and append the next prediction.

    ``value`` is the respondent's answer, or the DONT_KNOW marker. Answers
    join the known set, zero the feature's measurement error, charge its
    cost, and re-impute the remaining unknowns; don't-knows park the feature
    with no cost and unchanged errors. ``f`` must be the pending question.
    """
    if state.pending != f:
        raise AnswerError(
            f"feature {f} is not the pending question (waiting on {state.pending})"
        )
    if f in state.known or f in state.unavailable:
        raise AnswerError(f"feature {f} was already resolved")

    if isinstance(value, str) and value == DONT_KNOW:
        next_pred = predict_interval(model, state.z, state.delta, state.alpha)
        return replace(
            state,
            unavailable=state.unavailable | {f},
            ordering=state.ordering + (f,),
            predictions=state.predictions + (next_pred,),
            pending=None,
        )

    spec = specs[f - 1]
    answer, flag = _validate_answer(spec, value)  # type: ignore[arg-type]
    answers = dict(state.answers)
    answers[f] = answer
    known = state.known | {f}
    delta = state.delta.copy()
    delta[f - 1] = 0.0
    z = imputer.estimate(_partial_vector(answers, state.n_features), known)
    next_pred = predict_interval(model, z, delta, state.alpha)
    return replace(
        state,
        known=known,
        answers=answers,
        z=z,
        delta=delta,
        ordering=state.ordering + (f,),
        predictions=state.predictions + (next_pred,),
        cumulative_cost=state.cumulative_cost + spec.cost,
        pending=None,
        flags=state.flags + (flag,) if flag else state.flags,
    )


class Orderer:
    """Shared choose-next interface so every ordering strategy reuses the run loop."""

    name = "base"
    lam = 0.0

    def begin(self, row_key: int) -> None:
        """Reset per-sample state; called once before each simulated row."""

    def choose(
        self,
        model: TrainedModel,
        state: SessionState,
        specs: Sequence[FeatureSpec],
        imputer: KnnImputer,
        alpha: float,
        x_true: np.ndarray | None = None,
    ) -> int:
        raise NotImplementedError


class DqoOrderer(Orderer):
    """Minimize expected next-interval width plus lambda * cost."""

    name = "dqo"

    def __init__(self, lam: float = 0.0, form: str = ROOT_OF_MEAN):
        self.lam = lam
        self.form = form

    def choose(self, model, state, specs, imputer, alpha, x_true=None):
        widths = expected_interval_widths(model, state, specs, alpha, form=self.form)
        costs = {s.id: s.cost for s in specs}
        return choose_next(widths, costs, self.lam)


class OracleOrderer(Orderer):
    """Minimize the ACTUAL next-interval width using the true feature values.

    Reference upper bound, not deployable: scoring a candidate reveals its
    true value, re-imputes the remaining unknowns conditioned on it, and
    measures the realized interval width (plus lambda * cost when lam > 0).
    """

    name = "oracle"

    def __init__(self, lam: float = 0.0):
        self.lam = lam

    def choose(self, model, state, specs, imputer, alpha, x_true=None):
        if x_true is None:
            raise ValueError("oracle ordering requires the true feature vector")
        candidates = state.candidates()
        if not candidates:
            raise SessionComplete("all features are answered or unavailable")
        best: tuple[float, float, int] | None = None
        for f in candidates:
            answers = dict(state.answers)
            answers[f] = float(x_true[f - 1])
            known = state.known | {f}
            z = imputer.estimate(_partial_vector(answers, state.n_features), known)
            delta = state.delta.copy()
            delta[f - 1] = 0.0
            width = predict_interval(model, z, delta, alpha).width
            key = (width + self.lam * specs[f - 1].cost, width, f)
            if best is None or key < best:
                best = key
        return best[2]


class RandomOrderer(Orderer):
    """Fresh random question ordering per sample, deterministic given the seed."""

    name = "random"

    def __init__(self, seed: int):
        self.seed = seed
        self._row_key = 0
        self._order: list[int] | None = None

    def begin(self, row_key: int) -> None:
        self._row_key = row_key
        self._order = None

    def choose(self, model, state, specs, imputer, alpha, x_true=None):
        if self._order is None:
            rng = np.random.default_rng([self.seed, self._row_key])
            self._order = [int(f) + 1 for f in rng.permutation(model.n_features)]
        blocked = state.known | state.unavailable
        for f in self._order:
            if f not in blocked:
                return f
        raise SessionComplete("all features are answered or unavailable")


class FixedOrderer(Orderer):
    """Ask questions in one fixed priority order, identical for every sample."""

    def __init__(self, name: str, priority: Sequence[int]):
        self.name = name
        self._priority = list(priority)

    def choose(self, model, state, specs, imputer, alpha, x_true=None):
        blocked = state.known | state.unavailable
        for f in self._priority:
            if f not in blocked:
                return f
        for f in range(1, model.n_features + 1):  # features missing from the priority list
            if f not in blocked:
                return f
        raise SessionComplete("all features are answered or unavailable")


def fixed_decreasing_orderer(delta: np.ndarray) -> FixedOrderer:
    """Fixed order by decreasing measurement error (ties toward lower id)."""
    order = sorted(range(1, len(delta) + 1), key=lambda f: (-delta[f - 1], f))
    return FixedOrderer("fixed_decreasing", order)


def make_orderer(
    kind: str,
    lam: float = 0.0,
    *,
    seed: int | None = None,
    delta: np.ndarray | None = None,
    selection_order: Sequence[int] | None = None,
    form: str = ROOT_OF_MEAN,
) -> Orderer:
    """Construct an orderer by kind, validating its prerequisites."""
    if kind == "dqo":
        return DqoOrderer(lam, form=form)
    if kind == "oracle":
        return OracleOrderer(lam)
    if kind == "random":
        if seed is None:
            raise ValueError("random ordering requires a seed")
        return RandomOrderer(seed)
    if kind == "fixed_decreasing":
        if delta is None:
            raise ValueError("fixed_decreasing ordering requires the measurement-error vector")
        return fixed_decreasing_orderer(np.asarray(delta, dtype=float))
    if kind == "fixed_selection":
        if selection_order is None:
            raise ValueError("fixed_selection ordering requires a selection trace")
        return FixedOrderer("fixed_selection", selection_order)
    raise ValueError(f"unknown orderer kind {kind!r}")


def next_question(
    model: TrainedModel,
    state: SessionState,
    specs: Sequence[FeatureSpec],
    imputer: KnnImputer,
    orderer: Orderer | None = None,
    x_true: np.ndarray | None = None,
) -> tuple[SessionState, int]:
    """Choose the next feature to ask and mark it pending.

    Raises SessionComplete when every feature is answered or unavailable.
    """
    if state.complete:
        raise SessionComplete("all features are answered or unavailable")
    chooser = orderer if orderer is not None else DqoOrderer(state.lam)
    f = chooser.choose(model, state, specs, imputer, state.alpha, x_true=x_true)
    if f not in state.candidates():
        raise ValueError(f"orderer chose non-candidate feature {f}")
    return replace(state, pending=f), f


def session_steps(state: SessionState, specs: Sequence[FeatureSpec]) -> list[StepRecord]:
    """Per-step trajectory rows (width, point, cumulative cost) for a session."""
    costs = {s.id: s.cost for s in specs}
    records = [
        StepRecord(
            step=0,
            asked_feature=None,
            width=state.predictions[0].width,
            point=state.predictions[0].point,
            cum_cost=0.0,
        )
    ]
    cum = 0.0
    for q, f in enumerate(state.ordering, start=1):
        if f in state.known:
            cum += costs[f]
        pred = state.predictions[q]
        records.append(
            StepRecord(step=q, asked_feature=f, width=pred.width, point=pred.point, cum_cost=cum)
        )
    return records


def run_dqo_all(
    model: TrainedModel,
    x: np.ndarray,
    initial_known: frozenset[int] | set[int],
    imputer: KnnImputer,
    specs: Sequence[FeatureSpec],
    base_delta: np.ndarray,
    lam: float = 0.0,
    alpha: float = 0.1,
    orderer: Orderer | None = None,
    row_key: int = 0,
) -> tuple[list[int], list[PredictionInterval], list[StepRecord]]:
    """Simulate a full session, answering every chosen question from ``x``.

    Loops exactly d - |initial_known| times and returns the asked ordering,
    the |ordering| + 1 predictions, and the per-step trajectory records. The
    final prediction equals the full-information model prediction since every
    feature ends up answered with its true value.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(f"x has shape {x.shape}, expected ({model.n_features},)")
    chooser = orderer if orderer is not None else DqoOrderer(lam)
    chooser.begin(row_key)
    prefilled = {f: float(x[f - 1]) for f in initial_known}
    state = start_session(
        model, specs, imputer, base_delta, prefilled=prefilled, lam=lam, alpha=alpha
    )
    while True:
        try:
            state, f = next_question(model, state, specs, imputer, chooser, x_true=x)
        except SessionComplete:
            break
        state = apply_answer(state, f, float(x[f - 1]), imputer, model, specs)
    return list(state.ordering), list(state.predictions), session_steps(state, specs)
