"""Compute accounting: training and per-response FLOPs, Pareto frontier.

Training compute is 6 * active_params * vl_tokens (multimodal-stage tokens
only; active parameters include the vision encoder and projector). Response
compute is 2 * active_params * mean generated tokens, the mean taken
unweighted across evaluations. Both are straight products, kept exact to
float precision; no hidden unit conversions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError


@dataclass(frozen=True)
class ModelSpec:
    name: str
    active_params: float
    vl_tokens: float
    per_eval_mean_tokens: Mapping[str, float]
    accuracy: float | None = None

    def validate(self) -> "ModelSpec":
        if not self.name:
            raise ConfigError("model spec needs a name")
        if not (math.isfinite(self.active_params) and self.active_params > 0):
            raise ConfigError(f"model {self.name!r}: active_params must be positive")
        if not (math.isfinite(self.vl_tokens) and self.vl_tokens >= 0):
            raise ConfigError(f"model {self.name!r}: vl_tokens must be >= 0")
        for eval_name, tokens in self.per_eval_mean_tokens.items():
            if not (math.isfinite(tokens) and tokens >= 0):
                raise ConfigError(
                    f"model {self.name!r}: bad token mean for {eval_name!r}: {tokens}"
                )
        if self.accuracy is not None and not math.isfinite(self.accuracy):
            raise ConfigError(f"model {self.name!r}: accuracy must be finite")
        return self


def mean_response_tokens(model: ModelSpec) -> float:
    """Unweighted mean of per-eval generated-token means."""
    values = list(model.per_eval_mean_tokens.values())
    if not values:
        raise ConfigError(f"model {model.name!r} has no per-eval token means")
    return sum(values) / len(values)


def train_flops(active_params: float, vl_tokens: float) -> float:
    if active_params <= 0:
        raise ValueError(f"active_params must be positive, got {active_params}")
    if vl_tokens < 0:
        raise ValueError(f"vl_tokens must be >= 0, got {vl_tokens}")
    return 6.0 * active_params * vl_tokens


def response_flops(active_params: float, mean_tokens: float) -> float:
    if active_params <= 0:
        raise ValueError(f"active_params must be positive, got {active_params}")
    if mean_tokens < 0:
        raise ValueError(f"mean_tokens must be >= 0, got {mean_tokens}")
    return 2.0 * active_params * mean_tokens


@dataclass(frozen=True)
class EfficiencyRecord:
    name: str
    active_params: float
    vl_tokens: float
    mean_tokens: float
    train_flops: float
    response_flops: float
    accuracy: float | None


def efficiency_record(model: ModelSpec) -> EfficiencyRecord:
    model.validate()
    mean_tokens = mean_response_tokens(model)
    return EfficiencyRecord(
        name=model.name,
        active_params=model.active_params,
        vl_tokens=model.vl_tokens,
        mean_tokens=mean_tokens,
        train_flops=train_flops(model.active_params, model.vl_tokens),
        response_flops=response_flops(model.active_params, mean_tokens),
        accuracy=model.accuracy,
    )


def load_model_specs(path: str | Path) -> list[ModelSpec]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read model specs {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model specs {path} are not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigError("model specs file must hold a JSON list")
    specs = []
    names = set()
    for obj in raw:
        if not isinstance(obj, dict):
            raise ConfigError("each model spec must be an object")
        try:
            spec = ModelSpec(
                name=obj["name"],
                active_params=float(obj["active_params"]),
                vl_tokens=float(obj["vl_tokens"]),
                per_eval_mean_tokens={
                    k: float(v) for k, v in obj.get("per_eval_mean_tokens", {}).items()
                },
                accuracy=float(obj["accuracy"]) if obj.get("accuracy") is not None else None,
            ).validate()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad model spec entry: {exc}") from exc
        if spec.name in names:
            raise ConfigError(f"duplicate model name {spec.name!r}")
        names.add(spec.name)
        specs.append(spec)
    if not specs:
        raise ConfigError("model specs file is empty")
    return specs


@dataclass(frozen=True)
class ParetoPoint:
    name: str
    cost: float
    accuracy: float

    def validate(self) -> "ParetoPoint":
        if not (math.isfinite(self.cost) and self.cost > 0):
            raise ValueError(f"point {self.name!r}: cost must be positive and finite")
        if not math.isfinite(self.accuracy):
            raise ValueError(f"point {self.name!r}: accuracy must be finite")
        return self


def dominates(p: ParetoPoint, q: ParetoPoint) -> bool:
    """No worse on both axes, strictly better on at least one."""
    return (
        p.cost <= q.cost
        and p.accuracy >= q.accuracy
        and (p.cost < q.cost or p.accuracy > q.accuracy)
    )


def pareto_frontier(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """Non-dominated subset, ascending cost; both-axis ties all survive."""
    if not points:
        raise ValueError("pareto_frontier needs at least one point")
    for point in points:
        point.validate()
    ordered = sorted(points, key=lambda p: (p.cost, -p.accuracy, p.name))
    frontier: list[ParetoPoint] = []
    best_cheaper = -math.inf  # max accuracy over strictly cheaper points
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].cost == ordered[i].cost:
            j += 1
        group = ordered[i:j]
        group_best = group[0].accuracy
        if group_best > best_cheaper:
            frontier.extend(p for p in group if p.accuracy == group_best)
        best_cheaper = max(best_cheaper, group_best)
        i = j
    return frontier


def frontier_from_records(records: Sequence[EfficiencyRecord]) -> list[ParetoPoint]:
    """Response-compute vs accuracy frontier; every record needs accuracy."""
    missing = [r.name for r in records if r.accuracy is None]
    if missing:
        raise ConfigError(f"records without accuracy cannot join the frontier: {missing}")
    return pareto_frontier(
        [ParetoPoint(r.name, r.response_flops, r.accuracy) for r in records]  # type: ignore[arg-type]
    )


def records_to_json(records: Sequence[EfficiencyRecord]) -> list[dict]:
    return [
        {
            "name": r.name,
            "active_params": r.active_params,
            "vl_tokens": r.vl_tokens,
            "mean_tokens": r.mean_tokens,
            "train_flops": r.train_flops,
            "response_flops": r.response_flops,
            "accuracy": r.accuracy,
        }
        for r in records
    ]


def records_to_tsv(records: Sequence[EfficiencyRecord]) -> str:
    lines = ["name\tactive_params\tvl_tokens\tmean_tokens\ttrain_flops\tresponse_flops\taccuracy"]
    for r in records:
        acc = "" if r.accuracy is None else f"{r.accuracy:g}"
        lines.append(
            f"{r.name}\t{r.active_params:.3g}\t{r.vl_tokens:.3g}\t{r.mean_tokens:g}"
            f"\t{r.train_flops:.3g}\t{r.response_flops:.3g}\t{acc}"
        )
    return "\n".join(lines) + "\n"
