"""Engine configuration: marker strip list plus per-benchmark gate policies.

The policy map must contain a "*" default; named entries override it field
by field. Image-only policies (no usable text signal on that benchmark)
demand a tightened image threshold unless the config explicitly acknowledges
the risk with ack_low_tau_i.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from . import textnorm
from .errors import ConfigError

MODE_JOINT = "joint"
MODE_IMAGE_ONLY = "image_only"
MODES = (MODE_JOINT, MODE_IMAGE_ONLY)

DEFAULT_TAU_I = 0.95
DEFAULT_TAU_T = 0.8
IMAGE_ONLY_MIN_TAU_I = 0.995

_POLICY_KEYS = ("tau_i", "tau_t", "mode", "n_default", "short_threshold", "ack_low_tau_i")


@dataclass(frozen=True)
class BenchmarkPolicy:
    benchmark: str
    tau_i: float = DEFAULT_TAU_I
    tau_t: float = DEFAULT_TAU_T
    mode: str = MODE_JOINT
    n_default: int = textnorm.DEFAULT_N
    short_threshold: int = textnorm.DEFAULT_SHORT_THRESHOLD
    ack_low_tau_i: bool = False

    def validate(self) -> "BenchmarkPolicy":
        if not 0.0 < self.tau_i <= 1.0:
            raise ConfigError(
                f"policy {self.benchmark!r}: tau_i must lie in (0, 1], got {self.tau_i}"
            )
        if not 0.0 < self.tau_t <= 1.0:
            raise ConfigError(
                f"policy {self.benchmark!r}: tau_t must lie in (0, 1], got {self.tau_t}"
            )
        if self.mode not in MODES:
            raise ConfigError(f"policy {self.benchmark!r}: unknown mode {self.mode!r}")
        if self.n_default < textnorm.SHORT_TEXT_N:
            raise ConfigError(
                f"policy {self.benchmark!r}: n_default must be >= {textnorm.SHORT_TEXT_N}"
            )
        if self.short_threshold < self.n_default:
            raise ConfigError(
                f"policy {self.benchmark!r}: short_threshold must be >= n_default"
            )
        if (
            self.mode == MODE_IMAGE_ONLY
            and self.tau_i < IMAGE_ONLY_MIN_TAU_I
            and not self.ack_low_tau_i
        ):
            raise ConfigError(
                f"policy {self.benchmark!r}: image_only mode needs tau_i >= "
                f"{IMAGE_ONLY_MIN_TAU_I} (set ack_low_tau_i to accept the risk)"
            )
        return self

    def to_json(self) -> dict:
        obj: dict = {
            "tau_i": self.tau_i,
            "tau_t": self.tau_t,
            "mode": self.mode,
            "n_default": self.n_default,
            "short_threshold": self.short_threshold,
        }
        if self.ack_low_tau_i:
            obj["ack_low_tau_i"] = True
        return obj


@dataclass(frozen=True)
class PolicySet:
    default: BenchmarkPolicy
    overrides: Mapping[str, BenchmarkPolicy] = field(default_factory=dict)


def resolve_policy(benchmark: str, policies: PolicySet) -> BenchmarkPolicy:
    """Exact-name override if present, else the default bound to this name."""
    override = policies.overrides.get(benchmark)
    if override is not None:
        return override
    return replace(policies.default, benchmark=benchmark)


@dataclass(frozen=True)
class EngineConfig:
    strip_list: tuple[str, ...] = textnorm.DEFAULT_STRIP_LIST
    policies: PolicySet = field(
        default_factory=lambda: PolicySet(default=BenchmarkPolicy(benchmark="*"))
    )

    def policy_for(self, benchmark: str) -> BenchmarkPolicy:
        return resolve_policy(benchmark, self.policies)


def default_config() -> EngineConfig:
    return EngineConfig()


def _policy_from_json(benchmark: str, obj: dict, base: BenchmarkPolicy) -> BenchmarkPolicy:
    if not isinstance(obj, dict):
        raise ConfigError(f"policy {benchmark!r} must be an object")
    unknown = set(obj) - set(_POLICY_KEYS)
    if unknown:
        raise ConfigError(f"policy {benchmark!r}: unknown keys {sorted(unknown)}")
    merged = replace(base, benchmark=benchmark, **obj)
    return merged.validate()


def config_from_json(obj: dict) -> EngineConfig:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - {"strip_list", "policies"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")

    strip_list = obj.get("strip_list", list(textnorm.DEFAULT_STRIP_LIST))
    if not isinstance(strip_list, list) or any(not isinstance(s, str) for s in strip_list):
        raise ConfigError("strip_list must be a list of strings")

    policies_obj = obj.get("policies", {"*": {}})
    if not isinstance(policies_obj, dict):
        raise ConfigError("policies must be an object")
    if "*" not in policies_obj:
        raise ConfigError('policies must contain a "*" default entry')

    default = _policy_from_json("*", policies_obj["*"], BenchmarkPolicy(benchmark="*"))
    overrides = {
        name: _policy_from_json(name, body, replace(default, benchmark=name))
        for name, body in sorted(policies_obj.items())
        if name != "*"
    }
    return EngineConfig(strip_list=tuple(strip_list), policies=PolicySet(default, overrides))


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", path=str(path)) from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}", path=str(path)) from exc
    return config_from_json(obj)


def config_to_json(config: EngineConfig) -> dict:
    policies = {"*": config.policies.default.to_json()}
    for name in sorted(config.policies.overrides):
        policies[name] = config.policies.overrides[name].to_json()
    return {"strip_list": list(config.strip_list), "policies": policies}


def config_hash(config: EngineConfig) -> str:
    """Content digest of the resolved config (canonical JSON, sha256)."""
    canon = json.dumps(config_to_json(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
