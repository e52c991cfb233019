"""Tracker configuration: defaults, flat key=value files, and snapshots.

Config files are plain text, one ``section.key=value`` per line, with
``#`` comments and blank lines ignored. Every tunable has a default, so an
empty mapping is a valid configuration. to_mapping() emits the complete
resolved snapshot (the form stored in run manifests), and from_mapping()
round-trips it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .critic import CriticConfig
from .features import ALL_KINDS, FeatureConfig
from .sampler import SamplerConfig


def parse_config_text(text: str) -> dict[str, str]:
    """Parse key=value lines into a mapping; errors carry line numbers."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config_file(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass
class TrackerConfig:
    """Every knob of the tracking pipeline, resolved."""

    seed: int = 0
    m: int = 10
    delta: int = 10
    epsilon: float = 1e-6
    tau_match: float = 0.0
    svm_c: float = 10.0
    svm_gamma: float = 0.7
    svm_budget: int = 100
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    critic: CriticConfig = field(default_factory=CriticConfig)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("tracker.m must be >= 1")
        if self.delta < 1:
            raise ValueError("tracker.delta must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("tracker.epsilon must be positive")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "TrackerConfig":
        """Build a config from flat keys, rejecting any unknown key."""
        cfg = dict(mapping)

        def take(key: str, conv, default):
            if key not in cfg:
                return default
            value = cfg.pop(key)
            try:
                return conv(value)
            except ValueError as exc:
                raise ValueError(f"bad value for {key}: {value!r} ({exc})") from exc

        def opt_float(value: str):
            return None if value.lower() in ("auto", "none") else float(value)

        def kinds(value: str) -> tuple[str, ...]:
            return tuple(k.strip() for k in value.split(",") if k.strip())

        out = cls(
            seed=take("seed", int, 0),
            m=take("tracker.m", int, 10),
            delta=take("tracker.delta", int, 10),
            epsilon=take("tracker.epsilon", float, 1e-6),
            tau_match=take("tracker.tau_match", float, 0.0),
            svm_c=take("svm.c", float, 10.0),
            svm_gamma=take("svm.gamma", float, 0.7),
            svm_budget=take("svm.budget", int, 100),
            sampler=SamplerConfig(
                n=take("sampler.n", int, 120),
                sigma_xy_factor=take("sampler.sigma_xy_factor", float, 0.3),
                sigma_scale=take("sampler.sigma_scale", float, 0.05),
            ),
            features=FeatureConfig(
                grid_rows=take("features.grid_rows", int, 4),
                grid_cols=take("features.grid_cols", int, 4),
                haar_kinds=take("features.haar_kinds", kinds, ALL_KINDS),
                include_histogram=take("features.include_histogram", _parse_bool, True),
                histogram_bins=take("features.histogram_bins", int, 8),
            ),
            critic=CriticConfig(
                candidates=take("critic.candidates", int, 64),
                max_rejects=take("critic.max_rejects", int, 10),
                budget=take("critic.budget", int, 50),
                sigma_dx=take("critic.sigma_dx", opt_float, None),
                sigma_dy=take("critic.sigma_dy", opt_float, None),
                sigma_ds=take("critic.sigma_ds", opt_float, None),
            ),
        )
        if cfg:
            raise ValueError(f"unknown config keys: {sorted(cfg)}")
        return out

    def to_mapping(self) -> dict[str, str]:
        """Complete flat snapshot; from_mapping() round-trips it."""

        def opt(v) -> str:
            return "auto" if v is None else repr(v)

        return {
            "seed": str(self.seed),
            "tracker.m": str(self.m),
            "tracker.delta": str(self.delta),
            "tracker.epsilon": repr(self.epsilon),
            "tracker.tau_match": repr(self.tau_match),
            "svm.c": repr(self.svm_c),
            "svm.gamma": repr(self.svm_gamma),
            "svm.budget": str(self.svm_budget),
            "sampler.n": str(self.sampler.n),
            "sampler.sigma_xy_factor": repr(self.sampler.sigma_xy_factor),
            "sampler.sigma_scale": repr(self.sampler.sigma_scale),
            "features.grid_rows": str(self.features.grid_rows),
            "features.grid_cols": str(self.features.grid_cols),
            "features.haar_kinds": ",".join(self.features.haar_kinds),
            "features.include_histogram": str(self.features.include_histogram).lower(),
            "features.histogram_bins": str(self.features.histogram_bins),
            "critic.candidates": str(self.critic.candidates),
            "critic.max_rejects": str(self.critic.max_rejects),
            "critic.budget": str(self.critic.budget),
            "critic.sigma_dx": opt(self.critic.sigma_dx),
            "critic.sigma_dy": opt(self.critic.sigma_dy),
            "critic.sigma_ds": opt(self.critic.sigma_ds),
        }
