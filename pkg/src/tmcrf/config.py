"""Experiment configuration: feature-group toggles, neighbor-order bounds,
topology selection, training hyperparameters, and the eight standard presets.

The on-disk format is a flat, human-diffable key-value file::

    topology = auto
    group.basic = on
    group.single = on
    group.single.max = 5
    train.sigma2 = 10.0
    property.Hydrophobic = ACF

``property.*`` lines, when present, replace the default property-group table
wholesale (used by reduced-alphabet fixtures).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from . import residues
from .errors import ConfigConflictError, MalformedConfigError
from .states import BINARY, EXTENDED

# Canonical group order (used for dumping and index sorting stability).
GROUP_NAMES: tuple[str, ...] = (
    "start_end_edge",
    "basic",
    "properties",
    "hydrophobic_window",
    "hydrophilic_window",
    "single",
    "double",
    "single_shuffled",
    "double_shuffled",
    "single_hydrophobic",
    "double_hydrophobic",
    "single_hydrophilic",
    "double_hydrophilic",
    "border",
    "short_loops",
    "electronic",
    "chemical_groups",
    "states",
)

# Groups with a neighbor-order bound and their default maxima.
DEFAULT_BOUNDS: dict[str, int] = {
    "single": 5,
    "double": 3,
    "single_shuffled": 6,
    "double_shuffled": 3,
    "single_hydrophobic": 6,
    "double_hydrophobic": 3,
    "single_hydrophilic": 6,
    "double_hydrophilic": 3,
}

# Groups whose label contexts exist only in the extended topology.
EXTENDED_ONLY_GROUPS = frozenset({"short_loops", "states"})

AUTO = "auto"

_DEFAULT_PROPERTIES = tuple(sorted(residues.PROPERTY_GROUPS.items()))


@dataclass(frozen=True)
class FeatureConfig:
    """Which feature groups are active, their bounds, and the property table."""

    enabled: frozenset[str] = frozenset()
    bounds: tuple[tuple[str, int], ...] = tuple(sorted(DEFAULT_BOUNDS.items()))
    property_groups: tuple[tuple[str, str], ...] = _DEFAULT_PROPERTIES

    def __post_init__(self):
        for name in self.enabled:
            if name not in GROUP_NAMES:
                raise MalformedConfigError(f"unknown feature group {name!r}")
        for name, k in self.bounds:
            if name not in DEFAULT_BOUNDS:
                raise MalformedConfigError(f"group {name!r} takes no neighbor bound")
            if k < 1:
                raise MalformedConfigError(f"group.{name}.max must be >= 1, got {k}")

    def is_enabled(self, name: str) -> bool:
        return name in self.enabled

    def bound(self, name: str) -> int:
        return dict(self.bounds)[name]

    def property_table(self) -> dict[str, str]:
        return dict(self.property_groups)

    def needs_extended(self) -> bool:
        return bool(self.enabled & EXTENDED_ONLY_GROUPS)


@dataclass(frozen=True)
class TrainConfig:
    """L-BFGS training hyperparameters.

    sigma2 may be math.inf to disable regularization; epsilon bounds the
    gradient infinity-norm at convergence.
    """

    sigma2: float = 10.0
    epsilon: float = 1e-4
    max_iters: int = 500
    lbfgs_history: int = 10

    def __post_init__(self):
        if not (self.sigma2 > 0):
            raise MalformedConfigError(f"train.sigma2 must be positive, got {self.sigma2}")
        if not (self.epsilon > 0):
            raise MalformedConfigError(f"train.epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise MalformedConfigError(f"train.max_iters must be >= 1, got {self.max_iters}")
        if self.lbfgs_history < 1:
            raise MalformedConfigError(f"train.lbfgs_history must be >= 1, got {self.lbfgs_history}")


@dataclass(frozen=True)
class ExperimentConfig:
    features: FeatureConfig = field(default_factory=FeatureConfig)
    topology: str = AUTO
    train: TrainConfig = field(default_factory=TrainConfig)
    exclude_prefix: str = ""
    data_train: str = ""
    data_test: str = ""

    def __post_init__(self):
        if self.topology not in (AUTO, BINARY, EXTENDED):
            raise MalformedConfigError(
                f"topology must be one of auto/binary/extended, got {self.topology!r}"
            )

    def resolve_topology(self) -> str:
        """Concrete topology kind, honoring groups that require the extended one."""
        if self.topology == AUTO:
            return EXTENDED if self.features.needs_extended() else BINARY
        if self.topology == BINARY and self.features.needs_extended():
            offenders = sorted(self.features.enabled & EXTENDED_ONLY_GROUPS)
            raise ConfigConflictError(
                f"groups {offenders} require the extended topology but binary was requested"
            )
        return self.topology


def preset(name: str) -> ExperimentConfig:
    """The eight standard feature-combination presets."""
    if name not in PRESETS:
        raise MalformedConfigError(f"unknown preset {name!r} (expected exp1..exp8)")
    enabled, bound_overrides = PRESETS[name]
    bounds = dict(DEFAULT_BOUNDS)
    bounds.update(bound_overrides)
    features = FeatureConfig(enabled=frozenset(enabled), bounds=tuple(sorted(bounds.items())))
    return ExperimentConfig(features=features)


_BASE4 = ("basic", "properties", "hydrophobic_window", "hydrophilic_window")
_HYDRO4 = (
    "single_hydrophobic",
    "double_hydrophobic",
    "single_hydrophilic",
    "double_hydrophilic",
)

PRESETS: dict[str, tuple[tuple[str, ...], dict[str, int]]] = {
    "exp1": (("basic", "properties"), {}),
    "exp2": (("single", "double"), {"single": 2, "double": 1}),
    "exp3": (_BASE4 + ("single", "double"), {"single": 5, "double": 1}),
    "exp4": (
        _BASE4 + ("single", "double", "single_shuffled", "double_shuffled"),
        {"single": 3, "double": 1, "single_shuffled": 3, "double_shuffled": 1},
    ),
    "exp5": (
        _BASE4 + ("single", "double", "single_shuffled", "double_shuffled"),
        {"single": 5, "double": 3, "single_shuffled": 6, "double_shuffled": 3},
    ),
    "exp6": (
        _BASE4 + ("single", "double", "single_shuffled", "double_shuffled") + _HYDRO4,
        {
            "single": 5,
            "double": 3,
            "single_shuffled": 6,
            "double_shuffled": 3,
            "single_hydrophobic": 3,
            "double_hydrophobic": 1,
            "single_hydrophilic": 3,
            "double_hydrophilic": 1,
        },
    ),
    "exp7": (
        _BASE4
        + ("single", "double", "single_shuffled", "double_shuffled")
        + _HYDRO4
        + ("border", "short_loops", "electronic"),
        {
            "single": 5,
            "double": 3,
            "single_shuffled": 6,
            "double_shuffled": 3,
            "single_hydrophobic": 6,
            "double_hydrophobic": 3,
            "single_hydrophilic": 6,
            "double_hydrophilic": 3,
        },
    ),
    "exp8": (
        _BASE4
        + ("single", "double", "single_shuffled", "double_shuffled")
        + _HYDRO4
        + ("border", "short_loops", "electronic", "chemical_groups", "states"),
        {
            "single": 5,
            "double": 3,
            "single_shuffled": 6,
            "double_shuffled": 3,
            "single_hydrophobic": 6,
            "double_hydrophobic": 3,
            "single_hydrophilic": 6,
            "double_hydrophilic": 3,
        },
    ),
}


def _parse_float(key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise MalformedConfigError(f"{key}: expected a number, got {value!r}") from None
    return out


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise MalformedConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_toggle(key: str, value: str) -> bool:
    if value == "on":
        return True
    if value == "off":
        return False
    raise MalformedConfigError(f"{key}: expected on/off, got {value!r}")


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse the flat key-value format, applying entries on top of ``base``."""
    cfg = base if base is not None else ExperimentConfig()
    enabled = set(cfg.features.enabled)
    bounds = dict(cfg.features.bounds)
    properties: dict[str, str] = {}
    topology = cfg.topology
    train_kw = {
        "sigma2": cfg.train.sigma2,
        "epsilon": cfg.train.epsilon,
        "max_iters": cfg.train.max_iters,
        "lbfgs_history": cfg.train.lbfgs_history,
    }
    exclude_prefix = cfg.exclude_prefix
    data_train = cfg.data_train
    data_test = cfg.data_test

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise MalformedConfigError(f"line {lineno}: empty key")

        if key == "topology":
            if value not in (AUTO, BINARY, EXTENDED):
                raise MalformedConfigError(f"line {lineno}: bad topology {value!r}")
            topology = value
        elif key.startswith("group."):
            rest = key[len("group.") :]
            if rest.endswith(".max"):
                name = rest[: -len(".max")]
                if name not in DEFAULT_BOUNDS:
                    raise MalformedConfigError(f"line {lineno}: group {name!r} takes no neighbor bound")
                bounds[name] = _parse_int(key, value)
            else:
                if rest not in GROUP_NAMES:
                    raise MalformedConfigError(f"line {lineno}: unknown feature group {rest!r}")
                if _parse_toggle(key, value):
                    enabled.add(rest)
                else:
                    enabled.discard(rest)
        elif key == "train.sigma2":
            train_kw["sigma2"] = math.inf if value == "inf" else _parse_float(key, value)
        elif key == "train.epsilon":
            train_kw["epsilon"] = _parse_float(key, value)
        elif key == "train.max_iters":
            train_kw["max_iters"] = _parse_int(key, value)
        elif key == "train.lbfgs_history":
            train_kw["lbfgs_history"] = _parse_int(key, value)
        elif key == "exclude_prefix":
            exclude_prefix = value
        elif key == "data.train":
            data_train = value
        elif key == "data.test":
            data_test = value
        elif key.startswith("property."):
            name = key[len("property.") :]
            if not name:
                raise MalformedConfigError(f"line {lineno}: empty property group name")
            properties[name] = value
        else:
            raise MalformedConfigError(f"line {lineno}: unknown key {key!r}")

    property_groups = tuple(sorted(properties.items())) if properties else cfg.features.property_groups
    features = FeatureConfig(
        enabled=frozenset(enabled),
        bounds=tuple(sorted(bounds.items())),
        property_groups=property_groups,
    )
    return ExperimentConfig(
        features=features,
        topology=topology,
        train=TrainConfig(**train_kw),
        exclude_prefix=exclude_prefix,
        data_train=data_train,
        data_test=data_test,
    )


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MalformedConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, base=base)


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical rendering; parse(dump(cfg)) == cfg."""
    lines = [f"topology = {cfg.topology}"]
    bounds = dict(cfg.features.bounds)
    for name in GROUP_NAMES:
        lines.append(f"group.{name} = {'on' if cfg.features.is_enabled(name) else 'off'}")
        if name in bounds:
            lines.append(f"group.{name}.max = {bounds[name]}")
    sigma2 = "inf" if math.isinf(cfg.train.sigma2) else repr(cfg.train.sigma2)
    lines.append(f"train.sigma2 = {sigma2}")
    lines.append(f"train.epsilon = {cfg.train.epsilon!r}")
    lines.append(f"train.max_iters = {cfg.train.max_iters}")
    lines.append(f"train.lbfgs_history = {cfg.train.lbfgs_history}")
    lines.append(f"exclude_prefix = {cfg.exclude_prefix}")
    if cfg.data_train:
        lines.append(f"data.train = {cfg.data_train}")
    if cfg.data_test:
        lines.append(f"data.test = {cfg.data_test}")
    if cfg.features.property_groups != _DEFAULT_PROPERTIES:
        for name, members in cfg.features.property_groups:
            lines.append(f"property.{name} = {members}")
    return "\n".join(lines) + "\n"


def feature_fingerprint(cfg: ExperimentConfig) -> str:
    """Hash over everything that affects feature extraction and decoding."""
    bounds = dict(cfg.features.bounds)
    parts = [f"topology={cfg.resolve_topology()}"]
    for name in GROUP_NAMES:
        if cfg.features.is_enabled(name):
            suffix = f":{bounds[name]}" if name in bounds else ""
            parts.append(f"{name}{suffix}")
    for name, members in cfg.features.property_groups:
        parts.append(f"prop:{name}={members}")
    blob = "\n".join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def with_train_overrides(
    cfg: ExperimentConfig,
    sigma2: float | None = None,
    epsilon: float | None = None,
    max_iters: int | None = None,
) -> ExperimentConfig:
    tc = cfg.train
    tc = replace(
        tc,
        sigma2=tc.sigma2 if sigma2 is None else sigma2,
        epsilon=tc.epsilon if epsilon is None else epsilon,
        max_iters=tc.max_iters if max_iters is None else max_iters,
    )
    return replace(cfg, train=tc)
