"""Experiment configuration: dataclasses, JSON round-trip, overrides.

A config document is plain JSON mirroring :class:`ExperimentConfig`; the
manifest written by every run embeds the fully resolved form, so a run can
always be repeated from its manifest alone.  Dotted-path overrides
(``train.epochs=5``) and the sweep mechanism both edit the JSON form before
it is parsed back into dataclasses, so one code path validates everything.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field, replace

from ..errors import ConfigError
from ..data import TransformSpec
from ..learn import TrainConfig
from ..noise import Gaussian, NoiseConfig, Uniform

__all__ = [
    "VariantSpec",
    "MetaSettings",
    "ExperimentConfig",
    "config_to_dict",
    "config_from_dict",
    "load_config_file",
    "apply_overrides",
    "apply_scale",
    "expand_sweep",
]

_ORDERS = ("noise_first", "data_first")
CAPTURE_FLAGS = (
    "angles",
    "distance",
    "eff_rank",
    "gram",
    "trajectory",
    "meta",
    "clean_test",
)


@dataclass(frozen=True)
class VariantSpec:
    """One arm of an experiment: which backward rule the data phase uses,
    whether a noise phase runs, and in which order when both phases exist."""

    name: str
    rule: str = "FA"
    pretrain: bool = False
    order: str = "noise_first"

    def __post_init__(self) -> None:
        if not self.name or any(c in self.name for c in "/\\ "):
            raise ConfigError(f"variant name {self.name!r} must be path-safe")
        if self.rule not in ("FA", "BP"):
            raise ConfigError(f"variant rule must be FA or BP, got {self.rule!r}")
        if self.order not in _ORDERS:
            raise ConfigError(f"variant order must be one of {_ORDERS}")


@dataclass(frozen=True)
class MetaSettings:
    """Episodic-adaptation measurement settings, by dataset name."""

    tasks: tuple[str, ...] = ("mnist", "fashion-mnist", "kmnist")
    shots_per_class: int = 10
    inner_steps: int = 10
    inner_lr: float = 0.001
    query_per_class: int = 10

    def __post_init__(self) -> None:
        if not self.tasks:
            raise ConfigError("meta tasks must be nonempty")


@dataclass
class ExperimentConfig:
    """Everything a run needs, resolvable to JSON and back."""

    experiment_id: str
    dims: tuple[int, ...]
    variants: list[VariantSpec]
    trials: int = 1
    master_seed: int = 0
    pretrain: NoiseConfig | None = None
    train: TrainConfig | None = None
    dataset: str | None = None
    train_size: int | None = None
    test_size: int | None = None
    eval_transform: TransformSpec | None = None
    eval_dataset: str | None = None
    capture: tuple[str, ...] = ()
    meta: MetaSettings | None = None
    traj_layer: int = 0
    scale: float = 1.0
    output_dir: str = "out"
    data_dir: str | None = None
    threads: int = 1
    sweep: dict | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        self.dims = tuple(int(d) for d in self.dims)
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ConfigError(f"variant names must be unique, got {names}")
        for flag in self.capture:
            if flag not in CAPTURE_FLAGS:
                raise ConfigError(
                    f"unknown capture flag {flag!r}; valid: {CAPTURE_FLAGS}"
                )
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.scale <= 0:
            raise ConfigError(f"scale must be > 0, got {self.scale}")
        if "meta" in self.capture and self.meta is None:
            raise ConfigError("capture flag 'meta' requires meta settings")
        needs_data = self.train is not None or any(
            f in self.capture for f in ("gram", "clean_test")
        )
        if needs_data and self.dataset is None:
            raise ConfigError("this configuration needs a dataset name")
        if self.pretrain is None and not self.train:
            raise ConfigError("experiment has neither a pretrain nor a train phase")
        if any(v.pretrain for v in self.variants) and self.pretrain is None:
            raise ConfigError("a variant requests pretraining but no noise settings given")


def _dist_to_dict(d) -> dict:
    if isinstance(d, Gaussian):
        return {"kind": "gaussian", "mean": d.mean, "std": d.std}
    if isinstance(d, Uniform):
        return {"kind": "uniform", "low": d.low, "high": d.high}
    raise ConfigError(f"unknown distribution {d!r}")


def _dist_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "gaussian":
        return Gaussian(mean=d.get("mean", 0.0), std=d.get("std", 1.0))
    if kind == "uniform":
        return Uniform(low=d.get("low", -1.0), high=d.get("high", 1.0))
    raise ConfigError(f"unknown distribution kind {kind!r}")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-compatible form of a config (tuples to lists, tagged dists)."""
    out = asdict(cfg)
    out["dims"] = list(cfg.dims)
    out["capture"] = list(cfg.capture)
    out["variants"] = [asdict(v) for v in cfg.variants]
    if cfg.pretrain is not None:
        out["pretrain"]["distribution"] = _dist_to_dict(cfg.pretrain.distribution)
    if cfg.eval_transform is not None:
        t = cfg.eval_transform
        out["eval_transform"] = {
            "translate_frac": list(t.translate_frac),
            "scale": list(t.scale),
            "rotate_deg": list(t.rotate_deg),
            "seed": t.seed,
        }
    if cfg.meta is not None:
        out["meta"]["tasks"] = list(cfg.meta.tasks)
    return out


def config_from_dict(d: dict) -> ExperimentConfig:
    """Parse the JSON form back into validated dataclasses."""
    if not isinstance(d, dict):
        raise ConfigError(f"config must be a JSON object, got {type(d).__name__}")
    d = dict(d)
    try:
        variants = [VariantSpec(**v) for v in d.pop("variants", [])]
        pretrain = d.pop("pretrain", None)
        if pretrain is not None:
            pretrain = dict(pretrain)
            if "distribution" in pretrain:
                pretrain["distribution"] = _dist_from_dict(pretrain["distribution"])
            pretrain = NoiseConfig(**pretrain)
        train = d.pop("train", None)
        if train is not None:
            train = TrainConfig(**train)
        transform = d.pop("eval_transform", None)
        if transform is not None:
            transform = TransformSpec(
                translate_frac=tuple(transform.get("translate_frac", (0.0, 0.0))),
                scale=tuple(transform.get("scale", (1.0, 1.0))),
                rotate_deg=tuple(transform.get("rotate_deg", (0.0, 0.0))),
                seed=transform.get("seed", 0),
            )
        meta = d.pop("meta", None)
        if meta is not None:
            meta = dict(meta)
            meta["tasks"] = tuple(meta.get("tasks", ()))
            meta = MetaSettings(**meta)
        capture = tuple(d.pop("capture", ()))
        return ExperimentConfig(
            variants=variants,
            pretrain=pretrain,
            train=train,
            eval_transform=transform,
            meta=meta,
            capture=capture,
            **d,
        )
    except TypeError as e:
        raise ConfigError(f"bad config structure: {e}") from e


def load_config_file(path) -> dict:
    """Read a JSON config document (the dict form, pre-validation)."""
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e


def _parse_override_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, assignments: list[str]) -> dict:
    """Apply ``key=value`` assignments with dotted paths to the dict form.

    Values parse as JSON when possible, otherwise stay strings.  The path
    must lead through existing (or null) mappings; a null section is
    created as an empty object so optional sections can be filled in.
    """
    out = json.loads(json.dumps(doc))
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, _, raw = item.partition("=")
        keys = path.split(".")
        node = out
        for k in keys[:-1]:
            if node.get(k) is None:
                node[k] = {}
            node = node[k]
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path!r} crosses non-object {k!r}")
        node[keys[-1]] = _parse_override_value(raw)
    return out


def apply_scale(cfg: ExperimentConfig, scale: float) -> ExperimentConfig:
    """Divide the run durations by ``scale`` for desk-scale execution.

    Shrinks pretraining total samples and training epochs (never below one
    batch or one epoch); everything else, including trial counts, stays at
    the preset's values.  The factor itself is recorded on the config and
    ends up in the manifest, so scaled runs are never mistaken for
    full-duration ones.
    """
    if scale <= 0:
        raise ConfigError(f"scale must be > 0, got {scale}")
    cfg = replace(cfg, scale=scale)
    if scale == 1.0:
        return cfg
    if cfg.pretrain is not None:
        total = max(1, round(cfg.pretrain.total_samples / scale))
        cfg.pretrain = replace(cfg.pretrain, total_samples=total)
    if cfg.train is not None:
        epochs = max(1, round(cfg.train.epochs / scale))
        cfg.train = replace(cfg.train, epochs=epochs)
    return cfg


def _point_name(key: str, value) -> str:
    if isinstance(value, list):
        text = "x".join(str(v) for v in value)
    else:
        text = str(value)
    safe = "".join(c if c.isalnum() or c in "._-" else "-" for c in text)
    return f"{key.split('.')[-1]}={safe}"


def expand_sweep(doc: dict) -> list[tuple[str, dict]]:
    """Expand the ``sweep`` section into named cartesian points.

    Each point is ``(name, config dict)`` with the swept keys applied as
    overrides, the sweep section cleared, and the point name appended to
    the output directory.
    """
    sweep = doc.get("sweep")
    if not sweep:
        raise ConfigError("config has no sweep section")
    keys = sorted(sweep)
    for k in keys:
        if not isinstance(sweep[k], list) or not sweep[k]:
            raise ConfigError(f"sweep key {k!r} must map to a nonempty list")
    points = []
    for combo in itertools.product(*(sweep[k] for k in keys)):
        assignments = [f"{k}={json.dumps(v)}" for k, v in zip(keys, combo)]
        point = apply_overrides(doc, assignments)
        point["sweep"] = None
        name = "_".join(_point_name(k, v) for k, v in zip(keys, combo))
        point["output_dir"] = str(point.get("output_dir", "out")) + "/" + name
        points.append((name, point))
    return points
