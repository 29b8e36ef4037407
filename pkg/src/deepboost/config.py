"""Run configuration: dataclasses plus TOML loading and echoing.

A config file has [dataset], [split], [gabor], [model], and [composition]
sections; every hyperparameter carries the paper-scale default. The
desk-scale preset (stride 4, rounds 100/80/50) makes CI-sized runs cheap.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .compose import CompositionConfig
from .imageio import SplitSpec


class ConfigError(Exception):
    """Invalid or incomplete run configuration."""


@dataclasses.dataclass
class TrainConfig:
    """Everything needed to reproduce one training run, minus the data."""

    support: int = 17
    sigma: float = 5.0
    wavelength: float = 8.0
    orientations: int = 8
    stride: int = 1
    rounds: tuple[int, ...] = (1000, 800, 500)
    quantile_count: int = 16
    composition: CompositionConfig = dataclasses.field(default_factory=CompositionConfig)
    seed: int = 0

    @property
    def layer_count(self) -> int:
        return len(self.rounds)

    def __post_init__(self):
        if not self.rounds:
            raise ConfigError("need at least one layer of boosting rounds")
        if any(m < 1 for m in self.rounds):
            raise ConfigError("every layer's round count must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.quantile_count < 1:
            raise ConfigError("quantile_count must be >= 1")


@dataclasses.dataclass
class RunConfig:
    dataset_root: Path
    output_dir: Path
    split: SplitSpec
    train: TrainConfig
    threads: int = 1


DESK_SCALE_STRIDE = 4
DESK_SCALE_ROUNDS = (100, 80, 50)


def apply_desk_scale(cfg: RunConfig) -> RunConfig:
    """Shrink a config for fast runs: stride 4 and 100/80/50 rounds,
    truncated to the configured layer count."""
    t = cfg.train
    layers = min(t.layer_count, len(DESK_SCALE_ROUNDS))
    new_train = dataclasses.replace(
        t, stride=DESK_SCALE_STRIDE, rounds=DESK_SCALE_ROUNDS[:layers]
    )
    return dataclasses.replace(cfg, train=new_train)


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(sec)


def _take(sec: dict, key: str, typ, default):
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    val = sec.pop(key)
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"key {key!r} has wrong type, expected {typ.__name__}")
    return val


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    ds = _section(data, "dataset")
    root = Path(_take(ds, "root", str, None))
    out = Path(_take(ds, "output_dir", str, "out"))

    sp = _section(data, "split")
    split = SplitSpec(
        train_per_class=_take(sp, "train_per_class", int, 60),
        seed=_take(sp, "seed", int, 0),
        repeats=_take(sp, "repeats", int, 1),
    )

    gb = _section(data, "gabor")
    md = _section(data, "model")
    comp = _section(data, "composition")
    rounds = _take(md, "rounds", list, [1000, 800, 500])
    if not all(isinstance(m, int) for m in rounds):
        raise ConfigError("model.rounds must be a list of integers")
    try:
        train = TrainConfig(
            support=_take(gb, "support", int, 17),
            sigma=_take(gb, "sigma", float, 5.0),
            wavelength=_take(gb, "wavelength", float, 8.0),
            orientations=_take(gb, "orientations", int, 8),
            stride=_take(gb, "stride", int, 1),
            rounds=tuple(rounds),
            quantile_count=_take(md, "quantile_count", int, 16),
            seed=_take(md, "seed", int, 0),
            composition=CompositionConfig(
                cell_size=_take(comp, "cell_size", int, 12),
                neighborhood=_take(comp, "neighborhood", int, 1),
                max_composites=_take(comp, "max_composites", int, 8000),
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    for name, sec in (("dataset", ds), ("split", sp), ("gabor", gb),
                      ("model", md), ("composition", comp)):
        if sec:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(sec)}")
    return RunConfig(dataset_root=root, output_dir=out, split=split, train=train)


def config_echo_toml(cfg: RunConfig) -> str:
    """Render a config back as TOML (written next to training outputs)."""
    t, c = cfg.train, cfg.train.composition
    rounds = ", ".join(str(m) for m in t.rounds)
    return (
        "[dataset]\n"
        f'root = "{cfg.dataset_root.as_posix()}"\n'
        f'output_dir = "{cfg.output_dir.as_posix()}"\n'
        "\n[split]\n"
        f"train_per_class = {cfg.split.train_per_class}\n"
        f"seed = {cfg.split.seed}\n"
        f"repeats = {cfg.split.repeats}\n"
        "\n[gabor]\n"
        f"support = {t.support}\n"
        f"sigma = {t.sigma}\n"
        f"wavelength = {t.wavelength}\n"
        f"orientations = {t.orientations}\n"
        f"stride = {t.stride}\n"
        "\n[model]\n"
        f"rounds = [{rounds}]\n"
        f"quantile_count = {t.quantile_count}\n"
        f"seed = {t.seed}\n"
        "\n[composition]\n"
        f"cell_size = {c.cell_size}\n"
        f"neighborhood = {c.neighborhood}\n"
        f"max_composites = {c.max_composites}\n"
    )
