"""Training-run configuration and its flat ``key=value`` text form."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from fairgen.model import EmbeddingConfig, FairLossWeights, GenTrainConfig, SamplerConfig
from fairgen.util.rng import derive_seed

NEGATIVE_MODES = ("unigram", "shuffled")

# Short names from the training-loop inputs
ALIASES = {
    "T": "walk_length",
    "K": "num_walks",
    "r": "mix_ratio",
    "N1": "n1",
    "T1": "t1",
    "lambda": "lambda0",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    """Malformed config text or an unknown key."""


@dataclass(frozen=True, slots=True)
class TrainRunConfig:
    # sampler
    walk_length: int = 10
    mix_ratio: float = 0.5
    p: float = 1.0
    q: float = 1.0
    num_walks: int = 500
    class_balanced: bool = False
    # generator
    dim: int = 100
    heads: int = 4
    ff_dim: int = 128
    mu: float = 0.1
    log_floor: float = -10.0
    epochs: int = 20
    gen_batch_size: int = 128
    lr: float = 0.01
    max_steps: int | None = None
    # skip-gram pretraining
    window: int = 5
    neg_samples: int = 5
    embed_epochs: int = 1
    walks_per_node: int = 10
    embed_lr: float = 0.025
    # fair learner
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    hidden: int = 64
    disc_lr: float = 0.01
    n1: int = 128
    t1: int = 3
    minibatch_parity: bool = False
    # self-paced schedule
    cycles: int = 10
    lambda0: float = 0.105
    growth: float = 1.5
    # ablations
    uniform_sampling: bool = False
    no_self_paced: bool = False
    no_parity: bool = False
    negative_mode: str = "unigram"
    # pools, generation and assembly
    max_pool_size: int | None = None
    generation_factor: float = 20.0
    assembly_tol: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("cycles", "n1", "heads", "hidden", "ff_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.t1 < 0:
            raise ConfigError(f"t1 must be >= 0, got {self.t1}")
        if self.negative_mode not in NEGATIVE_MODES:
            raise ConfigError(
                f"negative_mode must be one of {', '.join(NEGATIVE_MODES)}, got {self.negative_mode!r}"
            )
        if self.lambda0 <= 0 or self.growth <= 1:
            raise ConfigError(f"need lambda0 > 0 and growth > 1, got {self.lambda0}, {self.growth}")
        if self.dim % self.heads:
            raise ConfigError(f"dim {self.dim} must be divisible by heads {self.heads}")
        if self.max_pool_size is not None and self.max_pool_size < self.num_walks:
            raise ConfigError(
                f"max_pool_size ({self.max_pool_size}) must hold at least one batch ({self.num_walks})"
            )
        if self.generation_factor <= 0:
            raise ConfigError(f"generation_factor must be positive, got {self.generation_factor}")
        if not 0 <= self.assembly_tol < 1:
            raise ConfigError(f"assembly_tol must lie in [0, 1), got {self.assembly_tol}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        # Component configs carry their own checks.
        try:
            self.sampler(0)
            self.gen(0)
            _ = self.weights, self.embedding
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def sampler(self, cycle: int) -> SamplerConfig:
        """Sampler settings for *cycle*; ``uniform_sampling`` forces uniform starts."""
        return SamplerConfig(
            walk_length=self.walk_length,
            mix_ratio=1.0 if self.uniform_sampling else self.mix_ratio,
            p=self.p,
            q=self.q,
            num_walks=self.num_walks,
            seed=derive_seed(self.seed, "sampler", cycle),
            class_balanced=self.class_balanced,
        )

    def gen(self, cycle: int) -> GenTrainConfig:
        return GenTrainConfig(
            mu=self.mu,
            log_floor=self.log_floor,
            epochs=self.epochs,
            batch_size=self.gen_batch_size,
            lr=self.lr,
            seed=derive_seed(self.seed, "generator-train", cycle),
            max_steps=self.max_steps,
        )

    @property
    def weights(self) -> FairLossWeights:
        return FairLossWeights(
            alpha=self.alpha, beta=self.beta, gamma=0.0 if self.no_parity else self.gamma
        )

    @property
    def embedding(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            dim=self.dim,
            window=self.window,
            neg_samples=self.neg_samples,
            epochs=self.embed_epochs,
            walks_per_node=self.walks_per_node,
            lr=self.embed_lr,
        )

    def with_overrides(self, pairs: dict[str, str]) -> TrainRunConfig:
        return dataclasses.replace(self, **_convert_pairs(pairs))


def _field_types() -> dict[str, str]:
    return {f.name: f.type for f in fields(TrainRunConfig)}


def _convert(key: str, type_name: str, raw: str):
    value = raw.strip()
    try:
        if type_name == "bool":
            low = value.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if type_name == "int | None":
            return None if value.lower() in ("", "none") else int(value)
        if type_name == "int":
            return int(value)
        if type_name == "float":
            return float(value)
        return value
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def canonical_key(key: str) -> str:
    name = ALIASES.get(key, key)
    if name not in _field_types():
        raise ConfigError(f"unknown config key {key!r}")
    return name


def _convert_pairs(pairs: dict[str, str]) -> dict[str, object]:
    types = _field_types()
    out: dict[str, object] = {}
    for key, raw in pairs.items():
        name = canonical_key(key)
        out[name] = _convert(key, types[name], raw)
    return out


def parse_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    pairs: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{line_no}: expected key=value, got {raw.strip()!r}")
        try:
            canonical_key(key)
        except ConfigError as e:
            raise ConfigError(f"{source}:{line_no}: {e}") from None
        pairs[key] = value.strip()
    return pairs


def parse_set_args(items: list[str] | None) -> dict[str, str]:
    """Parse repeated ``--set key=value`` options."""
    pairs: dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"invalid --set {item!r}; expected key=value")
        canonical_key(key.strip())
        pairs[key.strip()] = value.strip()
    return pairs


def load_config(path: str | Path | None, overrides: dict[str, str] | None = None) -> TrainRunConfig:
    """Defaults, then the file at *path*, then *overrides*."""
    pairs: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        pairs.update(parse_pairs(p.read_text(encoding="utf-8"), str(p)))
    pairs.update(overrides or {})
    return TrainRunConfig().with_overrides(pairs)


def snapshot_pairs(cfg: TrainRunConfig) -> dict[str, str]:
    """Canonical string form of every field, sorted by key."""
    out: dict[str, str] = {}
    for f in sorted(fields(cfg), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            out[f.name] = "true" if value else "false"
        elif value is None:
            out[f.name] = "none"
        else:
            out[f.name] = repr(value) if isinstance(value, float) else str(value)
    return out


def snapshot_text(cfg: TrainRunConfig) -> str:
    return "".join(f"{k}={v}\n" for k, v in snapshot_pairs(cfg).items())
