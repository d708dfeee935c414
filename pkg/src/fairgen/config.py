"""Flat key=value audit configuration.

The config file is line oriented: blank lines and '#' comments are
ignored, every other line is section.key=value (e.g. sampler.steps=250).
A named preset supplies the baseline; file keys override it. One master
seed governs all derived randomness.
"""

import shlex
from dataclasses import dataclass, field

from .adapters import ExternalClassifier, planted_oracle
from .cohort import AttributeVocabulary, CohortSpec
from .errors import ConfigError
from .flowgen.sampler import SamplerConfig
from .flowgen.training import TrainConfig
from .lesionworld import WorldParams

PRESETS = {
    # desk profile: CPU-minutes scale
    "desk": {"cohort.n_per_cell": "20", "train.train_steps": "20000"},
    # paper profile: the published settings (100/cell, 250 steps, w=10)
    "paper": {"cohort.n_per_cell": "100", "train.train_steps": "80000"},
}


@dataclass
class ClassifierSpec:
    name: str
    kind: str  # oracle | external
    attribute: str = ""
    accuracies: dict = field(default_factory=dict)
    uniform_accuracy: float = None
    seed: int = 0
    command: tuple = ()
    workdir: str = None
    timeout: float = 120.0

    def build(self, vocab):
        if self.kind == "oracle":
            if self.uniform_accuracy is not None:
                table = {v: self.uniform_accuracy for v in vocab.fields()[self.attribute]}
            else:
                table = self.accuracies
            return planted_oracle(self.attribute, table, self.seed, vocab)
        if self.kind == "external":
            return ExternalClassifier(
                command=self.command, workdir=self.workdir, timeout=self.timeout
            )
        raise ConfigError(f"classifier {self.name!r}: unknown kind {self.kind!r}")


@dataclass
class AuditConfig:
    master_seed: int = 42
    vocabulary: AttributeVocabulary = field(default_factory=AttributeVocabulary)
    world: WorldParams = field(default_factory=WorldParams)
    n_per_cell: int = 100
    hidden_dims: tuple = (64, 64)
    train: TrainConfig = field(default_factory=TrainConfig)
    world_n_per_cell: int = 20
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    classifiers: list = field(default_factory=list)
    out_dir: str = "out"

    def cohort_spec(self):
        return CohortSpec(
            vocabulary=self.vocabulary,
            n_per_cell=self.n_per_cell,
            master_seed=self.master_seed,
        )

    def echo_lines(self):
        """Canonical config echo embedded in artifacts."""
        lines = [
            f"master_seed={self.master_seed}",
            f"vocab_hash={self.vocabulary.vocab_hash()}",
            f"cohort.n_per_cell={self.n_per_cell}",
            f"model.hidden_dims={','.join(map(str, self.hidden_dims))}",
            f"train.train_steps={self.train.train_steps}",
            f"train.batch_size={self.train.batch_size}",
            f"sampler.steps={self.sampler.steps}",
            f"sampler.guidance_scale={self.sampler.guidance_scale}",
        ]
        return lines


def _parse_kv(text, origin):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def _pop_typed(pairs, key, cast, default):
    if key not in pairs:
        return default
    raw = pairs.pop(key)
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}")


def _csv_tuple(raw):
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def _int_tuple(raw):
    return tuple(int(s) for s in _csv_tuple(raw))


def parse_config(text, origin="<config>", preset=None):
    pairs = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        pairs.update(PRESETS[preset])
    pairs.update(_parse_kv(text, origin))

    vocab_kwargs = {}
    for cfg_key, attr in [
        ("cohort.sexes", "sexes"),
        ("cohort.age_bands", "age_bands"),
        ("cohort.skin_types", "skin_types"),
        ("cohort.sizes", "sizes"),
        ("cohort.diagnoses", "diagnoses"),
    ]:
        if cfg_key in pairs:
            vocab_kwargs[attr] = _csv_tuple(pairs.pop(cfg_key))
    vocab = AttributeVocabulary(**vocab_kwargs)

    world = WorldParams(
        image_side=_pop_typed(pairs, "world.image_side", int, 16),
        background_base=_pop_typed(pairs, "world.background_base", float, 0.15),
        skin_step=_pop_typed(pairs, "world.skin_step", float, 0.08),
        radius_base=_pop_typed(pairs, "world.radius_base", float, 2.0),
        age_step=_pop_typed(pairs, "world.age_step", float, 0.6),
        pixel_noise_sigma=_pop_typed(pairs, "world.pixel_noise_sigma", float, 0.05),
    )
    master_seed = _pop_typed(pairs, "master_seed", int, 42)
    config = AuditConfig(
        master_seed=master_seed,
        vocabulary=vocab,
        world=world,
        n_per_cell=_pop_typed(pairs, "cohort.n_per_cell", int, 100),
        hidden_dims=_pop_typed(pairs, "model.hidden_dims", _int_tuple, (64, 64)),
        train=TrainConfig(
            train_steps=_pop_typed(pairs, "train.train_steps", int, 20_000),
            batch_size=_pop_typed(pairs, "train.batch_size", int, 128),
            learning_rate=_pop_typed(pairs, "train.learning_rate", float, 0.0002),
            condition_dropout_probability=_pop_typed(
                pairs, "train.condition_dropout_probability", float, 0.1
            ),
            weight_decay=_pop_typed(pairs, "train.weight_decay", float, 0.0),
            seed=master_seed,
        ),
        world_n_per_cell=_pop_typed(pairs, "train.world_n_per_cell", int, 20),
        sampler=SamplerConfig(
            steps=_pop_typed(pairs, "sampler.steps", int, 250),
            guidance_scale=_pop_typed(pairs, "sampler.guidance_scale", float, 10.0),
            seed=master_seed,
        ),
        out_dir=pairs.pop("out_dir", "out"),
    )

    names = sorted(
        {key.split(".")[1] for key in pairs if key.startswith("classifier.")}
    )
    for name in names:
        prefix = f"classifier.{name}."
        sub = {k[len(prefix):]: pairs.pop(k) for k in list(pairs) if k.startswith(prefix)}
        kind = sub.pop("kind", None)
        if kind is None:
            raise ConfigError(f"classifier {name!r}: missing kind")
        spec = ClassifierSpec(name=name, kind=kind, seed=master_seed)
        if kind == "oracle":
            spec.attribute = sub.pop("attribute", "")
            if not spec.attribute:
                raise ConfigError(f"classifier {name!r}: oracle needs an attribute")
            if "accuracy" in sub:
                spec.uniform_accuracy = float(sub.pop("accuracy"))
            elif "accuracies" in sub:
                values = vocab.fields().get(spec.attribute, ())
                accs = [float(a) for a in _csv_tuple(sub.pop("accuracies"))]
                if len(accs) != len(values):
                    raise ConfigError(
                        f"classifier {name!r}: {len(accs)} accuracies for "
                        f"{len(values)} {spec.attribute} values"
                    )
                spec.accuracies = dict(zip(values, accs))
            else:
                raise ConfigError(
                    f"classifier {name!r}: oracle needs accuracy or accuracies"
                )
            if "seed" in sub:
                spec.seed = int(sub.pop("seed"))
        elif kind == "external":
            command = sub.pop("command", "")
            if not command:
                raise ConfigError(f"classifier {name!r}: external needs a command")
            spec.command = tuple(shlex.split(command))
            spec.workdir = sub.pop("workdir", None)
            spec.timeout = float(sub.pop("timeout", "120"))
        else:
            raise ConfigError(f"classifier {name!r}: unknown kind {kind!r}")
        if sub:
            raise ConfigError(f"classifier {name!r}: unknown keys {sorted(sub)}")
        config.classifiers.append(spec)

    if pairs:
        raise ConfigError(f"{origin}: unknown keys {sorted(pairs)}")
    world.validate(vocab)
    return config


def load_config(path, preset=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text, origin=str(path), preset=preset)
