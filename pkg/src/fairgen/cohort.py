"""Attribute vocabulary, prompt rendering, and balanced manifest construction.

The grid is the Cartesian product of the attribute vocabularies in the
fixed order (sex, age_band, skin_type, size, diagnosis). Per-row seeds
come from seed_mix so any subset of the cohort regenerates identically.
"""

import hashlib
import itertools
from dataclasses import dataclass, field

from .errors import ConfigError, SizeError, VocabularyError

MANIFEST_MAGIC = "FAIRGEN-MANIFEST"
MANIFEST_VERSION = 1
ROW_CAP = 10_000_000

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# prompt field order follows the label listing: sex, age, size, skin type, diagnosis
_PROMPT_FIELDS = ("sex", "age", "size", "skin_type", "diagnosis")


def seed_mix(master, index):
    """SplitMix64-style avalanche of (master XOR golden-ratio stream)."""
    z = (int(master) ^ ((int(index) + 1) * _GOLDEN)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class AttributeVocabulary:
    sexes: tuple = ("male", "female")
    age_bands: tuple = ("10", "20", "30", "40", "50", "60", "70", "80")
    skin_types: tuple = ("I", "II", "III", "IV", "V", "VI", "unknown")
    sizes: tuple = ("unknown",)
    diagnoses: tuple = ("melanoma",)

    def __post_init__(self):
        for name, values in self.fields().items():
            if not values:
                raise ConfigError(f"vocabulary field {name!r} is empty")
            if len(set(values)) != len(values):
                raise ConfigError(f"vocabulary field {name!r} has duplicates")

    def fields(self):
        """Attribute name -> value tuple, in grid order."""
        return {
            "sex": tuple(self.sexes),
            "age": tuple(self.age_bands),
            "skin_type": tuple(self.skin_types),
            "size": tuple(self.sizes),
            "diagnosis": tuple(self.diagnoses),
        }

    def cardinalities(self):
        return tuple(len(v) for v in self.fields().values())

    def grid_size(self):
        n = 1
        for c in self.cardinalities():
            n *= c
        return n

    def vocab_hash(self):
        canon = "|".join(
            f"{name}:" + ",".join(values) for name, values in self.fields().items()
        )
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class AttributeProfile:
    """Indices into the vocabulary lists, one per attribute."""

    sex: int
    age_band: int
    skin_type: int
    size: int = 0
    diagnosis: int = 0

    def indices(self):
        return (self.sex, self.age_band, self.skin_type, self.size, self.diagnosis)

    def validate(self, vocab):
        for idx, (name, values) in zip(self.indices(), vocab.fields().items()):
            if not 0 <= idx < len(values):
                raise VocabularyError(
                    f"index {idx} out of range for attribute {name!r} "
                    f"({len(values)} values)"
                )

    def surface(self, vocab):
        """Attribute name -> surface string for this profile."""
        self.validate(vocab)
        fields = vocab.fields()
        return {
            name: values[idx]
            for idx, (name, values) in zip(self.indices(), fields.items())
        }


def build_grid(vocab):
    """All profiles in lexicographic (sex, age, skin, size, diagnosis) order."""
    ranges = [range(c) for c in vocab.cardinalities()]
    return [AttributeProfile(*combo) for combo in itertools.product(*ranges)]


def render_prompt(profile, vocab):
    surf = profile.surface(vocab)
    return "; ".join(f"{name}={surf[name]}" for name in _PROMPT_FIELDS)


def parse_prompt(text, vocab):
    parts = text.split("; ")
    if len(parts) != len(_PROMPT_FIELDS):
        raise VocabularyError(f"prompt has {len(parts)} fields, expected 5: {text!r}")
    fields = vocab.fields()
    by_name = {}
    for part, expected in zip(parts, _PROMPT_FIELDS):
        key, sep, value = part.partition("=")
        if not sep or key != expected:
            raise VocabularyError(f"bad prompt field {part!r}, expected {expected}=...")
        values = fields[key]
        if value not in values:
            raise VocabularyError(f"unknown {key} value {value!r}")
        by_name[key] = values.index(value)
    return AttributeProfile(
        sex=by_name["sex"],
        age_band=by_name["age"],
        skin_type=by_name["skin_type"],
        size=by_name["size"],
        diagnosis=by_name["diagnosis"],
    )


@dataclass(frozen=True)
class CohortSpec:
    vocabulary: AttributeVocabulary = field(default_factory=AttributeVocabulary)
    n_per_cell: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if self.n_per_cell < 1:
            raise ConfigError("n_per_cell must be >= 1")

    def total_rows(self):
        return self.vocabulary.grid_size() * self.n_per_cell

    def id_width(self):
        return max(5, len(str(self.total_rows() - 1)))


@dataclass(frozen=True)
class ManifestRow:
    sample_id: str
    profile: AttributeProfile
    prompt: str
    derived_seed: int


@dataclass
class Manifest:
    spec: CohortSpec
    rows: list
    format_version: int = MANIFEST_VERSION

    def __len__(self):
        return len(self.rows)


def build_manifest(spec):
    total = spec.total_rows()
    if total > ROW_CAP:
        raise SizeError(f"cohort of {total} rows exceeds cap {ROW_CAP}")
    vocab = spec.vocabulary
    width = spec.id_width()
    rows = []
    index = 0
    for profile in build_grid(vocab):
        prompt = render_prompt(profile, vocab)
        for _ in range(spec.n_per_cell):
            rows.append(
                ManifestRow(
                    sample_id=f"{index:0{width}d}",
                    profile=profile,
                    prompt=prompt,
                    derived_seed=seed_mix(spec.master_seed, index),
                )
            )
            index += 1
    return Manifest(spec=spec, rows=rows)


def validate_manifest(manifest):
    """Returns violation strings; empty list means all invariants hold."""
    violations = []
    spec = manifest.spec
    vocab = spec.vocabulary
    expected_total = spec.total_rows()
    if len(manifest.rows) != expected_total:
        violations.append(
            f"row count {len(manifest.rows)} != expected {expected_total}"
        )
    seen = set()
    for row in manifest.rows:
        if row.sample_id in seen:
            violations.append(f"duplicate id {row.sample_id}")
        seen.add(row.sample_id)
    width = spec.id_width()
    grid = build_grid(vocab)
    for i, row in enumerate(manifest.rows):
        expected_id = f"{i:0{width}d}"
        if row.sample_id != expected_id:
            violations.append(
                f"row {i}: sample_id {row.sample_id} != contiguous id {expected_id}"
            )
        expected_seed = seed_mix(spec.master_seed, i)
        if row.derived_seed != expected_seed:
            violations.append(f"row {i}: seed mismatch (id {row.sample_id})")
        if i < len(grid) * spec.n_per_cell:
            expected_profile = grid[i // spec.n_per_cell]
            if row.profile != expected_profile:
                violations.append(f"row {i}: profile out of grid order")
        try:
            if row.prompt != render_prompt(row.profile, vocab):
                violations.append(f"row {i}: prompt does not match profile")
        except VocabularyError as exc:
            violations.append(f"row {i}: {exc}")
    return violations


def _vocab_header_fields(vocab):
    return [
        "sexes=" + ",".join(vocab.sexes),
        "age_bands=" + ",".join(vocab.age_bands),
        "skin_types=" + ",".join(vocab.skin_types),
        "sizes=" + ",".join(vocab.sizes),
        "diagnoses=" + ",".join(vocab.diagnoses),
    ]


def write_manifest(manifest, path):
    spec = manifest.spec
    vocab = spec.vocabulary
    header = "\t".join(
        [
            f"{MANIFEST_MAGIC} {manifest.format_version}",
            f"vocab_hash={vocab.vocab_hash()}",
            f"n_per_cell={spec.n_per_cell}",
            f"master_seed={spec.master_seed}",
        ]
        + _vocab_header_fields(vocab)
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in manifest.rows:
            surf = row.profile.surface(vocab)
            fh.write(
                "\t".join(
                    [
                        row.sample_id,
                        surf["sex"],
                        surf["age"],
                        surf["skin_type"],
                        surf["size"],
                        surf["diagnosis"],
                        row.prompt,
                        str(row.derived_seed),
                    ]
                )
                + "\n"
            )


def read_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty manifest")
    head = dict(
        part.split("=", 1) for part in lines[0].split("\t")[1:] if "=" in part
    )
    magic = lines[0].split("\t")[0]
    if not magic.startswith(MANIFEST_MAGIC):
        raise ConfigError(f"{path}: bad manifest magic {magic!r}")
    vocab = AttributeVocabulary(
        sexes=tuple(head["sexes"].split(",")),
        age_bands=tuple(head["age_bands"].split(",")),
        skin_types=tuple(head["skin_types"].split(",")),
        sizes=tuple(head["sizes"].split(",")),
        diagnoses=tuple(head["diagnoses"].split(",")),
    )
    if vocab.vocab_hash() != head["vocab_hash"]:
        raise ConfigError(f"{path}: vocab hash mismatch")
    spec = CohortSpec(
        vocabulary=vocab,
        n_per_cell=int(head["n_per_cell"]),
        master_seed=int(head["master_seed"]),
    )
    fields = vocab.fields()
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split("\t")
        if len(cols) != 8:
            raise ConfigError(f"{path}:{lineno}: expected 8 columns, got {len(cols)}")
        sid, sex, age, skin, size, diag, prompt, seed = cols
        profile = AttributeProfile(
            sex=fields["sex"].index(sex),
            age_band=fields["age"].index(age),
            skin_type=fields["skin_type"].index(skin),
            size=fields["size"].index(size),
            diagnosis=fields["diagnosis"].index(diag),
        )
        rows.append(ManifestRow(sid, profile, prompt, int(seed)))
    return Manifest(spec=spec, rows=rows)
