"""Editable config surfaces: per-language forcing strings and model profiles.

Both live in YAML files a user can swap out. The language-asset file hash is
threaded into every generation record so a run can always be traced back to
the exact translations it used.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigurationError

SUPPORTED_LANGUAGES = ("bn", "de", "en", "es", "fr", "ja", "ru", "sw", "te", "th", "zh")

HIGH_RESOURCE = ("de", "en", "es", "fr", "ja", "ru", "zh")
LOW_RESOURCE = ("bn", "sw", "te", "th")

# The untranslated originals. English asset entries must equal these.
ORIGINAL_WAIT = "Wait"
ORIGINAL_PREFIX = "Okay, let me try to figure this out."
ORIGINAL_SYSTEM = "You are a helpful assistant."

ASSET_FIELDS = (
    "wait_translation",
    "prefix_translation",
    "system_template",
    "language_name_native",
)


@dataclass(frozen=True)
class LanguageEntry:
    wait_translation: str
    prefix_translation: str
    system_template: str
    language_name_native: str


@dataclass(frozen=True)
class LanguageAssets:
    entries: dict[str, LanguageEntry]
    source_hash: str

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(self.entries))

    def entry(self, language: str) -> LanguageEntry:
        try:
            return self.entries[language]
        except KeyError:
            raise ConfigurationError(
                f"no language assets for {language!r}; have {self.languages}"
            ) from None


def _packaged(name: str) -> Path:
    return Path(str(resources.files("crossthink").joinpath("data", name)))


def _hash_entries(entries: dict[str, LanguageEntry]) -> str:
    canonical = json.dumps(
        {k: vars(v) for k, v in sorted(entries.items())},
        ensure_ascii=False,
        sort_keys=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_assets(entries: dict[str, LanguageEntry]) -> LanguageAssets:
    """Assemble assets in memory (tests, programmatic overrides)."""
    assets = LanguageAssets(entries=dict(entries), source_hash=_hash_entries(entries))
    validate_assets(assets)
    return assets


def load_language_assets(path: str | Path | None = None) -> LanguageAssets:
    """Load and validate the asset file (packaged default when path is None)."""
    file = Path(path) if path is not None else _packaged("language_assets.yaml")
    try:
        raw_bytes = file.read_bytes()
    except OSError as exc:
        raise ConfigurationError(f"cannot read language assets {file}: {exc}") from exc
    raw = yaml.safe_load(raw_bytes.decode("utf-8"))
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{file} must map language codes to asset entries")
    entries: dict[str, LanguageEntry] = {}
    for lang, fields in raw.items():
        if not isinstance(fields, dict):
            raise ConfigurationError(f"assets for {lang!r} must be a mapping")
        missing = [f for f in ASSET_FIELDS if not fields.get(f)]
        if missing:
            raise ConfigurationError(
                f"language {lang!r} missing asset fields: {', '.join(missing)}"
            )
        entries[lang] = LanguageEntry(**{f: fields[f] for f in ASSET_FIELDS})
    assets = LanguageAssets(
        entries=entries,
        source_hash=hashlib.sha256(raw_bytes).hexdigest(),
    )
    validate_assets(assets)
    return assets


def validate_assets(assets: LanguageAssets) -> None:
    missing = [l for l in SUPPORTED_LANGUAGES if l not in assets.entries]
    if missing:
        raise ConfigurationError(f"asset file lacks languages: {', '.join(missing)}")
    for lang, entry in assets.entries.items():
        for field in ASSET_FIELDS:
            if not getattr(entry, field):
                raise ConfigurationError(f"empty {field} for language {lang!r}")
    en = assets.entries["en"]
    if en.wait_translation != ORIGINAL_WAIT:
        raise ConfigurationError("English wait_translation must stay the original")
    if en.prefix_translation != ORIGINAL_PREFIX:
        raise ConfigurationError("English prefix_translation must stay the original")
    if not en.system_template.startswith(ORIGINAL_SYSTEM):
        raise ConfigurationError("English system_template must open with the original")


@dataclass(frozen=True)
class ModelProfile:
    name: str
    end_of_thinking_delimiter: str
    answer_trigger: str


DEFAULT_PROFILE = "s1"


def load_model_profiles(path: str | Path | None = None) -> dict[str, ModelProfile]:
    file = Path(path) if path is not None else _packaged("model_profiles.yaml")
    try:
        raw = yaml.safe_load(file.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read model profiles {file}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{file} must map profile names to settings")
    profiles: dict[str, ModelProfile] = {}
    for name, fields in raw.items():
        if not isinstance(fields, dict) or not fields.get("end_of_thinking_delimiter"):
            raise ConfigurationError(
                f"profile {name!r} needs end_of_thinking_delimiter"
            )
        profiles[name] = ModelProfile(
            name=name,
            end_of_thinking_delimiter=fields["end_of_thinking_delimiter"],
            answer_trigger=fields.get("answer_trigger", "Final Answer:"),
        )
    return profiles


def get_profile(name: str, path: str | Path | None = None) -> ModelProfile:
    profiles = load_model_profiles(path)
    if name not in profiles:
        raise ConfigurationError(
            f"unknown model profile {name!r}; have {sorted(profiles)}"
        )
    return profiles[name]
