"""Genre and pattern data model, plus the bundled canonical catalog.

A pattern is a numbered list of stage name / stage description pairs tied to
a genre.  Six builtin patterns ship as package data (the five base genres
plus the hero's journey), together with the base genre profiles and a seed
list of 28 additional genre definitions usable as starting points for custom
patterns.  Everything in this module is immutable after load and safe for
concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Optional

from .errors import UnknownGenreError, ValidationFailure

FUNDAMENTAL_GENRES = ("comedy", "romance", "tragedy", "satire", "mystery")
PROVENANCES = ("builtin", "extracted", "imported")


@dataclass(frozen=True)
class Genre:
    """A genre token: one of the five base genres, or a custom name.

    Base genre names are case-normalized to lowercase; custom names are
    trimmed but otherwise kept as written (e.g. "Film-Noir").
    """

    name: str

    def __post_init__(self) -> None:
        cleaned = self.name.strip()
        if not cleaned:
            raise ValidationFailure("genre name must be non-empty")
        if cleaned.lower() in FUNDAMENTAL_GENRES:
            cleaned = cleaned.lower()
        object.__setattr__(self, "name", cleaned)

    @property
    def is_fundamental(self) -> bool:
        return self.name in FUNDAMENTAL_GENRES

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class GenreProfile:
    """Season/world/protagonist characterization plus the prose definition."""

    genre: Genre
    season: str
    world: str
    protagonist: str
    definition: str


@dataclass(frozen=True)
class Stage:
    """One numbered stage of a pattern."""

    index: int
    name: str
    description: str


@dataclass(frozen=True)
class GenrePattern:
    """An ordered list of stages belonging to one genre.

    provenance is "builtin" for bundled patterns, "extracted" for patterns
    produced by generalizing exemplar outlines, "imported" for user files.
    source_titles lists the exemplar narratives the pattern came from; it may
    be empty.
    """

    id: str
    genre: Genre
    title: str
    stages: tuple[Stage, ...]
    provenance: str
    source_titles: tuple[str, ...] = ()

    @property
    def is_builtin(self) -> bool:
        return self.provenance == "builtin"


def validate_pattern(pattern: GenrePattern) -> list[str]:
    """Check every structural invariant; return violations as "field: rule".

    An empty list means the pattern is valid.  Stage prose is only checked
    structurally (non-empty, no line breaks in names), never semantically.
    """
    violations: list[str] = []
    if not pattern.id.strip():
        violations.append("id: empty identifier")
    if not pattern.title.strip():
        violations.append("title: empty title")
    if pattern.provenance not in PROVENANCES:
        violations.append(
            f"provenance: unknown value {pattern.provenance!r}"
            f" (expected one of {', '.join(PROVENANCES)})"
        )
    if not pattern.stages:
        violations.append("stages: empty stage list")
    for pos, stage in enumerate(pattern.stages):
        where = f"stages[{pos}]"
        if stage.index != pos + 1:
            violations.append(
                f"{where}.index: index gap (expected {pos + 1}, found {stage.index})"
            )
        if not stage.name.strip():
            violations.append(f"{where}.name: empty name")
        if "\n" in stage.name or "\r" in stage.name:
            violations.append(f"{where}.name: line break in name")
        if not stage.description.strip():
            violations.append(f"{where}.description: empty description")
    return violations


def ensure_valid(pattern: GenrePattern) -> GenrePattern:
    """Raise ValidationFailure unless validate_pattern finds nothing."""
    violations = validate_pattern(pattern)
    if violations:
        raise ValidationFailure(
            "invalid pattern", details={"violations": violations}
        )
    return pattern


# --- serialization (the interchange format used by every other module) ---

def pattern_to_dict(pattern: GenrePattern) -> dict:
    return {
        "id": pattern.id,
        "genre": pattern.genre.name,
        "title": pattern.title,
        "provenance": pattern.provenance,
        "source_titles": list(pattern.source_titles),
        "stages": [
            {"index": s.index, "name": s.name, "description": s.description}
            for s in pattern.stages
        ],
    }


def pattern_from_dict(data: Mapping) -> GenrePattern:
    try:
        stages = tuple(
            Stage(
                index=int(raw["index"]),
                name=str(raw["name"]),
                description=str(raw["description"]),
            )
            # stage order in the file is index order
            for raw in sorted(data["stages"], key=lambda r: int(r["index"]))
        )
        pattern = GenrePattern(
            id=str(data["id"]),
            genre=Genre(str(data["genre"])),
            title=str(data["title"]),
            stages=stages,
            provenance=str(data["provenance"]),
            source_titles=tuple(str(t) for t in data.get("source_titles", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailure(f"malformed pattern document: {exc}") from exc
    return ensure_valid(pattern)


def _data_text(filename: str) -> str:
    return (resources.files("storyloom") / "data" / filename).read_text("utf-8")


@lru_cache(maxsize=None)
def _builtin_patterns() -> tuple[GenrePattern, ...]:
    raw = json.loads(_data_text("builtin_patterns.json"))
    return tuple(pattern_from_dict(entry) for entry in raw)


def builtin_patterns() -> list[GenrePattern]:
    """The six bundled patterns, in catalog order, identical on every call."""
    return list(_builtin_patterns())


def builtin_pattern(pattern_id: str) -> Optional[GenrePattern]:
    """Look up a builtin by id ("builtin-mystery") or genre alias ("mystery")."""
    token = pattern_id.strip().lower()
    for pattern in _builtin_patterns():
        if pattern.id == token:
            return pattern
    if token in FUNDAMENTAL_GENRES:
        return builtin_pattern(f"builtin-{token}")
    return None


@lru_cache(maxsize=None)
def _fundamental_profiles() -> Mapping[str, GenreProfile]:
    raw = json.loads(_data_text("genre_profiles.json"))
    return {
        entry["genre"]: GenreProfile(
            genre=Genre(entry["genre"]),
            season=entry["season"],
            world=entry["world"],
            protagonist=entry["protagonist"],
            definition=entry["definition"],
        )
        for entry in raw
    }


@lru_cache(maxsize=None)
def _seed_profiles() -> tuple[GenreProfile, ...]:
    raw = json.loads(_data_text("imdb_genres.json"))
    return tuple(
        GenreProfile(
            genre=Genre(entry["name"]),
            season="",
            world="",
            protagonist="",
            definition=entry["definition"],
        )
        for entry in raw
    )


def fundamental_profiles() -> list[GenreProfile]:
    """The five base genre profiles, in canonical order."""
    table = _fundamental_profiles()
    return [table[name] for name in FUNDAMENTAL_GENRES]


def imdb_seed_profiles() -> list[GenreProfile]:
    """28 seed genre definitions for user-created patterns.

    Seed profiles carry prose definitions only; season, world, and
    protagonist are empty.
    """
    return list(_seed_profiles())


def profile_of(genre: Genre) -> GenreProfile:
    """Profile for a base genre, or for a custom genre shipped as a seed.

    Raises unknown-genre for custom names with no bundled definition; callers
    holding profiles from elsewhere should consult those before this.
    """
    if genre.is_fundamental:
        return _fundamental_profiles()[genre.name]
    for profile in _seed_profiles():
        if profile.genre.name.lower() == genre.name.lower():
            return profile
    raise UnknownGenreError(
        f"no profile for genre {genre.name!r}",
        details={"genre": genre.name},
    )
