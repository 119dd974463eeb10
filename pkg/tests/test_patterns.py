"""Pattern/genre data model and bundled catalog tests."""

import dataclasses
import json
import random
from importlib import resources

import pytest

from storyloom.errors import UnknownGenreError, ValidationFailure
from storyloom.patterns import (
    FUNDAMENTAL_GENRES,
    Genre,
    GenrePattern,
    Stage,
    builtin_pattern,
    builtin_patterns,
    imdb_seed_profiles,
    pattern_from_dict,
    pattern_to_dict,
    profile_of,
    validate_pattern,
)


def test_genre_case_normalization():
    assert Genre("Comedy").name == "comedy"
    assert Genre("  MYSTERY ").name == "mystery"
    assert Genre("Film-Noir").name == "Film-Noir"
    assert Genre("comedy").is_fundamental
    assert not Genre("Film-Noir").is_fundamental


def test_genre_rejects_blank_names():
    with pytest.raises(ValidationFailure):
        Genre("")
    with pytest.raises(ValidationFailure):
        Genre("   ")


def test_builtin_catalog_shape():
    patterns = builtin_patterns()
    assert len(patterns) == 6
    by_id = {p.id: p for p in patterns}
    assert len(by_id) == 6
    counts = {
        "builtin-comedy": 7,
        "builtin-romance": 10,
        "builtin-tragedy": 7,
        "builtin-satire": 8,
        "builtin-mystery": 9,
        "builtin-heros-journey": 12,
    }
    for pid, n in counts.items():
        assert len(by_id[pid].stages) == n, pid
    assert all(p.provenance == "builtin" for p in patterns)


def test_builtin_stage_spot_checks():
    mystery = builtin_pattern("builtin-mystery")
    assert mystery.stages[0].name == "Introduction of Characters and Setting"
    romance = builtin_pattern("builtin-romance")
    assert romance.stages[0].name == "The Call to Adventure"
    comedy = builtin_pattern("builtin-comedy")
    assert comedy.stages[6].name == "Denouement"
    tragedy = builtin_pattern("builtin-tragedy")
    assert tragedy.stages[-1].name == "The Final Act"


def test_builtin_typography_is_preserved():
    # canonical text keeps its curly apostrophe and em dash; nothing is ASCII-folded
    satire = builtin_pattern("builtin-satire")
    assert satire.stages[2].name == "Protagonist’s Awakening"
    journey = builtin_pattern("builtin-heros-journey")
    assert "journey—the inmost cave" in journey.stages[6].description


def test_builtin_source_titles():
    assert builtin_pattern("builtin-mystery").source_titles == (
        "Murder on the Orient Express",
        "The Da Vinci Code",
        "Sherlock Holmes",
    )
    assert builtin_pattern("builtin-heros-journey").source_titles == ()


def test_builtin_genre_alias_lookup():
    assert builtin_pattern("mystery").id == "builtin-mystery"
    assert builtin_pattern("  Comedy ").id == "builtin-comedy"
    assert builtin_pattern("noir") is None
    assert builtin_pattern("builtin-noir") is None


def test_builtins_are_valid_and_stable():
    first = builtin_patterns()
    second = builtin_patterns()
    assert first == second
    for pattern in first:
        assert validate_pattern(pattern) == []


def test_registry_matches_bundled_file():
    # file -> registry -> file must be the identity, field for field
    raw = json.loads(
        (resources.files("storyloom") / "data" / "builtin_patterns.json")
        .read_text("utf-8")
    )
    assert [pattern_to_dict(p) for p in builtin_patterns()] == raw


def test_profile_of_fundamentals():
    romance = profile_of(Genre("romance"))
    assert (romance.season, romance.world, romance.protagonist) == (
        "Summer", "challenging", "wins",
    )
    assert profile_of(Genre("satire")).world == "dystopian"
    assert profile_of(Genre("comedy")).season == "Spring"
    assert profile_of(Genre("tragedy")).protagonist == "succumbs"
    assert profile_of(Genre("mystery")).season == "Return"
    for name in FUNDAMENTAL_GENRES:
        assert profile_of(Genre(name)).definition


def test_profile_of_unknown_custom_genre():
    with pytest.raises(UnknownGenreError):
        profile_of(Genre("noir"))


def test_profile_of_seeded_custom_genre():
    profile = profile_of(Genre("film-noir"))
    assert profile.genre.name == "Film-Noir"
    assert "dark, brooding characters" in profile.definition


def test_imdb_seed_profiles():
    seeds = imdb_seed_profiles()
    assert len(seeds) == 28
    names = [s.genre.name for s in seeds]
    assert len(set(names)) == 28
    assert "Film-Noir" in names
    for seed in seeds:
        assert seed.definition
        assert (seed.season, seed.world, seed.protagonist) == ("", "", "")


def test_validate_pattern_reports_violations():
    base = builtin_pattern("builtin-comedy")
    assert validate_pattern(base) == []

    gapped = dataclasses.replace(
        base,
        stages=(base.stages[0], dataclasses.replace(base.stages[2], index=3)),
    )
    report = validate_pattern(gapped)
    assert len(report) == 1 and "index gap" in report[0]

    blank = dataclasses.replace(
        base,
        stages=base.stages[:1]
        + (dataclasses.replace(base.stages[1], description="  "),)
        + base.stages[2:],
    )
    report = validate_pattern(blank)
    assert len(report) == 1 and "empty description" in report[0]

    bad_prov = dataclasses.replace(base, provenance="homemade")
    assert any("provenance" in v for v in validate_pattern(bad_prov))

    multiline = dataclasses.replace(
        base,
        stages=(dataclasses.replace(base.stages[0], name="Set\nUp"),)
        + base.stages[1:],
    )
    assert any("line break" in v for v in validate_pattern(multiline))


def test_round_trip_is_identity():
    for pattern in builtin_patterns():
        assert pattern_from_dict(pattern_to_dict(pattern)) == pattern


def test_round_trip_rejects_what_validation_rejects():
    # mutate serialized builtins; deserialization must fail exactly when
    # validate_pattern would have complained
    rng = random.Random(20816)
    originals = [pattern_to_dict(p) for p in builtin_patterns()]
    breakers = [
        lambda d: d["stages"].pop(1),
        lambda d: d["stages"][0].__setitem__("name", ""),
        lambda d: d["stages"][-1].__setitem__("description", " "),
        lambda d: d.__setitem__("provenance", "unknown"),
        lambda d: d.__setitem__("title", ""),
        lambda d: d["stages"][1].__setitem__("index", 99),
    ]
    for _ in range(60):
        doc = json.loads(json.dumps(rng.choice(originals)))
        rng.choice(breakers)(doc)
        with pytest.raises(ValidationFailure):
            pattern_from_dict(doc)


def test_pattern_from_dict_rejects_malformed_documents():
    with pytest.raises(ValidationFailure):
        pattern_from_dict({"id": "x"})
    with pytest.raises(ValidationFailure):
        pattern_from_dict(
            {"id": "x", "genre": "comedy", "title": "t",
             "provenance": "imported", "stages": [{"index": "one"}]}
        )


def test_stages_reordered_by_index_on_load():
    doc = {
        "id": "p1",
        "genre": "comedy",
        "title": "Shuffled",
        "provenance": "imported",
        "source_titles": [],
        "stages": [
            {"index": 2, "name": "Second", "description": "b."},
            {"index": 1, "name": "First", "description": "a."},
        ],
    }
    pattern = pattern_from_dict(doc)
    assert [s.name for s in pattern.stages] == ["First", "Second"]
