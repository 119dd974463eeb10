"""Exemplar retrieval, response parsing, and pattern extraction.

This is the acquisition side of the pipeline: ask the model for genre
exemplars, parse the semi-structured answer, outline each exemplar as
stages, and distill a genre pattern from the outlines.  Every parse has
exactly one corrective retry; after that, failures are hard.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import (
    EmptyInputError,
    ParseFailure,
    ValidationFailure,
)
from .gateway import (
    ChatMessage,
    ChatTranscript,
    Gateway,
    TEMP_STRUCTURED,
    fingerprint,
    render,
)
from .outlines import OutlineStage, PatternSkeleton, StoryOutline, generalize
from .patterns import Genre, GenrePattern, GenreProfile, Stage, ensure_valid
from .prompts import (
    CORRECTIVE_RETRY,
    EXEMPLAR_FORMAT_HINT,
    FEATURE_TERMS,
    MODEL_EXEMPLARS,
    MODEL_PATTERNS,
    MOVE_TERMS,
    OUTLINE_MAX_STAGES,
    OUTLINE_MIN_STAGES,
    OUTLINE_STORY,
    PATTERN_DIRECT,
    ROLE_TERMS,
    SETTING_TERMS,
    STAGE_LINE_FORMAT_HINT,
    STAGE_REWRITE,
    build_exemplar_prompt,
    display_genre,
)
from .terms import parse_term
from .textutil import sentence_count, word_count

EXEMPLARS_PER_GENRE = 3
REWRITE_LABEL_MAX_WORDS = 6


@dataclass(frozen=True)
class Exemplar:
    """One chosen narrative and the model's reason for choosing it."""

    genre: Genre
    title: str
    year_text: str
    justification: str

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValidationFailure("exemplar title must be non-empty")
        if not self.year_text.strip():
            raise ValidationFailure("exemplar year text must be non-empty")
        if not self.justification.strip():
            raise ValidationFailure("exemplar justification must be non-empty")


@dataclass(frozen=True)
class ExemplarSet:
    exemplars: tuple[Exemplar, ...]
    prompt_fingerprint: str

    def __post_init__(self) -> None:
        problems = exemplar_violations(self.exemplars)
        if problems:
            raise ValidationFailure(
                "invalid exemplar set", details={"violations": problems}
            )

    def by_genre(self, genre: Genre) -> list[Exemplar]:
        return [e for e in self.exemplars if e.genre == genre]

    def genres(self) -> list[Genre]:
        seen = []
        for e in self.exemplars:
            if e.genre not in seen:
                seen.append(e.genre)
        return seen


def exemplar_violations(exemplars: tuple[Exemplar, ...]) -> list[str]:
    """Invariant check: three per represented genre, no duplicate titles."""
    problems = []
    if not exemplars:
        problems.append("no exemplars")
    per_genre: dict[str, list[str]] = {}
    for e in exemplars:
        per_genre.setdefault(e.genre.name, []).append(e.title)
    for name, titles in per_genre.items():
        if len(titles) != EXEMPLARS_PER_GENRE:
            problems.append(
                f"genre {name!r} has {len(titles)} exemplars,"
                f" expected {EXEMPLARS_PER_GENRE}"
            )
        lowered = [t.lower() for t in titles]
        if len(set(lowered)) != len(lowered):
            problems.append(f"genre {name!r} repeats a title")
    return problems


# --- response parsing ---

_HEADER = re.compile(
    r"^\s*(?:\d+\s*[.)]\s*)?\*{0,2}([A-Za-z][A-Za-z' -]*?)\*{0,2}\s*:\s*\*{0,2}\s*$"
)
_BULLET = re.compile(r"^\s*[-*•–—]\s+(.*)$")
_TITLE = re.compile(
    r"^(?:``(?P<latex>.+?)''"
    r"|\"(?P<plain>[^\"]+?)\""
    r"|“(?P<curly>[^”]+?)”)"
)
_YEAR = re.compile(r"\(([^)]+)\)")
_SEPARATOR = re.compile(r"^\s*[-–—]\s*")


def _parse_entry(genre: Genre, text: str, line_no: int) -> Exemplar:
    title_match = _TITLE.match(text.strip())
    if not title_match:
        raise ParseFailure(
            f"line {line_no}: entry lacks a quoted title: {text[:80]!r}"
        )
    title = next(g for g in title_match.groups() if g is not None)
    rest = text.strip()[title_match.end():]
    year_match = _YEAR.search(rest)
    if not year_match or not year_match.group(1).strip():
        raise ParseFailure(
            f"line {line_no}: entry for {title!r} lacks a parenthesized year"
        )
    year_text = year_match.group(1).strip()
    after_year = rest[year_match.end():]
    sep = _SEPARATOR.match(after_year)
    if not sep:
        raise ParseFailure(
            f"line {line_no}: entry for {title!r} lacks the dash separator"
            " before its justification"
        )
    justification = after_year[sep.end():].strip()
    if not justification:
        raise ParseFailure(
            f"line {line_no}: entry for {title!r} has an empty justification"
        )
    return Exemplar(
        genre=genre,
        title=title.strip(),
        year_text=year_text,
        justification=justification,
    )


def parse_exemplars(text: str, prompt_fingerprint: str = "") -> ExemplarSet:
    """Parse a genre-by-genre title listing into an ExemplarSet.

    Recognizes numbered genre headings and bulleted entries of the shape
    quoted-title [extra words] (year text) - justification.  Quote style and
    dash style vary between model runs; all common forms are accepted.
    """
    if not text.strip():
        raise ParseFailure("empty exemplar response")
    current_genre: Optional[Genre] = None
    pending: Optional[tuple[int, str]] = None
    collected: list[Exemplar] = []

    def flush() -> None:
        nonlocal pending
        if pending is not None and current_genre is not None:
            line_no, body = pending
            collected.append(_parse_entry(current_genre, body, line_no))
            pending = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            flush()
            continue
        header = _HEADER.match(line)
        if header:
            flush()
            current_genre = Genre(header.group(1).strip())
            continue
        bullet = _BULLET.match(line)
        if bullet:
            flush()
            if current_genre is None:
                raise ParseFailure(
                    f"line {line_no}: entry appears before any genre heading"
                )
            pending = (line_no, bullet.group(1))
            continue
        if pending is not None:
            pending = (pending[0], pending[1] + " " + line.strip())
        # bare prose outside an entry is preamble or commentary; skipped
    flush()

    if current_genre is None:
        raise ParseFailure("no genre headings recognized in response")
    problems = exemplar_violations(tuple(collected))
    if problems:
        raise ParseFailure(
            "exemplar listing violates the three-per-genre contract",
            details={"violations": problems},
        )
    return ExemplarSet(
        exemplars=tuple(collected), prompt_fingerprint=prompt_fingerprint
    )


def exemplar_set_to_dict(exemplar_set: ExemplarSet) -> dict:
    return {
        "prompt_fingerprint": exemplar_set.prompt_fingerprint,
        "exemplars": [
            {
                "genre": e.genre.name,
                "title": e.title,
                "year_text": e.year_text,
                "justification": e.justification,
            }
            for e in exemplar_set.exemplars
        ],
    }


def exemplar_set_from_dict(data: dict) -> ExemplarSet:
    try:
        return ExemplarSet(
            exemplars=tuple(
                Exemplar(
                    genre=Genre(raw["genre"]),
                    title=str(raw["title"]),
                    year_text=str(raw["year_text"]),
                    justification=str(raw["justification"]),
                )
                for raw in data["exemplars"]
            ),
            prompt_fingerprint=str(data.get("prompt_fingerprint", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationFailure(f"malformed exemplar set: {exc}") from exc


# --- gateway flows ---

def _user(text: str) -> ChatMessage:
    return ChatMessage("user", text)


def _violation_text(err: ParseFailure) -> str:
    problems = err.details.get("violations") if err.details else None
    if problems:
        return "\n".join(f"- {p}" for p in problems)
    return f"- {err.message}"


def _retry_transcript(
    first: ChatTranscript, response: str, err: ParseFailure, hint: str
) -> ChatTranscript:
    body = render(
        CORRECTIVE_RETRY,
        {"violations": _violation_text(err), "format_hint": hint},
    )
    return ChatTranscript(
        model=first.model,
        temperature=first.temperature,
        messages=first.messages + (ChatMessage("assistant", response), _user(body)),
    )


def request_exemplars(
    profiles: list[GenreProfile], gateway: Gateway
) -> ExemplarSet:
    """Ask for three exemplar titles per genre and parse the answer."""
    if not profiles:
        raise EmptyInputError("at least one genre profile is required")
    prompt = build_exemplar_prompt(profiles)
    requested = [p.genre for p in profiles]
    first = ChatTranscript(
        model=MODEL_EXEMPLARS,
        temperature=TEMP_STRUCTURED,
        messages=(_user(prompt),),
    )
    response = gateway.complete(first, kind="exemplar-request")
    try:
        return _accept_exemplars(response, fingerprint(first), requested)
    except ParseFailure as err:
        retry = _retry_transcript(first, response, err, EXEMPLAR_FORMAT_HINT)
        second = gateway.complete(retry, kind="exemplar-request-retry")
        return _accept_exemplars(second, fingerprint(retry), requested)


def _accept_exemplars(
    response: str, token: str, requested: list[Genre]
) -> ExemplarSet:
    parsed = parse_exemplars(response, prompt_fingerprint=token)
    wanted = [g.name for g in requested]
    got = [g.name for g in parsed.genres()]
    problems = []
    for name in wanted:
        if name not in got:
            problems.append(f"requested genre {name!r} is missing")
    for name in got:
        if name not in wanted:
            problems.append(f"unrequested genre {name!r} appeared")
    if problems:
        raise ParseFailure(
            "exemplar listing does not cover the requested genres",
            details={"violations": problems},
        )
    return parsed


_STAGE_LINE = re.compile(r"^\s*STAGE\s+(\d+)\s*:\s*(.+)$", re.IGNORECASE)
_FEATURES_PREFIX = re.compile(r"^features\s*:\s*", re.IGNORECASE)


def _stage_records(text: str) -> list[tuple[int, list[str]]]:
    records = []
    for raw in text.splitlines():
        match = _STAGE_LINE.match(raw)
        if match:
            parts = [p.strip() for p in match.group(2).split("|")]
            records.append((int(match.group(1)), parts))
    if not records:
        raise ParseFailure(
            "no stage lines found in response",
            details={"response_head": text[:200]},
        )
    return records


def _check_numbering(records: list[tuple[int, list[str]]]) -> list[str]:
    numbers = [n for n, _ in records]
    if numbers != list(range(1, len(numbers) + 1)):
        return [f"stage numbers are not consecutive from 1: {numbers}"]
    return []


def _parse_outline(text: str, title: str, year_text: str) -> StoryOutline:
    records = _stage_records(text)
    problems = _check_numbering(records)
    if not OUTLINE_MIN_STAGES <= len(records) <= OUTLINE_MAX_STAGES:
        problems.append(
            f"{len(records)} stages, expected between {OUTLINE_MIN_STAGES}"
            f" and {OUTLINE_MAX_STAGES}"
        )
    stages = []
    vocabulary = set(FEATURE_TERMS)
    for number, parts in records:
        if len(parts) != 3:
            problems.append(
                f"stage {number}: expected label | description |"
                f" features, got {len(parts)} parts"
            )
            continue
        label, description, features_part = parts
        if not label:
            problems.append(f"stage {number}: empty label")
        if not description:
            problems.append(f"stage {number}: empty description")
        features_part = _FEATURES_PREFIX.sub("", features_part)
        names = [t.strip() for t in features_part.split(",") if t.strip()]
        if not 1 <= len(names) <= 4:
            problems.append(
                f"stage {number}: expected 1 to 4 feature terms, got {len(names)}"
            )
        unknown = [n for n in names if n not in vocabulary]
        if unknown:
            problems.append(
                f"stage {number}: feature terms outside the vocabulary: {unknown}"
            )
        if problems:
            continue
        stages.append(
            OutlineStage(
                label=label,
                description=description,
                features=tuple(parse_term(n) for n in names),
            )
        )
    if problems:
        raise ParseFailure(
            "outline response violates the stage-line format",
            details={"violations": problems},
        )
    return StoryOutline(title=title, year=year_text, stages=tuple(stages))


def outline_story(
    title: str, year_text: str, genre: Genre, gateway: Gateway
) -> StoryOutline:
    """Summarize a known narrative as 5 to 12 feature-tagged stages."""
    body = render(
        OUTLINE_STORY,
        {
            "title": title,
            "year_text": year_text,
            "genre": genre.name,
            "stage_min": str(OUTLINE_MIN_STAGES),
            "stage_max": str(OUTLINE_MAX_STAGES),
            "roles": ", ".join(ROLE_TERMS),
            "moves": ", ".join(MOVE_TERMS),
            "settings": ", ".join(SETTING_TERMS),
        },
    )
    first = ChatTranscript(
        model=MODEL_PATTERNS,
        temperature=TEMP_STRUCTURED,
        messages=(_user(body),),
    )
    response = gateway.complete(first, kind="outline-story")
    try:
        return _parse_outline(response, title, year_text)
    except ParseFailure as err:
        retry = _retry_transcript(first, response, err, STAGE_LINE_FORMAT_HINT)
        second = gateway.complete(retry, kind="outline-story-retry")
        return _parse_outline(second, title, year_text)


_NAME_WORD = re.compile(r"[A-Za-z][A-Za-z'’-]*")
_SENTENCE_STOPPERS = ".!?"
_NAME_STOPWORDS = frozenset(
    """
    The A An And But Or Nor For Yet So In On At To From Of By With As While
    When After Before During Through Against He She It They His Her Its Their
    This That These Those There Here Not No All Each Both One Two Three
    """.split()
)


def harvest_names(outlines: list[StoryOutline]) -> list[str]:
    """Capitalized non-sentence-initial words from outline descriptions.

    A heuristic proper-name list; used to forbid exemplar-specific names in
    rewritten pattern prose.
    """
    names = set()
    for outline in outlines:
        for stage in outline.stages:
            text = stage.description
            for match in _NAME_WORD.finditer(text):
                word = match.group(0)
                if not word[0].isupper() or word in _NAME_STOPWORDS:
                    continue
                head = text[: match.start()].rstrip()
                sentence_initial = not head or head[-1] in _SENTENCE_STOPPERS
                if sentence_initial:
                    continue
                names.add(word)
    return sorted(names)


def _names_clause(names: list[str]) -> str:
    if names:
        return "Do not mention any of these names: " + ", ".join(names) + "."
    return (
        "Do not mention any names of specific characters or places from the"
        " source narratives."
    )


def _parse_pattern_stages(
    text: str, expected_count: Optional[int]
) -> list[Stage]:
    records = _stage_records(text)
    problems = _check_numbering(records)
    if expected_count is not None and len(records) != expected_count:
        problems.append(
            f"{len(records)} stages, expected exactly {expected_count}"
        )
    if expected_count is None and not (
        OUTLINE_MIN_STAGES <= len(records) <= OUTLINE_MAX_STAGES
    ):
        problems.append(
            f"{len(records)} stages, expected between {OUTLINE_MIN_STAGES}"
            f" and {OUTLINE_MAX_STAGES}"
        )
    stages = []
    for number, parts in records:
        if len(parts) != 2:
            problems.append(
                f"stage {number}: expected label | description,"
                f" got {len(parts)} parts"
            )
            continue
        label, description = parts
        if not label:
            problems.append(f"stage {number}: empty label")
        elif word_count(label) > REWRITE_LABEL_MAX_WORDS:
            problems.append(
                f"stage {number}: label longer than"
                f" {REWRITE_LABEL_MAX_WORDS} words: {label!r}"
            )
        if not description:
            problems.append(f"stage {number}: empty description")
        elif not 1 <= sentence_count(description) <= 3:
            problems.append(
                f"stage {number}: description must be 1 to 3 sentences"
            )
        if problems:
            continue
        stages.append(Stage(index=number, name=label, description=description))
    if problems:
        raise ParseFailure(
            "pattern response violates the stage-line format",
            details={"violations": problems},
        )
    return stages


def _rewrite_stages(
    skeleton: PatternSkeleton, genre: Genre, names: list[str], gateway: Gateway
) -> list[Stage]:
    blocks = []
    for stage in skeleton.stages:
        lines = [f"STAGE {stage.index}: {stage.label}"]
        lines.extend(f"- {d}" for d in stage.source_descriptions)
        blocks.append("\n".join(lines))
    body = render(
        STAGE_REWRITE,
        {
            "genre": genre.name,
            "stage_count": str(len(skeleton.stages)),
            "stages_block": "\n\n".join(blocks),
            "names_clause": _names_clause(names),
        },
    )
    first = ChatTranscript(
        model=MODEL_PATTERNS,
        temperature=TEMP_STRUCTURED,
        messages=(_user(body),),
    )
    response = gateway.complete(first, kind="stage-rewrite")
    try:
        return _parse_pattern_stages(response, len(skeleton.stages))
    except ParseFailure as err:
        retry = _retry_transcript(first, response, err, STAGE_LINE_FORMAT_HINT)
        second = gateway.complete(retry, kind="stage-rewrite-retry")
        return _parse_pattern_stages(second, len(skeleton.stages))


def _direct_stages(
    exemplars: list[Exemplar], genre: Genre, gateway: Gateway
) -> list[Stage]:
    titles = ", ".join(
        f"“{e.title}” ({e.year_text})" for e in exemplars
    )
    body = render(
        PATTERN_DIRECT,
        {
            "genre": genre.name,
            "titles": titles,
            "stage_min": str(OUTLINE_MIN_STAGES),
            "stage_max": str(OUTLINE_MAX_STAGES),
            "names_clause": _names_clause([]),
        },
    )
    first = ChatTranscript(
        model=MODEL_PATTERNS,
        temperature=TEMP_STRUCTURED,
        messages=(_user(body),),
    )
    response = gateway.complete(first, kind="pattern-direct")
    try:
        return _parse_pattern_stages(response, None)
    except ParseFailure as err:
        retry = _retry_transcript(first, response, err, STAGE_LINE_FORMAT_HINT)
        second = gateway.complete(retry, kind="pattern-direct-retry")
        return _parse_pattern_stages(second, None)


def _finish_pattern(
    stages: list[Stage],
    genre: Genre,
    pattern_id: Optional[str],
    source_titles: tuple[str, ...],
) -> GenrePattern:
    pattern = GenrePattern(
        id=pattern_id or f"extracted-{genre.name}",
        genre=genre,
        title=display_genre(genre.name),
        stages=tuple(stages),
        provenance="extracted",
        source_titles=source_titles,
    )
    return ensure_valid(pattern)


def pattern_from_outlines(
    outlines: list[StoryOutline],
    genre: Genre,
    gateway: Gateway,
    pattern_id: Optional[str] = None,
    min_support: int = 2,
) -> GenrePattern:
    """Generalize already-outlined stories into a validated pattern."""
    if len(outlines) < 2:
        raise EmptyInputError(
            "pattern generalization needs at least 2 outlines"
        )
    skeleton = generalize(outlines, min_support=min_support)
    stages = _rewrite_stages(skeleton, genre, harvest_names(outlines), gateway)
    return _finish_pattern(
        stages, genre, pattern_id, tuple(o.title for o in outlines)
    )


def extract_pattern(
    exemplars: list[Exemplar],
    gateway: Gateway,
    mode: str = "deterministic",
    pattern_id: Optional[str] = None,
    min_support: int = 2,
) -> GenrePattern:
    """Distill one genre pattern from same-genre exemplars.

    deterministic: outline every exemplar, align and generalize the
    outlines, then have the model rewrite each merged stage as generic
    pattern prose.  llm_assisted: ask for the shared stage sequence in one
    step.  Both return a validated pattern with provenance "extracted".
    """
    if len(exemplars) < 2:
        raise EmptyInputError("pattern extraction needs at least 2 exemplars")
    genre_names = {e.genre.name for e in exemplars}
    if len(genre_names) != 1:
        raise ValidationFailure(
            f"exemplars span multiple genres: {sorted(genre_names)}"
        )
    genre = exemplars[0].genre
    if mode == "deterministic":
        outlines = [
            outline_story(e.title, e.year_text, genre, gateway)
            for e in exemplars
        ]
        return pattern_from_outlines(
            outlines,
            genre,
            gateway,
            pattern_id=pattern_id,
            min_support=min_support,
        )
    if mode == "llm_assisted":
        stages = _direct_stages(exemplars, genre, gateway)
        return _finish_pattern(
            stages, genre, pattern_id, tuple(e.title for e in exemplars)
        )
    raise ValidationFailure(
        f"unknown extraction mode {mode!r}"
        " (expected deterministic or llm_assisted)"
    )
