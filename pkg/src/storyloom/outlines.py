"""Story outline alignment and pattern skeleton extraction.

Outlines of different narratives rarely agree stage for stage, so before
generalizing they are lined up by progressive global alignment: the first
two outlines are aligned with a gapped dynamic program, then every further
outline is aligned against the running consensus.  Columns supported by
enough outlines become skeleton stages whose feature terms are the least
general generalization of the contributors' features.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import EmptyInputError, EmptyResultError, ValidationFailure
from .terms import (
    Term,
    Variable,
    is_ground,
    lgg2,
    substitute,
    term_from_dict,
    term_to_dict,
    variables,
)
from .textutil import jaccard, normalize_ws

GAP_PENALTY = 0.05
LABEL_BONUS = 0.25


@dataclass(frozen=True)
class OutlineStage:
    """One stage of a concrete story outline; features must be ground."""

    label: str
    description: str
    features: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not self.label.strip():
            raise ValidationFailure("outline stage label must be non-empty")
        for feature in self.features:
            if not is_ground(feature):
                raise ValidationFailure(
                    f"outline stage feature {feature} is not ground"
                )


@dataclass(frozen=True)
class StoryOutline:
    """A titled, ordered stage sequence for one narrative."""

    title: str
    stages: tuple[OutlineStage, ...]
    # publication year when known; free text like "circa 1600" is allowed
    year: Union[int, str, None] = None

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValidationFailure("story outline needs at least one stage")


@dataclass(frozen=True)
class Alignment:
    """Aligned stage columns.

    columns[c][o] is the 0-based stage position of outline o in column c, or
    None when the outline has no stage there.  Within each outline the
    present positions are strictly increasing across columns, and every
    stage appears in exactly one column.
    """

    columns: tuple[tuple[Optional[int], ...], ...]

    def support(self, column: int) -> int:
        return sum(1 for pos in self.columns[column] if pos is not None)


Scorer = Callable[[OutlineStage, OutlineStage], float]


def default_scorer(a: OutlineStage, b: OutlineStage) -> float:
    """Token-set overlap of descriptions plus a bonus for identical labels.

    Clamped to [0, 1].  A zero score marks the pair as unrelated; alignment
    never pairs such stages.
    """
    score = jaccard(a.description, b.description)
    if normalize_ws(a.label) == normalize_ws(b.label):
        score += LABEL_BONUS
    return min(1.0, max(0.0, score))


def align(outlines: list[StoryOutline], scorer: Optional[Scorer] = None) -> Alignment:
    """Progressive global alignment of two or more outlines.

    Pairs of stages may only occupy the same column when their similarity is
    strictly positive; gaps cost GAP_PENALTY.  Ties prefer a match over a
    gap, then the gap that advances the consensus (keeping earlier columns
    earlier).  Scoring a stage against a consensus column averages the
    pairwise scores over the column's present members.
    """
    if len(outlines) < 2:
        raise EmptyInputError("alignment needs at least two outlines")
    score = scorer or default_scorer
    columns: list[list[Optional[int]]] = [
        [pos] for pos in range(len(outlines[0].stages))
    ]
    for nxt in range(1, len(outlines)):
        columns = _merge(columns, outlines, nxt, score)
    return Alignment(tuple(tuple(col) for col in columns))


def _merge(
    columns: list[list[Optional[int]]],
    outlines: list[StoryOutline],
    new_index: int,
    score: Scorer,
) -> list[list[Optional[int]]]:
    stages = outlines[new_index].stages
    seen = len(columns[0]) if columns else new_index
    n, m = len(columns), len(stages)

    def column_score(ci: int, sj: int) -> float:
        members = [
            score(outlines[o].stages[pos], stages[sj])
            for o, pos in enumerate(columns[ci])
            if pos is not None
        ]
        return sum(members) / len(members)

    dp = [[0.0] * (m + 1) for _ in range(n + 1)]
    move = [[""] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = -GAP_PENALTY * i
        move[i][0] = "up"
    for j in range(1, m + 1):
        dp[0][j] = -GAP_PENALTY * j
        move[0][j] = "left"
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            pair = column_score(i - 1, j - 1)
            options = []
            if pair > 0:
                options.append((dp[i - 1][j - 1] + pair, 0, "diag"))
            options.append((dp[i - 1][j] - GAP_PENALTY, 1, "up"))
            options.append((dp[i][j - 1] - GAP_PENALTY, 2, "left"))
            value, _, direction = max(options, key=lambda o: (o[0], -o[1]))
            dp[i][j] = value
            move[i][j] = direction

    merged: list[list[Optional[int]]] = []
    i, j = n, m
    while i > 0 or j > 0:
        direction = move[i][j]
        if direction == "diag":
            merged.append(columns[i - 1] + [j - 1])
            i, j = i - 1, j - 1
        elif direction == "up":
            merged.append(columns[i - 1] + [None])
            i -= 1
        else:
            merged.append([None] * seen + [j - 1])
            j -= 1
    merged.reverse()
    return merged


@dataclass(frozen=True)
class SkeletonStage:
    """A merged stage: generalized features plus the contributing prose."""

    index: int
    label: str
    features: tuple[Term, ...]
    source_descriptions: tuple[str, ...]


@dataclass(frozen=True)
class PatternSkeleton:
    """Aligned, generalized stage structure awaiting prose abstraction."""

    stages: tuple[SkeletonStage, ...]
    outline_titles: tuple[str, ...]
    min_support: int


def generalize(
    outlines: list[StoryOutline],
    min_support: int = 2,
    scorer: Optional[Scorer] = None,
) -> PatternSkeleton:
    """Align outlines and keep columns supported by >= min_support of them.

    Each kept column becomes one skeleton stage: label from the first
    contributor in input order, features generalized position-wise when all
    contributors carry the same feature count (a lone variable otherwise),
    and the contributors' descriptions retained for downstream rewriting.
    """
    if len(outlines) < 2:
        raise EmptyInputError("generalization needs at least two outlines")
    if not 2 <= min_support <= len(outlines):
        raise ValidationFailure(
            f"min_support must be between 2 and {len(outlines)}, got {min_support}"
        )
    alignment = align(outlines, scorer)
    kept: list[list[OutlineStage]] = []
    for column in alignment.columns:
        contributors = [
            outlines[o].stages[pos]
            for o, pos in enumerate(column)
            if pos is not None
        ]
        if len(contributors) >= min_support:
            kept.append(contributors)
    if not kept:
        raise EmptyResultError(
            "no aligned stage meets the support threshold",
            details={"min_support": min_support},
        )
    stages = tuple(
        SkeletonStage(
            index=i + 1,
            label=contributors[0].label,
            features=tuple(_merge_features([s.features for s in contributors])),
            source_descriptions=tuple(s.description for s in contributors),
        )
        for i, contributors in enumerate(kept)
    )
    return PatternSkeleton(
        stages=stages,
        outline_titles=tuple(o.title for o in outlines),
        min_support=min_support,
    )


def _merge_features(feature_lists: list[tuple[Term, ...]]) -> list[Term]:
    counts = {len(features) for features in feature_lists}
    if counts == {0}:
        return []
    if len(counts) != 1:
        # disagreeing feature counts generalize to a single variable
        return [Variable("X1")]
    merged = []
    for position in range(counts.pop()):
        acc = feature_lists[0][position]
        for features in feature_lists[1:]:
            acc = lgg2(acc, features[position])
        merged.append(acc)
    return _rename_apart(merged)


def _rename_apart(terms: list[Term]) -> list[Term]:
    # one counter across the stage so no two positions share a variable name
    renamed = []
    counter = 0
    for term in terms:
        mapping = {}
        for var in variables(term):
            counter += 1
            mapping[var] = Variable(f"X{counter}")
        renamed.append(substitute(term, mapping))
    return renamed


# --- serialization (outline interchange format) ---

def outline_to_dict(outline: StoryOutline) -> dict:
    return {
        "title": outline.title,
        "year": outline.year,
        "stages": [
            {
                "label": stage.label,
                "description": stage.description,
                "features": [term_to_dict(f) for f in stage.features],
            }
            for stage in outline.stages
        ],
    }


def outline_from_dict(data: dict) -> StoryOutline:
    try:
        year = data.get("year")
        if year is not None and not isinstance(year, (int, str)):
            raise ValidationFailure(f"outline year must be int or text: {year!r}")
        return StoryOutline(
            title=str(data["title"]),
            year=year,
            stages=tuple(
                OutlineStage(
                    label=str(raw["label"]),
                    description=str(raw["description"]),
                    features=tuple(
                        term_from_dict(f) for f in raw.get("features", [])
                    ),
                )
                for raw in data["stages"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailure(f"malformed outline document: {exc}") from exc
