"""The interactive composition state machine.

A session walks a premise through a pattern stage by stage.  Each stage is
drafted as one 2-to-5-sentence event, reviewed, optionally regenerated with
a suggestion, and accepted; accepting the last stage produces a title and
summary and persists the finished story.  Session and story records carry
no timestamps, so identical inputs replay to identical bytes.

States: drafting (the cursor stage has no event yet), reviewing (the cursor
stage has an event awaiting accept or regenerate), complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    InvalidPremiseError,
    InvalidStateError,
    LengthViolationError,
    NotFoundError,
    RevisionLimitError,
    ValidationFailure,
)
from .gateway import (
    ChatMessage,
    ChatTranscript,
    Gateway,
    TEMP_CREATIVE,
    render,
)
from .patterns import Genre, GenrePattern, profile_of
from .prompts import (
    CORRECTIVE_RETRY,
    DRAFT_STAGE,
    EVENT_FORMAT_HINT,
    MODEL_EXEMPLARS,
    MODEL_PATTERNS,
    STORY_SUMMARY,
    STORY_TITLE,
    SUMMARY_FORMAT_HINT,
    TITLE_FORMAT_HINT,
)
from .store import KIND_SESSION, KIND_STORY, PatternCatalog, Store
from .textutil import jaccard, sentence_count, word_count

PREMISE_MAX_CHARS = 2000
EVENT_MIN_SENTENCES = 2
EVENT_MAX_SENTENCES = 5
TITLE_MAX_WORDS = 12
SUMMARY_MIN_SENTENCES = 3
SUMMARY_MAX_SENTENCES = 6
MAX_REGENERATIONS = 10

STATUS_DRAFTING = "drafting"
STATUS_REVIEWING = "reviewing"
STATUS_COMPLETE = "complete"

LOW_CONFORMANCE = 0.05


@dataclass(frozen=True)
class Premise:
    text: str

    def __post_init__(self) -> None:
        trimmed = self.text.strip()
        object.__setattr__(self, "text", trimmed)
        if not trimmed:
            raise InvalidPremiseError("premise must be non-empty")
        if len(trimmed) > PREMISE_MAX_CHARS:
            raise InvalidPremiseError(
                f"premise exceeds {PREMISE_MAX_CHARS} characters"
                f" ({len(trimmed)})",
                details={"length": len(trimmed)},
            )


@dataclass(frozen=True)
class StoryEvent:
    stage_index: int
    text: str
    suggestion: Optional[str] = None
    revision: int = 1
    image_prompt: Optional[str] = None

    def __post_init__(self) -> None:
        if self.stage_index < 1:
            raise ValidationFailure("event stage index must be >= 1")
        if self.revision < 1:
            raise ValidationFailure("event revision must be >= 1")
        if not self.text.strip():
            raise ValidationFailure("event text must be non-empty")


@dataclass
class CompositionSession:
    id: str
    premise: Premise
    pattern_id: str
    cursor: int = 1
    events: list[StoryEvent] = field(default_factory=list)
    status: str = STATUS_DRAFTING
    title: Optional[str] = None
    summary: Optional[str] = None
    story_id: Optional[str] = None


@dataclass(frozen=True)
class Story:
    id: str
    title: str
    premise: str
    genre: Genre
    pattern_id: str
    events: tuple[str, ...]
    summary: str

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValidationFailure("story title must be non-empty")
        if not self.events:
            raise ValidationFailure("story must have at least one event")


@dataclass(frozen=True)
class StageReport:
    stage_index: int
    score: float
    flagged: bool


def session_invariants(
    session: CompositionSession, stage_count: int
) -> list[str]:
    """Structural invariant check; empty list when the session is sound."""
    problems = []
    if session.status not in (
        STATUS_DRAFTING,
        STATUS_REVIEWING,
        STATUS_COMPLETE,
    ):
        problems.append(f"unknown status {session.status!r}")
        return problems
    if not 1 <= session.cursor <= stage_count:
        problems.append(
            f"cursor {session.cursor} outside [1, {stage_count}]"
        )
    for i, event in enumerate(session.events):
        if event.stage_index != i + 1:
            problems.append(
                f"event {i} has stage_index {event.stage_index},"
                f" expected {i + 1}"
            )
        if not 1 <= event.revision <= MAX_REGENERATIONS + 1:
            problems.append(
                f"event {i} revision {event.revision} outside"
                f" [1, {MAX_REGENERATIONS + 1}]"
            )
    drafted = len(session.events)
    if session.status == STATUS_DRAFTING and drafted != session.cursor - 1:
        problems.append(
            f"drafting with {drafted} events at cursor {session.cursor}"
        )
    if session.status == STATUS_REVIEWING and drafted != session.cursor:
        problems.append(
            f"reviewing with {drafted} events at cursor {session.cursor}"
        )
    if session.status == STATUS_COMPLETE:
        if drafted != stage_count:
            problems.append(
                f"complete with {drafted} of {stage_count} events"
            )
        if not session.title or not session.summary:
            problems.append("complete without title and summary")
        if session.cursor != stage_count:
            problems.append("complete with cursor off the last stage")
    return problems


# --- serialization (no timestamps anywhere) ---

def event_to_dict(event: StoryEvent) -> dict:
    return {
        "stage_index": event.stage_index,
        "text": event.text,
        "suggestion": event.suggestion,
        "revision": event.revision,
        "image_prompt": event.image_prompt,
    }


def event_from_dict(data: dict) -> StoryEvent:
    return StoryEvent(
        stage_index=int(data["stage_index"]),
        text=str(data["text"]),
        suggestion=data.get("suggestion"),
        revision=int(data.get("revision", 1)),
        image_prompt=data.get("image_prompt"),
    )


def session_to_dict(session: CompositionSession) -> dict:
    return {
        "id": session.id,
        "premise": session.premise.text,
        "pattern_id": session.pattern_id,
        "cursor": session.cursor,
        "status": session.status,
        "events": [event_to_dict(e) for e in session.events],
        "title": session.title,
        "summary": session.summary,
        "story_id": session.story_id,
    }


def session_from_dict(data: dict) -> CompositionSession:
    try:
        return CompositionSession(
            id=str(data["id"]),
            premise=Premise(str(data["premise"])),
            pattern_id=str(data["pattern_id"]),
            cursor=int(data["cursor"]),
            status=str(data["status"]),
            events=[event_from_dict(e) for e in data.get("events", [])],
            title=data.get("title"),
            summary=data.get("summary"),
            story_id=data.get("story_id"),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationFailure(f"malformed session record: {exc}") from exc


def story_to_dict(story: Story) -> dict:
    return {
        "id": story.id,
        "title": story.title,
        "premise": story.premise,
        "genre": story.genre.name,
        "pattern_id": story.pattern_id,
        "events": list(story.events),
        "summary": story.summary,
    }


def story_from_dict(data: dict) -> Story:
    try:
        return Story(
            id=str(data["id"]),
            title=str(data["title"]),
            premise=str(data["premise"]),
            genre=Genre(str(data["genre"])),
            pattern_id=str(data["pattern_id"]),
            events=tuple(str(t) for t in data["events"]),
            summary=str(data["summary"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationFailure(f"malformed story record: {exc}") from exc


class SessionRepository:
    """Append-only persistence: every save writes a new store revision; a
    session id always resolves to its latest revision."""

    def __init__(self, store: Store):
        self.store = store
        self._latest: dict[str, int] = {}

    def create(self, make_session) -> CompositionSession:
        created = {}

        def shape(record_id: int) -> dict:
            session = make_session(str(record_id))
            created["session"] = session
            return session_to_dict(session)

        record_id = self.store.put_with(KIND_SESSION, shape)
        session = created["session"]
        self._latest[session.id] = record_id
        return session

    def save(self, session: CompositionSession) -> None:
        record_id = self.store.put(KIND_SESSION, session_to_dict(session))
        self._latest[session.id] = record_id

    def load(self, session_id: str) -> CompositionSession:
        cached = self._latest.get(session_id)
        if cached is not None:
            return session_from_dict(self.store.get(KIND_SESSION, cached))
        for record_id in reversed(self.store.list(KIND_SESSION)):
            record = self.store.get(KIND_SESSION, record_id)
            if record.get("id") == session_id:
                self._latest[session_id] = record_id
                return session_from_dict(record)
        raise NotFoundError(
            f"no session {session_id!r}", details={"session_id": session_id}
        )


class Composer:
    """Drives sessions through their pattern; owns persistence and prompts."""

    def __init__(self, store: Store, gateway: Gateway):
        self.store = store
        self.gateway = gateway
        self.catalog = PatternCatalog(store)
        self.sessions = SessionRepository(store)

    # --- session lifecycle ---

    def create_session(
        self, premise_text: str, pattern_id: str
    ) -> CompositionSession:
        premise = Premise(premise_text)
        pattern = self.catalog.get(pattern_id)
        return self.sessions.create(
            lambda session_id: CompositionSession(
                id=session_id, premise=premise, pattern_id=pattern.id
            )
        )

    def load_session(self, session_id: str) -> CompositionSession:
        return self.sessions.load(session_id)

    def pattern_for(self, session: CompositionSession) -> GenrePattern:
        return self.catalog.get(session.pattern_id)

    # --- operations ---

    def draft_stage(
        self, session: CompositionSession, suggestion: Optional[str] = None
    ) -> StoryEvent:
        if session.status != STATUS_DRAFTING:
            raise InvalidStateError(
                f"cannot draft while {session.status}",
                details={"status": session.status, "expected": STATUS_DRAFTING},
            )
        pattern = self.pattern_for(session)
        event = self._generate_event(session, pattern, suggestion, revision=1)
        session.events.append(event)
        session.status = STATUS_REVIEWING
        self.sessions.save(session)
        return event

    def regenerate(
        self, session: CompositionSession, suggestion: Optional[str] = None
    ) -> StoryEvent:
        if session.status != STATUS_REVIEWING:
            raise InvalidStateError(
                f"cannot regenerate while {session.status}",
                details={
                    "status": session.status,
                    "expected": STATUS_REVIEWING,
                },
            )
        current = session.events[-1]
        if current.revision > MAX_REGENERATIONS:
            raise RevisionLimitError(
                f"stage {session.cursor} already regenerated"
                f" {MAX_REGENERATIONS} times",
                details={"stage_index": session.cursor},
            )
        pattern = self.pattern_for(session)
        event = self._generate_event(
            session, pattern, suggestion, revision=current.revision + 1
        )
        session.events[-1] = event
        self.sessions.save(session)
        return event

    def accept(self, session: CompositionSession) -> CompositionSession:
        if session.status != STATUS_REVIEWING:
            raise InvalidStateError(
                f"cannot accept while {session.status}",
                details={
                    "status": session.status,
                    "expected": STATUS_REVIEWING,
                },
            )
        stage_count = len(self.pattern_for(session).stages)
        if session.cursor == stage_count:
            self.finalize(session)
        else:
            session.cursor += 1
            session.status = STATUS_DRAFTING
            self.sessions.save(session)
        return session

    def finalize(self, session: CompositionSession) -> Story:
        pattern = self.pattern_for(session)
        if session.status != STATUS_REVIEWING or session.cursor != len(
            pattern.stages
        ):
            raise InvalidStateError(
                "finalize requires every stage to be drafted and the last"
                " one under review",
                details={"status": session.status, "cursor": session.cursor},
            )
        title = self._generate_title(session)
        summary = self._generate_summary(session)

        stored = {}

        def shape(record_id: int) -> dict:
            story = Story(
                id=str(record_id),
                title=title,
                premise=session.premise.text,
                genre=pattern.genre,
                pattern_id=session.pattern_id,
                events=tuple(e.text for e in session.events),
                summary=summary,
            )
            stored["story"] = story
            return story_to_dict(story)

        self.store.put_with(KIND_STORY, shape)
        story = stored["story"]
        session.title = title
        session.summary = summary
        session.story_id = story.id
        session.status = STATUS_COMPLETE
        self.sessions.save(session)
        return story

    def load_story(self, story_id: str) -> Story:
        if not story_id.isdigit():
            raise NotFoundError(f"no story {story_id!r}")
        return story_from_dict(self.store.get(KIND_STORY, int(story_id)))

    # --- generation helpers ---

    def _generate_event(
        self,
        session: CompositionSession,
        pattern: GenrePattern,
        suggestion: Optional[str],
        revision: int,
    ) -> StoryEvent:
        stage = pattern.stages[session.cursor - 1]
        profile = profile_of(pattern.genre)
        prior = [e.text for e in session.events[: session.cursor - 1]]
        suggestion_clause = ""
        if suggestion and suggestion.strip():
            suggestion_clause = (
                f"Reader suggestion to accommodate: {suggestion}\n\n"
            )
        body = render(
            DRAFT_STAGE,
            {
                "premise": session.premise.text,
                "genre": pattern.genre.name,
                "world": profile.world or profile.definition,
                "protagonist": profile.protagonist or "drives the plot",
                "stage_name": stage.name,
                "stage_description": stage.description,
                "prior_events": "\n\n".join(prior) if prior else "(none yet)",
                "suggestion_clause": suggestion_clause,
            },
        )
        text = self._complete_with_length_check(
            body,
            kind="draft-stage",
            session_id=session.id,
            check=lambda t: EVENT_MIN_SENTENCES
            <= sentence_count(t)
            <= EVENT_MAX_SENTENCES,
            problem=(
                f"the event must be {EVENT_MIN_SENTENCES} to"
                f" {EVENT_MAX_SENTENCES} sentences"
            ),
            hint=EVENT_FORMAT_HINT,
            model=MODEL_PATTERNS,
        )
        return StoryEvent(
            stage_index=session.cursor,
            text=text,
            suggestion=suggestion,
            revision=revision,
        )

    def _generate_title(self, session: CompositionSession) -> str:
        body = render(
            STORY_TITLE,
            {
                "premise": session.premise.text,
                "events": "\n\n".join(e.text for e in session.events),
            },
        )
        return self._complete_with_length_check(
            body,
            kind="story-title",
            session_id=session.id,
            check=lambda t: bool(t)
            and word_count(t) <= TITLE_MAX_WORDS
            and "\n" not in t,
            problem=f"the title must be at most {TITLE_MAX_WORDS} words on one line",
            hint=TITLE_FORMAT_HINT,
            model=MODEL_PATTERNS,
        )

    def _generate_summary(self, session: CompositionSession) -> str:
        body = render(
            STORY_SUMMARY,
            {
                "premise": session.premise.text,
                "events": "\n\n".join(e.text for e in session.events),
            },
        )
        return self._complete_with_length_check(
            body,
            kind="story-summary",
            session_id=session.id,
            check=lambda t: SUMMARY_MIN_SENTENCES
            <= sentence_count(t)
            <= SUMMARY_MAX_SENTENCES,
            problem=(
                f"the summary must be {SUMMARY_MIN_SENTENCES} to"
                f" {SUMMARY_MAX_SENTENCES} sentences"
            ),
            hint=SUMMARY_FORMAT_HINT,
            model=MODEL_EXEMPLARS,
        )

    def _complete_with_length_check(
        self, body, kind, session_id, check, problem, hint, model
    ) -> str:
        first = ChatTranscript(
            model=model,
            temperature=TEMP_CREATIVE,
            messages=(ChatMessage("user", body),),
        )
        text = self.gateway.complete(
            first, kind=kind, session_id=session_id
        ).strip()
        if check(text):
            return text
        retry_body = render(
            CORRECTIVE_RETRY, {"violations": f"- {problem}", "format_hint": hint}
        )
        retry = ChatTranscript(
            model=model,
            temperature=TEMP_CREATIVE,
            messages=first.messages
            + (ChatMessage("assistant", text), ChatMessage("user", retry_body)),
        )
        second = self.gateway.complete(
            retry, kind=f"{kind}-retry", session_id=session_id
        ).strip()
        if check(second):
            return second
        raise LengthViolationError(
            f"{kind} failed its length contract after a retry: {problem}",
            details={"kind": kind, "text": second[:300]},
        )


def consistency_report(
    story: Story, pattern: GenrePattern
) -> list[StageReport]:
    """Advisory per-stage similarity between event text and stage prose."""
    if len(story.events) != len(pattern.stages):
        raise ValidationFailure(
            f"story has {len(story.events)} events but pattern"
            f" {pattern.id} has {len(pattern.stages)} stages"
        )
    report = []
    for stage, text in zip(pattern.stages, story.events):
        score = jaccard(text, stage.description)
        report.append(
            StageReport(
                stage_index=stage.index,
                score=score,
                flagged=score < LOW_CONFORMANCE,
            )
        )
    return report
