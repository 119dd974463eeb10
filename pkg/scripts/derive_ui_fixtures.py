#!/usr/bin/env python3
"""Derive the frontend test fixture from a replayed composition.

Runs the suggest-then-finish mystery walkthrough against the bundled
replay fixtures and snapshots everything the mocked backend needs: the
pattern catalog, every drafted text, the finished story, its storyboard
document, and the exact export bytes.
"""

import json
import sys
from pathlib import Path

from storyloom import storyboard
from storyloom.composer import Composer, story_to_dict
from storyloom.gateway import Gateway, ReplayTransport, bundled_fixture_path
from storyloom.patterns import builtin_patterns, pattern_to_dict
from storyloom.store import MemoryStore

ROOT = Path(__file__).resolve().parents[1]
TARGET = ROOT / "frontend" / "tests" / "fixtures.json"
PREMISES = json.loads(
    (ROOT / "tests" / "fixtures" / "premises.json").read_text(encoding="utf-8")
)

SUGGESTION_RAVEN = "Introduce a mysterious raven as an omen."


def main():
    composer = Composer(
        MemoryStore(), Gateway(ReplayTransport(bundled_fixture_path()))
    )
    session = composer.create_session(PREMISES["eira"], "builtin-mystery")

    plain_first = composer.draft_stage(session).text
    composer.regenerate(session, SUGGESTION_RAVEN)
    composer.accept(session)
    for _ in range(8):
        composer.draft_stage(session)
        composer.accept(session)
    assert session.status == "complete", session.status

    story = composer.load_story(session.story_id)
    pattern = composer.pattern_for(session)
    document = storyboard.build(story, pattern)

    payload = {
        "premise": PREMISES["eira"],
        "patterns": [pattern_to_dict(p) for p in builtin_patterns()],
        "walk": {
            "pattern_id": pattern.id,
            "plain_first_draft": plain_first,
            "suggestion": SUGGESTION_RAVEN,
            "drafts": list(story.events),
            "title": story.title,
            "summary": story.summary,
        },
        "story": story_to_dict(story),
        "storyboard": storyboard.document_to_dict(document),
        "exports": {
            "markdown": storyboard.export(document, "markdown").decode("utf-8"),
            "html": storyboard.export(document, "html").decode("utf-8"),
        },
    }

    TARGET.parent.mkdir(parents=True, exist_ok=True)
    TARGET.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {TARGET}")


if __name__ == "__main__":
    sys.exit(main())
