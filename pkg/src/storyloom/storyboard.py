"""Storyboard documents: one panel per story event, with export formats.

Image synthesis stays behind a small renderer interface; the default
renderer emits a placeholder so exports work with no image backend.
"""

from __future__ import annotations

import base64
import html as html_escape
import json
from dataclasses import dataclass, replace
from typing import Optional

from .composer import Story
from .errors import ValidationFailure
from .patterns import GenrePattern
from .textutil import first_sentence

FORMATS = ("html", "markdown", "json")
_EXTENSIONS = {"html": "html", "markdown": "md", "json": "json"}

PROMPT_SUFFIX = "detailed scene, no text overlay"


@dataclass(frozen=True)
class Panel:
    stage_name: str
    event_text: str
    image_prompt: str
    image_ref: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.stage_name.strip():
            raise ValidationFailure("panel stage name must be non-empty")
        if not self.event_text.strip():
            raise ValidationFailure("panel event text must be non-empty")


@dataclass(frozen=True)
class StoryboardDocument:
    title: str
    premise: str
    panels: tuple[Panel, ...]
    summary: str

    def __post_init__(self) -> None:
        if not self.panels:
            raise ValidationFailure("storyboard needs at least one panel")


def image_prompt(event_text: str, style: str = "") -> str:
    subject = first_sentence(event_text)
    style = style.strip()
    if style:
        return f"{style}, {subject}, {PROMPT_SUFFIX}"
    return f"{subject}, {PROMPT_SUFFIX}"


def build(
    story: Story, pattern: GenrePattern, style: str = ""
) -> StoryboardDocument:
    if pattern.id != story.pattern_id:
        raise ValidationFailure(
            f"pattern {pattern.id} does not match story pattern"
            f" {story.pattern_id}",
            details={"pattern_id": pattern.id, "story_pattern": story.pattern_id},
        )
    if len(story.events) != len(pattern.stages):
        raise ValidationFailure(
            f"story has {len(story.events)} events but pattern has"
            f" {len(pattern.stages)} stages"
        )
    panels = tuple(
        Panel(
            stage_name=stage.name,
            event_text=text,
            image_prompt=image_prompt(text, style),
        )
        for stage, text in zip(pattern.stages, story.events)
    )
    return StoryboardDocument(
        title=story.title,
        premise=story.premise,
        panels=panels,
        summary=story.summary,
    )


# --- image rendering seam ---

class ImageRenderer:
    """Interface: produce image bytes for a prompt."""

    def render(self, prompt: str) -> bytes:
        raise NotImplementedError


# 1x1 grey PNG; enough to keep exports self-contained without a backend
_PLACEHOLDER_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR4nGNoaGj4"
    "DwAFhAKAaeaMpwAAAABJRU5ErkJggg=="
)


class PlaceholderRenderer(ImageRenderer):
    def render(self, prompt: str) -> bytes:
        return _PLACEHOLDER_PNG


def with_images(
    document: StoryboardDocument, renderer: Optional[ImageRenderer] = None
) -> StoryboardDocument:
    """Attach a data URI per panel; panels keep any image_ref they already have."""
    renderer = renderer or PlaceholderRenderer()
    panels = []
    for panel in document.panels:
        if panel.image_ref is not None:
            panels.append(panel)
            continue
        payload = base64.b64encode(renderer.render(panel.image_prompt)).decode(
            "ascii"
        )
        panels.append(
            replace(panel, image_ref=f"data:image/png;base64,{payload}")
        )
    return replace(document, panels=tuple(panels))


# --- serialization and export ---

def document_to_dict(document: StoryboardDocument) -> dict:
    return {
        "title": document.title,
        "premise": document.premise,
        "panels": [
            {
                "stage_name": p.stage_name,
                "event_text": p.event_text,
                "image_prompt": p.image_prompt,
                "image_ref": p.image_ref,
            }
            for p in document.panels
        ],
        "summary": document.summary,
    }


def document_from_dict(data: dict) -> StoryboardDocument:
    try:
        return StoryboardDocument(
            title=str(data["title"]),
            premise=str(data["premise"]),
            panels=tuple(
                Panel(
                    stage_name=str(p["stage_name"]),
                    event_text=str(p["event_text"]),
                    image_prompt=str(p["image_prompt"]),
                    image_ref=p.get("image_ref"),
                )
                for p in data["panels"]
            ),
            summary=str(data["summary"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationFailure(
            f"malformed storyboard record: {exc}"
        ) from exc


def _export_json(document: StoryboardDocument) -> str:
    return json.dumps(document_to_dict(document), indent=2, ensure_ascii=False)


def _export_markdown(document: StoryboardDocument) -> str:
    lines = [f"# {document.title}", "", f"> {document.premise}", ""]
    for n, panel in enumerate(document.panels, start=1):
        lines.append(f"## {n}. {panel.stage_name}")
        lines.append("")
        if panel.image_ref is not None:
            lines.append(f"![{panel.stage_name}]({panel.image_ref})")
            lines.append("")
        lines.append(panel.event_text)
        lines.append("")
        lines.append(f"*Image prompt: {panel.image_prompt}*")
        lines.append("")
    lines.append(f"**Summary.** {document.summary}")
    lines.append("")
    return "\n".join(lines)


_PAGE_STYLE = (
    "body{font-family:Georgia,serif;max-width:48rem;margin:2rem auto;"
    "padding:0 1rem}figure{border:1px solid #ccc;margin:1.5rem 0;"
    "padding:1rem}figcaption{font-weight:bold}img{max-width:100%}"
    ".prompt{color:#666;font-style:italic}"
)


def _export_html(document: StoryboardDocument) -> str:
    esc = html_escape.escape
    parts = [
        "<!doctype html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8"/>',
        f"<title>{esc(document.title)}</title>",
        f"<style>{_PAGE_STYLE}</style>",
        "</head>",
        "<body>",
        f"<h1>{esc(document.title)}</h1>",
        f'<p class="premise">{esc(document.premise)}</p>',
    ]
    for n, panel in enumerate(document.panels, start=1):
        parts.append("<figure>")
        parts.append(f"<figcaption>{n}. {esc(panel.stage_name)}</figcaption>")
        if panel.image_ref is not None:
            parts.append(
                f'<img src="{esc(panel.image_ref)}"'
                f' alt="{esc(panel.stage_name)}"/>'
            )
        parts.append(f"<p>{esc(panel.event_text)}</p>")
        parts.append(f'<p class="prompt">{esc(panel.image_prompt)}</p>')
        parts.append("</figure>")
    parts.append(f'<p class="summary">{esc(document.summary)}</p>')
    parts.append("</body>")
    parts.append("</html>")
    return "\n".join(parts)


def export(document: StoryboardDocument, format: str) -> bytes:
    if format == "json":
        text = _export_json(document)
    elif format == "markdown":
        text = _export_markdown(document)
    elif format == "html":
        text = _export_html(document)
    else:
        raise ValidationFailure(
            f"unknown export format {format!r}",
            details={"format": format, "known": list(FORMATS)},
        )
    return text.encode("utf-8")


def export_filename(story_id: str, format: str) -> str:
    if format not in _EXTENSIONS:
        raise ValidationFailure(f"unknown export format {format!r}")
    return f"story-{story_id}.{_EXTENSIONS[format]}"
