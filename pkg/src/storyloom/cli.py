"""Command-line front end: the full pipeline, headless.

Exit codes: 0 success, 1 usage or validation trouble, 2 provider trouble.
"""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path
from typing import Optional

import click

from .composer import Composer, story_from_dict, story_to_dict
from .curation import (
    Exemplar,
    exemplar_set_to_dict,
    extract_pattern,
    pattern_from_outlines,
    request_exemplars,
)
from .gateway import Gateway, gateway_from_env
from .outlines import outline_from_dict
from .patterns import (
    Genre,
    fundamental_profiles,
    pattern_from_dict,
    pattern_to_dict,
    profile_of,
)
from . import storyboard
from .errors import NotFoundError, StoryloomError, ValidationFailure
from .store import KIND_STORY, PatternCatalog, Store

# mirrors the 502 family in the HTTP layer
PROVIDER_CODES = frozenset(
    {
        "provider-error",
        "retries-exhausted",
        "fixture-miss",
        "parse-failure",
        "length-violation",
    }
)

_TITLE_ARG = re.compile(r"^(?P<title>.+?)\s*\((?P<year>[^)]+)\)\s*$")


class Runtime:
    """Lazily built handles so data-only commands skip gateway setup."""

    def __init__(
        self,
        store_path: str,
        transport: Optional[str],
        fixtures: Optional[str],
    ):
        self.store_path = Path(store_path)
        self.transport = transport
        self.fixtures = fixtures
        self._store: Optional[Store] = None
        self._catalog: Optional[PatternCatalog] = None
        self._composer: Optional[Composer] = None

    @property
    def store(self) -> Store:
        if self._store is None:
            self._store = Store(self.store_path)
        return self._store

    @property
    def catalog(self) -> PatternCatalog:
        # store-only handle, so data commands never touch the gateway
        if self._catalog is None:
            self._catalog = PatternCatalog(self.store)
        return self._catalog

    def load_story(self, story_id: str):
        if not story_id.isdigit():
            raise NotFoundError(f"no story {story_id!r}")
        return story_from_dict(self.store.get(KIND_STORY, int(story_id)))

    @property
    def gateway(self) -> Gateway:
        return self.composer.gateway

    @property
    def composer(self) -> Composer:
        if self._composer is None:
            gateway = gateway_from_env(
                transport=self.transport,
                fixtures=self.fixtures,
                journal_path=self.store_path / "journal.jsonl",
            )
            self._composer = Composer(self.store, gateway)
        return self._composer


@click.group(name="storyloom")
@click.option(
    "--store",
    "store_path",
    default="storyloom-data",
    envvar="STORYLOOM_STORE",
    show_default=True,
    help="Directory holding patterns, sessions, and stories.",
)
@click.option(
    "--transport",
    type=click.Choice(["live", "record", "replay"]),
    default=None,
    help="Completion transport; defaults to the environment, then replay.",
)
@click.option(
    "--fixtures",
    default=None,
    help="Fixture file for replay or record transports.",
)
@click.pass_context
def cli(ctx, store_path, transport, fixtures):
    ctx.obj = Runtime(store_path, transport, fixtures)


@cli.group()
def patterns():
    """Inspect and import genre patterns."""


@patterns.command("list")
@click.pass_obj
def patterns_list(runtime: Runtime):
    for pattern in runtime.catalog.list():
        click.echo(
            f"{pattern.id:<24} {pattern.genre.name:<14}"
            f" {len(pattern.stages):>2} stages  {pattern.title}"
        )


@patterns.command("show")
@click.argument("pattern_id")
@click.pass_obj
def patterns_show(runtime: Runtime, pattern_id: str):
    pattern = runtime.catalog.get(pattern_id)
    click.echo(json.dumps(pattern_to_dict(pattern), indent=2, ensure_ascii=False))


@patterns.command("import")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def patterns_import(runtime: Runtime, file: str):
    try:
        data = json.loads(Path(file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"{file} is not valid JSON: {exc}") from exc
    stored = runtime.catalog.add(pattern_from_dict(data))
    click.echo(f"imported pattern {stored.id}")


@cli.group()
def exemplars():
    """Collect genre exemplars."""


@exemplars.command("request")
@click.option(
    "--genre",
    "genre_names",
    multiple=True,
    help="Genre to cover; repeat for several. Default: all five.",
)
@click.pass_obj
def exemplars_request(runtime: Runtime, genre_names: tuple[str, ...]):
    if genre_names:
        profiles = [profile_of(Genre(name)) for name in genre_names]
    else:
        profiles = fundamental_profiles()
    result = request_exemplars(profiles, runtime.gateway)
    click.echo(json.dumps(exemplar_set_to_dict(result), indent=2, ensure_ascii=False))


@cli.command()
@click.option("--genre", "genre_name", required=True)
@click.option(
    "--titles",
    multiple=True,
    help='Exemplar as "Title (year)"; repeat for several.',
)
@click.option(
    "--outline-files",
    multiple=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Outline JSON files to generalize instead of fetching outlines.",
)
@click.option(
    "--mode",
    type=click.Choice(["deterministic", "llm_assisted"]),
    default="deterministic",
    show_default=True,
)
@click.pass_obj
def extract(runtime: Runtime, genre_name, titles, outline_files, mode):
    """Distill a pattern from exemplar titles or saved outlines."""
    if bool(titles) == bool(outline_files):
        raise click.UsageError("give either --titles or --outline-files")
    genre = Genre(genre_name)
    if outline_files:
        if mode != "deterministic":
            raise click.UsageError("--outline-files implies deterministic mode")
        outlines = []
        for file in outline_files:
            try:
                data = json.loads(Path(file).read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ValidationFailure(
                    f"{file} is not valid JSON: {exc}"
                ) from exc
            outlines.append(outline_from_dict(data))
        pattern = pattern_from_outlines(outlines, genre, runtime.gateway)
    else:
        entries = []
        for spec_text in titles:
            m = _TITLE_ARG.match(spec_text)
            if not m:
                raise ValidationFailure(
                    f'cannot read {spec_text!r}; expected "Title (year)"'
                )
            entries.append(
                Exemplar(
                    genre=genre,
                    title=m.group("title"),
                    year_text=m.group("year"),
                    justification="submitted directly",
                )
            )
        pattern = extract_pattern(entries, runtime.gateway, mode=mode)
    stored = runtime.catalog.add(pattern)
    click.echo(json.dumps(pattern_to_dict(stored), indent=2, ensure_ascii=False))


@cli.command()
@click.option("--premise", required=True)
@click.option("--pattern", "pattern_id", required=True)
@click.option(
    "--auto",
    is_flag=True,
    help="Accept every drafted stage without suggestions.",
)
@click.pass_obj
def compose(runtime: Runtime, premise, pattern_id, auto):
    """Compose a story stage by stage; prints the finished story as JSON."""
    composer = runtime.composer
    session = composer.create_session(premise, pattern_id)
    pattern = composer.pattern_for(session)
    stage_count = len(pattern.stages)
    click.echo(
        f"session {session.id}: {pattern.title}, {stage_count} stages",
        err=True,
    )
    while session.status != "complete":
        if session.status == "drafting":
            composer.draft_stage(session)
        stage = pattern.stages[session.cursor - 1]
        event = session.events[-1]
        click.echo(f"\n[{session.cursor}/{stage_count}] {stage.name}", err=True)
        click.echo(event.text, err=True)
        if auto:
            composer.accept(session)
            continue
        choice = click.prompt(
            "accept [a] / regenerate [r] / suggest [s] / quit [q]",
            type=click.Choice(["a", "r", "s", "q"]),
            err=True,
        )
        if choice == "a":
            composer.accept(session)
        elif choice == "r":
            composer.regenerate(session)
        elif choice == "s":
            suggestion = click.prompt("suggestion", err=True)
            composer.regenerate(session, suggestion)
        else:
            click.echo(f"session {session.id} left in progress", err=True)
            return
    story = composer.load_story(session.story_id)
    click.echo(f"story {story.id} saved", err=True)
    click.echo(json.dumps(story_to_dict(story), indent=2, ensure_ascii=False))


@cli.command()
@click.option("--story", "story_id", required=True)
@click.option(
    "--format",
    "format_name",
    type=click.Choice(list(storyboard.FORMATS)),
    default="html",
    show_default=True,
)
@click.option(
    "--out",
    default=".",
    show_default=True,
    help="Directory to write the export into.",
)
@click.pass_obj
def export(runtime: Runtime, story_id, format_name, out):
    """Render a finished story as a storyboard file."""
    story = runtime.load_story(story_id)
    pattern = runtime.catalog.get(story.pattern_id)
    document = storyboard.build(story, pattern)
    payload = storyboard.export(document, format_name)
    target = Path(out) / storyboard.export_filename(story_id, format_name)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(payload)
    click.echo(str(target))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8500, show_default=True)
@click.pass_obj
def serve(runtime: Runtime, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(runtime.composer), host=host, port=port)


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="storyloom")
        return 0
    except click.UsageError as err:
        err.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as err:
        err.show()
        return 1
    except StoryloomError as err:
        click.echo(f"error [{err.code}]: {err.message}", err=True)
        return 2 if err.code in PROVIDER_CODES else 1


if __name__ == "__main__":
    sys.exit(main())
